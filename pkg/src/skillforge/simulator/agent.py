"""Mock Plan -> Act -> Reflect -> Learn loop producing real ledgers.

No model is called.  Every outcome the real system would get from a model or
a browser is drawn from an ``Oracle``: a seeded random one for streams, or a
scripted one for replaying a fixed scenario.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..learning import library_update
from ..ledger import (FAIL, INFEASIBLE, REPEAT_ACTION, SUCCESS, LedgerEvent, SubgoalSegment,
                      TaskTrajectoryView, normalize_action_signature)
from ..metrics.report import REPEAT_LIMIT, repeat_loop_detected
from ..skills.retrieval import ActionRecord, MonitorReport, match_rules, retrieve
from ..skills.types import RuleSkill, SkillLibrary, parse_trigger_pattern
from .stream import generate_stream, should_reflect

LOOP_ESCAPE_TARGET = "url_parameter_equivalent"


class RandomOracle:
    """Outcome draws from one seeded generator, consumed in execution order."""

    def __init__(self, seed):
        self.rng = np.random.default_rng([seed, 1])

    def routine_pass(self, template, subgoal):
        return bool(self.rng.random() < template.reliability)

    def actor_pass(self, template, subgoal, attempt):
        return bool(self.rng.random() < subgoal.success_prob)


def default_seed_library():
    """A single universal guard rule against clicking the same element three times."""
    rule = RuleSkill(
        "repeat_click_same_element",
        parse_trigger_pattern("last_action_equals(current_action) >= 2"),
        ("*",), "high",
        "If the same click has fired twice with no page change, stop and re-plan.")
    return SkillLibrary.from_skills(rules=[rule])


def prefix_hash(library):
    return hashlib.sha256(repr(library.prefix_signature()).encode()).hexdigest()


class _BudgetExhausted(Exception):
    pass


class _RepeatLoop(Exception):
    pass


@dataclass
class CacheState:
    last_hash: str | None = None


@dataclass
class TaskOutcome:
    rows: list
    segments: list
    status: str
    view: TaskTrajectoryView = None
    events: list = field(default_factory=list)


class _TaskRun:
    def __init__(self, config, task, library, cache, oracle, run_id):
        self.cfg = config
        self.task = task
        self.lib = library
        self.cache = cache
        self.oracle = oracle
        self.run_id = run_id
        self.rows = []
        self.n_steps = 0
        self.n_actions = 0
        self.window = []
        self.last_action_row = -1
        self.templates = config.templates()
        self.hash = prefix_hash(library)
        n_skills = len(library.rules) + len(library.routines)
        cm = config.cache_model
        self.stable = cm.stable_prefix_tokens + cm.per_skill_tokens * n_skills
        tm = config.token_model
        volatile = cm.volatile_tokens_per_call
        if tm.compress:
            volatile = int(round(volatile * tm.beta_vis))
        self.volatile = volatile
        self.url = f"/{task.domain}/"

    # -- row emission ------------------------------------------------------

    def _emit(self, event_type, **kw):
        if self.n_steps >= self.cfg.max_steps_per_task:
            raise _BudgetExhausted
        self.n_steps += 1
        self.rows.append(LedgerEvent(
            self.run_id, self.task.task_id, self.task.domain, self.cfg.method,
            len(self.rows), event_type, wall_time_ms=self.cfg.timing_ms[event_type], **kw))

    def _llm(self, role, **kw):
        cached = 0
        if self.cache.last_hash == self.hash:
            cached = self.stable
        self.cache.last_hash = self.hash
        tm = self.cfg.token_model
        completion = {"planner": tm.q_plan, "reflector": tm.q_reflect, "actor": tm.q_act}[role]
        model = getattr(self.cfg.models, role)
        self._emit(role, model=model, prompt_tokens=self.stable + self.volatile,
                   cached_prompt_tokens=cached, completion_tokens=int(completion), **kw)

    def _after_action(self, errored):
        self.n_actions += 1
        if should_reflect(self.n_actions, errored, self.cfg.k_R):
            self._llm("reflector", reflector_fired=True)

    def _action(self, name, target, text="", state=None, errored=False):
        self._emit("action", action_name=name, action_target=target)
        self.last_action_row = len(self.rows) - 1
        sig = normalize_action_signature(name, target, text)
        self.window.append(ActionRecord(sig, state if state is not None else str(len(self.rows))))
        self._after_action(errored)

    # -- subgoal execution ---------------------------------------------------

    def _actor_path(self, tmpl, sub):
        actions = tmpl.actions
        for attempt in range(self.cfg.actor_attempts):
            ok = self.oracle.actor_pass(tmpl, sub, attempt)
            for j, (name, target, text) in enumerate(actions):
                self._llm("actor")
                last = j == len(actions) - 1
                self._action(name, target, text, errored=last and not ok)
            if ok:
                return True
        return False

    def _loop_path(self, tmpl, sub):
        name, target, text = tmpl.actions[0]
        state = f"stuck:{self.task.task_id}:{len(self.rows)}"
        while True:
            self._llm("actor")
            self._action(name, target, text, state=state)
            if self.cfg.rules_enabled:
                fired = match_rules(self.lib, self.window, MonitorReport(url=self.url))
                if fired:
                    # the rule vetoes a further identical click and sends us back to the Planner
                    self._llm("planner", skill_id=fired[0])
                    ok = self.oracle.actor_pass(tmpl, sub, 0)
                    self._llm("actor")
                    self._action("click", LOOP_ESCAPE_TARGET, errored=not ok)
                    return ok
            if repeat_loop_detected(((r.signature, r.state_hash) for r in self.window),
                                    REPEAT_LIMIT):
                raise _RepeatLoop

    def _subgoal(self, sub):
        tmpl = self.templates[sub.template]
        seg = dict(name=tmpl.name, phrases=tuple(tmpl.phrases), url=self.url,
                   domain=self.task.domain)
        match = retrieve(self.lib, sub.keywords, self.url, self.cfg.learning.prior)
        if match is not None:
            routine_ok = self.oracle.routine_pass(tmpl, sub)
            for _ in range(self.cfg.routine_step_cost):
                self._emit("routine", routine_id=match.skill_id)
            self.last_action_row = len(self.rows) - 1
            savings = self.cfg.routine_action_savings if tmpl.savings is None else tmpl.savings
            rest = tmpl.actions[min(savings, len(tmpl.actions)):]
            self._after_action(not routine_ok and not rest)
            for j, (name, target, text) in enumerate(rest):
                self._action(name, target, text, errored=(j == len(rest) - 1) and not routine_ok)
            seg.update(routine_id=match.skill_id, routine_passed=routine_ok)
            if routine_ok:
                return seg, True
        if tmpl.loopy:
            ok = self._loop_path(tmpl, sub)
            seg.update(actions=())
        else:
            ok = self._actor_path(tmpl, sub)
            seg.update(actions=tmpl.actions if tmpl.coverable else ())
        return seg, ok

    def run(self):
        segments, spans = [], []
        status = SUCCESS
        try:
            self._llm("planner")
            for sub in self.task.subgoals:
                start = len(self.rows)
                seg, ok = self._subgoal(sub)
                seg["passed"] = ok
                segments.append(seg)
                spans.append((start, self.last_action_row))
                if not ok:
                    status = FAIL
                    break
        except _BudgetExhausted:
            status = FAIL
        except _RepeatLoop:
            status = REPEAT_ACTION
        if status == SUCCESS and not self.task.feasible:
            status = INFEASIBLE
        reflect_rows = [i for i, r in enumerate(self.rows) if r.event_type == "reflector"]
        out = []
        for k, seg in enumerate(segments):
            last_action = spans[k][1]
            nxt = spans[k + 1][0] if k + 1 < len(spans) else len(self.rows)
            verified = any(last_action < i < nxt for i in reflect_rows)
            if k == len(segments) - 1 and status == SUCCESS:
                verified = True
            out.append(SubgoalSegment(verified=verified, **seg))
        self.rows.append(LedgerEvent(
            self.run_id, self.task.task_id, self.task.domain, self.cfg.method, len(self.rows),
            "eval", evaluator_status=status, wall_time_ms=self.cfg.timing_ms["eval"]))
        view = TaskTrajectoryView(self.run_id, self.task.task_id, tuple(self.rows[:-1]),
                                  self.rows[-1], tuple(out))
        return TaskOutcome(self.rows, out, status, view)


def run_task(config, task, library, cache, oracle, run_id=None):
    return _TaskRun(config, task, library, cache, oracle, run_id or config.run_id).run()


@dataclass
class SimResult:
    rows: list
    library: SkillLibrary
    events: list            # per task: list of LibraryEvent
    tasks: list

    @property
    def all_events(self):
        return [e for evs in self.events for e in evs]


def new_cache(config, library):
    return CacheState(None if config.cache_model.cold_start else prefix_hash(library))


def run_stream(config, seed_library=None, tasks=None, oracle=None, on_task=None):
    """Run every task in order, updating the library after each one.

    Returns a ``SimResult`` with all ledger rows, the final library and the
    library events of each task.  Same config and seed library give the same
    rows byte for byte.
    """
    library = default_seed_library() if seed_library is None else seed_library
    tasks = generate_stream(config) if tasks is None else list(tasks)
    oracle = oracle or RandomOracle(config.seed)
    cache = new_cache(config, library)
    rows, per_task = [], []
    for task in tasks:
        outcome = run_task(config, task, library, cache, oracle)
        rows.extend(outcome.rows)
        events = []
        if config.learning_enabled:
            library, events = library_update(library, outcome.view, config.learning,
                                             config.demotion_date)
        per_task.append(events)
        if on_task is not None:
            on_task(task, outcome, library, events)
    return SimResult(rows, library, per_task, tasks)
