"""Extrinsic and intrinsic trajectory metrics computed from ledger task views.

All functions take a sequence of ``TaskTrajectoryView`` (or raw ledger rows,
which are grouped first) and are pure: re-reading the same ledger gives
bit-identical numbers.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from ..errors import BadPartition, DegenerateCohort, EmptyInput, NoLLMCalls, ZeroTokens
from ..ledger import INFEASIBLE, LLM_EVENT_TYPES, REPEAT_ACTION, LedgerEvent, read_tasks

REPEAT_LIMIT = 5


def as_tasks(tasks):
    tasks = list(tasks)
    if tasks and isinstance(tasks[0], LedgerEvent):
        return read_tasks(tasks)
    return tasks


def _nonempty(tasks):
    tasks = as_tasks(tasks)
    if not tasks:
        raise EmptyInput("metric needs at least one task")
    return tasks


def success_rate(tasks):
    tasks = _nonempty(tasks)
    return 100.0 * sum(t.succeeded for t in tasks) / len(tasks)


def mean_steps(tasks):
    """Mean count of non-evaluator rows; routine invocations count as one step."""
    tasks = _nonempty(tasks)
    return sum(t.step_count for t in tasks) / len(tasks)


def mean_tokens(tasks):
    """Mean prompt + completion + reasoning tokens per task, in thousands."""
    tasks = _nonempty(tasks)
    return sum(t.total_tokens for t in tasks) / len(tasks) / 1000.0


def mean_time(tasks):
    tasks = _nonempty(tasks)
    return sum(t.wall_time_ms for t in tasks) / len(tasks) / 1000.0


def arr(tasks):
    """Share of tasks the evaluator ended with the repeat-action marker."""
    tasks = _nonempty(tasks)
    return 100.0 * sum(t.status == REPEAT_ACTION for t in tasks) / len(tasks)


def repeat_loop_detected(records, limit=REPEAT_LIMIT):
    """True once ``limit`` consecutive actions share a signature and state hash.

    ``records`` yields ``(signature, state_hash)`` pairs in execution order.
    """
    run, prev = 0, None
    for sig, state in records:
        key = (sig, state)
        run = run + 1 if key == prev else 1
        prev = key
        if run >= limit:
            return True
    return False


def sor(tasks):
    """Mean failed-task steps over mean successful-task steps, infeasible excluded."""
    tasks = as_tasks(tasks)
    ok = [t.step_count for t in tasks if t.succeeded]
    bad = [t.step_count for t in tasks if not t.succeeded and t.status != INFEASIBLE]
    if not ok or not bad:
        raise DegenerateCohort(f"SOR needs both cohorts: {len(ok)} successes, {len(bad)} failures")
    mean_ok = sum(ok) / len(ok)
    if mean_ok == 0:
        raise DegenerateCohort("successful tasks have zero mean steps")
    return (sum(bad) / len(bad)) / mean_ok


def _llm_rows(tasks):
    for t in tasks:
        for e in t.events:
            if e.event_type in LLM_EVENT_TYPES:
                yield e


def cache_sums(tasks):
    cached = prompt = 0
    for e in _llm_rows(as_tasks(tasks)):
        cached += e.cached_prompt_tokens
        prompt += e.prompt_tokens
    return cached, prompt


def cache_utilization(tasks):
    """Cached prompt tokens over prompt tokens, over planner/actor/reflector calls."""
    tasks = as_tasks(tasks)
    if not any(True for _ in _llm_rows(tasks)):
        raise NoLLMCalls("no planner, actor or reflector rows")
    cached, prompt = cache_sums(tasks)
    return cached / prompt if prompt else 0.0


def skill_hit_rate(tasks):
    """Share of tasks with at least one rule or routine firing."""
    tasks = _nonempty(tasks)
    return 100.0 * sum(bool(t.fired_skill_ids) for t in tasks) / len(tasks)


def token_efficiency(sr, tokens_k):
    if tokens_k <= 0:
        raise ZeroTokens(f"tokens_k must be positive, got {tokens_k}")
    return sr / tokens_k


JSON_KEYS = ("sr", "steps", "tokens_k", "time_s", "arr", "sor", "cache_u", "skill_hit", "n_tasks")


@dataclass(frozen=True)
class MetricReport:
    sr: float
    mean_steps: float
    mean_tokens_k: float
    mean_time_s: float
    arr: float
    sor: float | None
    cache_utilization: float | None
    skill_hit: float
    n_tasks: int

    def to_dict(self):
        return dict(zip(JSON_KEYS, (self.sr, self.mean_steps, self.mean_tokens_k,
                                    self.mean_time_s, self.arr, self.sor,
                                    self.cache_utilization, self.skill_hit, self.n_tasks)))

    @classmethod
    def from_dict(cls, d):
        return cls(*(d[k] for k in JSON_KEYS))

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=False)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def display_row(self):
        """Percentages to one decimal, ratios to two."""
        return {
            "SR (%)": f"{self.sr:.1f}",
            "Steps": f"{self.mean_steps:.1f}",
            "Tokens (K)": f"{self.mean_tokens_k:.1f}",
            "Time (s)": f"{self.mean_time_s:.1f}",
            "ARR (%)": f"{self.arr:.1f}",
            "SOR": "-" if self.sor is None else f"{self.sor:.2f}",
            "Cache (%)": "-" if self.cache_utilization is None
                         else f"{100 * self.cache_utilization:.1f}",
            "Skill hit (%)": f"{self.skill_hit:.1f}",
            "#Tasks": str(self.n_tasks),
        }


def metric_report(tasks):
    tasks = _nonempty(tasks)
    try:
        ratio = sor(tasks)
    except DegenerateCohort:
        ratio = None
    try:
        u = cache_utilization(tasks)
    except NoLLMCalls:
        u = None
    return MetricReport(success_rate(tasks), mean_steps(tasks), mean_tokens(tasks),
                        mean_time(tasks), arr(tasks), ratio, u, skill_hit_rate(tasks),
                        len(tasks))


def split_blocks(tasks, boundaries):
    """Cut the stream at cumulative end positions, e.g. (100, 300, 600, 910)."""
    tasks = as_tasks(tasks)
    ends = [int(b) for b in boundaries]
    if not ends or ends[-1] != len(tasks) or any(b <= a for a, b in zip([0] + ends, ends)):
        raise BadPartition(f"boundaries {list(boundaries)} do not partition 1..{len(tasks)}")
    blocks, start = [], 0
    for end in ends:
        blocks.append(tasks[start:end])
        start = end
    return blocks


def block_stats(tasks, boundaries):
    return [metric_report(b) for b in split_blocks(tasks, boundaries)]


_WEIGHTED = ("sr", "mean_steps", "mean_tokens_k", "mean_time_s", "arr", "skill_hit")


def recombine(reports):
    """Size-weighted means of the per-task-average fields across blocks."""
    n = sum(r.n_tasks for r in reports)
    if n == 0:
        raise EmptyInput("no tasks to recombine")
    return {f: sum(getattr(r, f) * r.n_tasks for r in reports) / n for f in _WEIGHTED}


def report_dict(report):
    return asdict(report)
