"""Replay of a scripted task list with forced outcomes.

A scenario file names its own templates, an optional seed library and a task
list; each subgoal may force the routine verdict and the Actor verdict.  The
run goes through the same agent loop and library update as a random stream.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, replace
from datetime import date
from importlib.resources import files

import yaml

from ..errors import ConfigInvalid
from ..skills.types import ConfidenceStats, RoutineSkill, SkillLibrary
from .agent import default_seed_library, run_stream
from .config import Domain, default_config, template_from_dict
from .stream import SubgoalSpec, SyntheticTask


class ScriptedOracle:
    """Forced verdicts from the subgoal spec; unscripted draws default to a pass."""

    def routine_pass(self, template, subgoal):
        return True if subgoal.routine_outcome is None else subgoal.routine_outcome

    def actor_pass(self, template, subgoal, attempt):
        return True if subgoal.actor_outcome is None else subgoal.actor_outcome


@dataclass(frozen=True)
class Scenario:
    name: str
    config: object
    seed_library: SkillLibrary
    tasks: tuple


def _outcome(value, where):
    if value is None:
        return None
    if value in ("pass", True):
        return True
    if value in ("fail", False):
        return False
    raise ConfigInvalid(f"{where}: outcome must be pass or fail, got {value!r}")


def _seed_routine(d):
    stats = d.get("confidence", (0, 0))
    return RoutineSkill(id=d["id"], trigger_phrases=tuple(d["phrases"]),
                        url_glob=d.get("url_glob", "*"),
                        confidence=ConfidenceStats(int(stats[0]), int(stats[1])),
                        body=d.get("body", "").rstrip("\n"))


def scenario_from_dict(raw, base=None):
    raw = dict(raw)
    base = base or default_config()
    by_domain = defaultdict(list)
    for t in raw.get("templates", ()):
        if "domain" not in t:
            raise ConfigInvalid(f"scenario template {t.get('name')!r} needs a domain")
        tmpl = template_from_dict(t, t["domain"])
        by_domain[tmpl.domain].append(tmpl)
    domains = tuple(Domain(name, 1.0, tuple(ts)) for name, ts in by_domain.items())
    templates = {t.name: t for ts in by_domain.values() for t in ts}
    tasks = []
    for t in raw.get("tasks", ()):
        subs = []
        for s in t["subgoals"]:
            name = s["template"]
            if name not in templates:
                raise ConfigInvalid(f"task {t['id']}: unknown template {name!r}")
            tmpl = templates[name]
            where = f"task {t['id']} / {name}"
            kws = tmpl.keywords | frozenset(str(o).lower() for o in s.get("objects", ()))
            subs.append(SubgoalSpec(name, kws, tmpl.actor_success, " ".join(s.get("objects", ())),
                                    _outcome(s.get("routine"), where),
                                    _outcome(s.get("actor"), where)))
        tasks.append(SyntheticTask(str(t["id"]), t["domain"], tuple(subs)))
    lib = default_seed_library()
    for r in (raw.get("seed_library") or {}).get("routines", ()):
        lib = lib.with_routine(_seed_routine(r))
    dd = raw.get("demotion_date", base.demotion_date)
    if not isinstance(dd, date):
        dd = date.fromisoformat(str(dd))
    config = replace(base, domains=domains, n_tasks=len(tasks), brittle_injections=(),
                     infeasible_rate=0.0, demotion_date=dd,
                     run_id=raw.get("run_id", base.run_id))
    return Scenario(raw.get("name", "scenario"), config, lib, tuple(tasks))


def load_scenario(path, base=None):
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(yaml.safe_load(fh), base)


def default_scenario_path():
    return files("skillforge") / "data" / "lifecycle_scenario.yaml"


def run_scenario(scenario, on_task=None):
    return run_stream(scenario.config, scenario.seed_library, scenario.tasks, ScriptedOracle(),
                      on_task=on_task)

