"""Synthetic task streams and the Reflector cadence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..skills.keywords import normalize_keywords


def should_reflect(i, last_action_errored, k_R=3):
    """Fire on every k_R-th action, and right after an action that errored."""
    if i < 1:
        raise ValueError(f"action index must be >= 1, got {i}")
    return i % k_R == 0 or bool(last_action_errored)


@dataclass(frozen=True)
class SubgoalSpec:
    template: str
    keywords: frozenset
    success_prob: float
    obj: str = ""
    routine_outcome: bool | None = None     # scripted replays only
    actor_outcome: bool | None = None


@dataclass(frozen=True)
class SyntheticTask:
    task_id: str
    domain: str
    subgoals: tuple
    feasible: bool = True

    def __post_init__(self):
        if not self.subgoals:
            raise ValueError(f"task {self.task_id} has no subgoals")


def domain_quotas(weights, n):
    """Largest-remainder apportionment of ``n`` tasks to the given weights."""
    w = np.asarray(weights, dtype=float)
    shares = n * w / w.sum()
    counts = np.floor(shares).astype(int)
    order = sorted(range(len(w)), key=lambda i: (-(shares[i] - counts[i]), i))
    for i in order[:n - int(counts.sum())]:
        counts[i] += 1
    return [int(c) for c in counts]


def generate_stream(config):
    """Deterministic task list: per-domain quotas shuffled once, then subgoals drawn
    from the templates live at each task's position."""
    n = config.n_tasks
    if n == 0:
        return []
    rng = np.random.default_rng([config.seed, 0])
    domains = config.domains
    quotas = domain_quotas([d.weight for d in domains], n)
    order = np.concatenate([np.full(q, i, dtype=int) for i, q in enumerate(quotas)])
    order = order[rng.permutation(n)]
    templates = config.templates()
    lo, hi = config.subgoals_per_task
    tasks = []
    for pos, di in enumerate(order, start=1):
        dom = domains[int(di)]
        live = [templates[t.name] for t in dom.templates if templates[t.name].start_task <= pos]
        k = int(rng.integers(lo, hi + 1))
        k = min(k, len(live))
        w = np.array([t.weight for t in live], dtype=float)
        picks = rng.choice(len(live), size=k, replace=False, p=w / w.sum())
        subgoals = []
        for j in sorted(int(p) for p in picks):
            t = live[j]
            obj = str(dom.objects[int(rng.integers(len(dom.objects)))]) if dom.objects else ""
            kws = t.keywords | normalize_keywords(obj)
            subgoals.append(SubgoalSpec(t.name, kws, t.actor_success, obj))
        feasible = bool(rng.random() >= config.infeasible_rate)
        tasks.append(SyntheticTask(str(pos), dom.name, tuple(subgoals), feasible))
    return tasks
