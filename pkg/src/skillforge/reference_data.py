"""Published reference numbers and a synthetic ledger that encodes them.

The block table describes a 910-task stream cut at (100, 300, 600, 910): per
block, the success rate, mean steps, mean tokens (K), cache utilization and
skill-hit rate.  ``stream_fixture`` turns it into ledger rows whose per-block
metrics land on those figures as closely as integer task counts allow.
"""

from __future__ import annotations

from typing import NamedTuple

from .ledger import FAIL, REPEAT_ACTION, SUCCESS, LedgerEvent


class BlockRow(NamedTuple):
    n_tasks: int
    sr: float
    steps: float
    tokens_k: float
    cache_pct: float
    skill_hit: float


STREAM_BLOCKS = (
    BlockRow(100, 50.5, 10.6, 143, 62.0, 18.2),
    BlockRow(200, 56.8, 9.6, 124, 70.5, 33.6),
    BlockRow(300, 59.2, 9.1, 112, 73.5, 47.1),
    BlockRow(310, 61.0, 8.9, 103, 76.0, 58.4),
)
STREAM_BOUNDARIES = (100, 300, 600, 910)

# whole-run headline for the learning agent
HEADLINE = {"sr": 58.3, "steps": 9.3, "tokens_k": 115, "time_s": 240.0, "arr": 9.1,
            "sor": 1.8, "cache_pct": 72.4}

# token efficiency: (SR %, tokens K, stated pp/Ktok)
EFFICIENCY = {
    "skill_agent": (58.3, 115, 0.507),
    "sgv": (54.0, 275, 0.196),
    "walt": (45.2, 294, 0.154),
}

# offline-discovery amortization: headline $/task, one-time $, stated figures
AMORTIZATION = {"headline": 0.593, "one_time": 43.7,
                "stated": {910: 0.641, 100: 1.03, 30: 2.05}, "stated_ratio_30": 3.6}
WALT_COST_TABLE = 0.592  # the per-method cost table rounds the same headline differently

# per-million-token prices; input derived from cached price and provider multiplier
PRICES = {
    "claude-opus-4-6": {"cached": 0.38, "input": 3.80, "output": 15.0},
    "gpt-5.2-2026-01": {"cached": 0.25, "input": 0.50, "output": 6.0},
    "claude-sonnet-4-5": {"cached": 0.30, "input": 3.00, "output": 15.0},
    "gpt-4o-mini-2025-04-01": {"cached": 0.075, "input": 0.15, "output": 0.60},
}

SOR_TARGET = 1.8
ARR_MARKED = 83          # 83 / 910 = 9.12 %
TASK_TIME_MS = 240_000


def _spread(total, n):
    """``n`` nonnegative integers summing to ``total``, as even as possible."""
    if n == 0:
        return []
    base, extra = divmod(total, n)
    return [base + (1 if i < extra else 0) for i in range(n)]


def _round_half_even(x):
    return int(round(x))


def block_counts(blocks=STREAM_BLOCKS, arr_marked=ARR_MARKED):
    """Integer per-block (successes, step total, skill hits, repeat markers)."""
    out = []
    fails = []
    for b in blocks:
        k = _round_half_even(b.sr * b.n_tasks / 100)
        out.append([k, _round_half_even(b.steps * b.n_tasks),
                    _round_half_even(b.skill_hit * b.n_tasks / 100), 0])
        fails.append(b.n_tasks - k)
    # repeat markers spread across blocks in proportion to failures
    total_fail = sum(fails)
    shares = [arr_marked * f / total_fail for f in fails]
    marks = [int(s) for s in shares]
    order = sorted(range(len(shares)), key=lambda i: (marks[i] - shares[i], i))
    for i in order[:arr_marked - sum(marks)]:
        marks[i] += 1
    for row, m in zip(out, marks):
        row[3] = m
    return [tuple(r) for r in out]


def stream_fixture(run_id="fixture", blocks=STREAM_BLOCKS, model="claude-opus-4-6",
                   sor_target=SOR_TARGET, task_time_ms=TASK_TIME_MS):
    """Ledger rows for a synthetic stream matching the block table.

    Each task has one planner row carrying all of its prompt tokens (tokens per
    task are constant inside a block, so block token means and block cache
    ratios are exact), followed by action rows; skill-hit tasks replace one
    action with a routine row.
    """
    rows = []
    task_no = 0
    for b, (k, steps_total, hits, marks) in zip(blocks, block_counts(blocks)):
        n = b.n_tasks
        f = n - k
        succ_steps = _round_half_even(steps_total * k / (k + sor_target * f)) if f else steps_total
        steps = _spread(succ_steps, k) + _spread(steps_total - succ_steps, f)
        prompt = int(b.tokens_k * 1000)
        cached = _round_half_even(prompt * b.cache_pct / 100)
        for i in range(n):
            task_no += 1
            tid = str(task_no)
            ok = i < k
            status = SUCCESS if ok else (REPEAT_ACTION if i - k < marks else FAIL)
            t = steps[i]
            rows.append(LedgerEvent(run_id, tid, "classifieds", "skill_agent", 0, "planner",
                                    model=model, prompt_tokens=prompt,
                                    cached_prompt_tokens=cached, wall_time_ms=task_time_ms))
            for s in range(1, t):
                if s == 1 and i < hits:
                    rows.append(LedgerEvent(run_id, tid, "classifieds", "skill_agent", s,
                                            "routine", routine_id="fixture_routine"))
                else:
                    rows.append(LedgerEvent(run_id, tid, "classifieds", "skill_agent", s,
                                            "action", action_name="click",
                                            action_target=f"el{s}"))
            rows.append(LedgerEvent(run_id, tid, "classifieds", "skill_agent", t, "eval",
                                    evaluator_status=status))
    return rows
