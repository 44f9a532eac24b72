import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binomtest

from skillforge.errors import (BadPartition, DegenerateCohort, EmptyInput, LengthMismatch,
                               NoLLMCalls, ZeroTokens)
from skillforge.ledger import LedgerEvent, read_ledger, read_tasks, write_ledger
from skillforge.metrics import (MetricReport, arr, block_stats, cache_utilization,
                                discordant_counts, mcnemar, mcnemar_exact, mean_steps,
                                mean_time, mean_tokens, metric_report, paired_bootstrap,
                                recombine, repeat_loop_detected, skill_hit_rate, sor,
                                split_blocks, success_rate, token_efficiency)
from skillforge.reference_data import (EFFICIENCY, HEADLINE, STREAM_BLOCKS, STREAM_BOUNDARIES,
                                       stream_fixture)


def task(tid, status="success", steps=0, rows=None, run="r"):
    rows = list(rows or [])
    rows += [LedgerEvent(run, tid, "d", "m", i, "action", action_name="click",
                         action_target=str(i)) for i in range(len(rows), len(rows) + steps)]
    rows.append(LedgerEvent(run, tid, "d", "m", len(rows), "eval", evaluator_status=status))
    return rows


def views(*tasks):
    return read_tasks([r for t in tasks for r in t])


def llm(tid, step, kind="actor", prompt=0, cached=0, completion=0, reasoning=0, ms=0):
    return LedgerEvent("r", tid, "d", "m", step, kind, model="x", prompt_tokens=prompt,
                       cached_prompt_tokens=cached, completion_tokens=completion,
                       reasoning_tokens=reasoning, wall_time_ms=ms)


@pytest.fixture(scope="module")
def fixture_tasks():
    return read_tasks(stream_fixture())


# ------------------------------------------------------------ success rate

def test_success_rate_examples():
    assert success_rate(views(task("1"), task("2", "fail"))) == 50.0
    assert success_rate(views(task("1"), task("2"))) == 100.0
    with pytest.raises(EmptyInput):
        success_rate([])


def test_block_table_recombines_to_headline():
    n = sum(b.n_tasks for b in STREAM_BLOCKS)
    sr = sum(b.sr * b.n_tasks for b in STREAM_BLOCKS) / n
    steps = sum(b.steps * b.n_tasks for b in STREAM_BLOCKS) / n
    tokens = sum(b.tokens_k * b.n_tasks for b in STREAM_BLOCKS) / n
    assert sr == pytest.approx(HEADLINE["sr"], abs=0.05)
    assert steps == pytest.approx(8469 / 910)
    assert tokens == pytest.approx(104630 / 910)
    assert round(steps, 1) == HEADLINE["steps"] and round(tokens) == HEADLINE["tokens_k"]


def test_fixture_sr_cannot_hit_headline(fixture_tasks):
    # integer successes per block: the nearest counts straddle the +-0.05 window
    assert 100 * 530 / 910 < HEADLINE["sr"] - 0.05
    assert 100 * 531 / 910 > HEADLINE["sr"] + 0.05
    assert success_rate(fixture_tasks) == pytest.approx(100 * 531 / 910)


# ------------------------------------------------------------ steps, tokens, time

def test_mean_steps():
    assert mean_steps(views(task("1", steps=9), task("2", steps=11))) == 10.0
    rows = [LedgerEvent("r", "1", "d", "m", 0, "routine", routine_id="x")]
    assert mean_steps(views(task("1", rows=rows, steps=1))) == 2.0


def test_fixture_headline_means(fixture_tasks):
    assert mean_steps(fixture_tasks) == pytest.approx(HEADLINE["steps"], abs=0.05)
    assert mean_tokens(fixture_tasks) == pytest.approx(HEADLINE["tokens_k"], abs=0.5)
    assert mean_time(fixture_tasks) == pytest.approx(240.0)


def test_mean_tokens_excludes_cached():
    rows = [llm("1", 0, prompt=1000, cached=900, completion=200, reasoning=300, ms=1500)]
    v = views(task("1", rows=rows))
    assert mean_tokens(v) == pytest.approx(1.5)
    assert mean_time(v) == pytest.approx(1.5)


# ------------------------------------------------------------ ARR / SOR

def test_arr():
    ts = [task(str(i)) for i in range(9)] + [task("9", "fail:repeat_action")]
    assert arr(views(*ts)) == 10.0


def test_fixture_arr_and_sor(fixture_tasks):
    assert arr(fixture_tasks) == pytest.approx(HEADLINE["arr"], abs=0.05)
    assert sor(fixture_tasks) == pytest.approx(HEADLINE["sor"], abs=0.01)


def test_repeat_detector():
    same = [("click#7", "h")] * 5
    assert repeat_loop_detected(same)
    changed = [("click#7", "h")] * 2 + [("click#7", "h2")] + [("click#7", "h2")] * 2
    assert not repeat_loop_detected(changed)
    assert not repeat_loop_detected([("click#7", "h")] * 4)


def test_sor():
    v = views(task("1", "fail", steps=18), task("2", steps=9))
    assert sor(v) == 2.0
    v2 = views(task("1", "fail", steps=18), task("2", steps=9), task("3", "infeasible", steps=40))
    assert sor(v2) == 2.0
    with pytest.raises(DegenerateCohort):
        sor(views(task("1", steps=3)))


# ------------------------------------------------------------ cache, skill hit

def test_cache_utilization():
    rows = [llm("1", 0, prompt=100, cached=50), llm("1", 1, prompt=100, cached=30),
            LedgerEvent("r", "1", "d", "m", 2, "action", prompt_tokens=500,
                        cached_prompt_tokens=500)]
    assert cache_utilization(views(task("1", rows=rows))) == pytest.approx(0.40)
    with pytest.raises(NoLLMCalls):
        cache_utilization(views(task("1", steps=2)))


def test_fixture_cache(fixture_tasks):
    # the token-weighted ratio over the block table
    assert cache_utilization(fixture_tasks) == pytest.approx(0.720, abs=0.0005)
    # the headline 72.4 is the task-weighted mean of the block ratios instead
    n = sum(b.n_tasks for b in STREAM_BLOCKS)
    task_weighted = sum(b.cache_pct * b.n_tasks for b in STREAM_BLOCKS) / n
    assert task_weighted == pytest.approx(HEADLINE["cache_pct"], abs=0.05)


def test_skill_hit():
    routine = [LedgerEvent("r", "1", "d", "m", 0, "routine", routine_id="sort_by_price")]
    rule_only = [LedgerEvent("r", "4", "d", "m", 0, "action", skill_id="repeat_click")]
    ts = [task("1", rows=routine), task("2", steps=2), task("3", steps=1),
          task("4", rows=rule_only)]
    assert skill_hit_rate(views(*ts)) == 50.0


def test_fixture_last_block_skill_hit(fixture_tasks):
    last = block_stats(fixture_tasks, STREAM_BOUNDARIES)[-1]
    assert last.skill_hit == pytest.approx(STREAM_BLOCKS[-1].skill_hit, abs=0.05)


# ------------------------------------------------------------ blocks

def test_block_shapes(fixture_tasks):
    blocks = block_stats(fixture_tasks, STREAM_BOUNDARIES)
    assert [b.n_tasks for b in blocks] == [100, 200, 300, 310]
    for b, ref in zip(blocks, STREAM_BLOCKS):
        assert b.mean_steps == pytest.approx(ref.steps)
        assert b.mean_tokens_k == pytest.approx(ref.tokens_k)
        assert 100 * b.cache_utilization == pytest.approx(ref.cache_pct, abs=0.001)
        assert abs(b.sr - ref.sr) <= 100 / b.n_tasks / 2 + 1e-9


def test_single_block_is_whole_stream(fixture_tasks):
    whole = metric_report(fixture_tasks)
    assert block_stats(fixture_tasks, [910]) == [whole]


@pytest.mark.parametrize("bounds", [[], [100, 50, 910], [100, 900], [0, 910], [100, 911]])
def test_bad_partition(fixture_tasks, bounds):
    with pytest.raises(BadPartition):
        split_blocks(fixture_tasks, bounds)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["success", "fail", "infeasible"]),
                          st.integers(0, 12), st.integers(0, 9000)),
                min_size=2, max_size=40),
       st.data())
def test_recombination_identity(spec, data):
    ts = []
    for i, (status, steps, prompt) in enumerate(spec):
        rows = [llm(str(i), 0, "planner", prompt=prompt, cached=prompt // 3)]
        ts.append(task(str(i), status, steps=steps, rows=rows))
    tv = views(*ts)
    n = len(tv)
    cuts = sorted(data.draw(st.sets(st.integers(1, n - 1), max_size=4)))
    rec = recombine(block_stats(tv, cuts + [n]))
    whole = metric_report(tv)
    assert abs(rec["sr"] - whole.sr) < 1e-9
    assert abs(rec["mean_steps"] - whole.mean_steps) < 1e-9
    assert abs(rec["mean_tokens_k"] - whole.mean_tokens_k) < 1e-9


# ------------------------------------------------------------ efficiency

def test_token_efficiency():
    for sr, tokens, stated in EFFICIENCY.values():
        assert token_efficiency(sr, tokens) == pytest.approx(stated, abs=0.001)
    with pytest.raises(ZeroTokens):
        token_efficiency(50, 0)


# ------------------------------------------------------------ report I/O

def test_report_json_round_trip(fixture_tasks):
    r = metric_report(fixture_tasks)
    assert MetricReport.from_json(r.to_json()) == r
    assert set(r.to_dict()) == {"sr", "steps", "tokens_k", "time_s", "arr", "sor", "cache_u",
                                "skill_hit", "n_tasks"}
    row = r.display_row()
    assert row["SR (%)"] == "58.4" and row["SOR"] == "1.81"


def test_metrics_bit_identical_after_reread(tmp_path, fixture_tasks):
    path = tmp_path / "f.csv"
    write_ledger(path, stream_fixture())
    assert metric_report(read_tasks(read_ledger(path))) == metric_report(fixture_tasks)


# ------------------------------------------------------------ bootstrap

def test_bootstrap_identical_vectors():
    y = np.random.default_rng(1).integers(0, 2, 200)
    r = paired_bootstrap(y, y, 300, 7)
    assert r.diff_ci == (0.0, 0.0)
    assert r.diff == 0.0


def test_bootstrap_ones_vs_zeros():
    r = paired_bootstrap(np.ones(50), np.zeros(50), 100, 3)
    assert r.diff_ci == (100.0, 100.0)
    assert r.ci_a == (100.0, 100.0) and r.ci_b == (0.0, 0.0)


def test_bootstrap_length_mismatch():
    with pytest.raises(LengthMismatch):
        paired_bootstrap([1, 0], [1], 10, 1)
    with pytest.raises(ValueError):
        paired_bootstrap([1], [1], 10, 1, alpha=1.5)


def test_bootstrap_deterministic():
    rng = np.random.default_rng(4)
    a, b = rng.integers(0, 2, 300), rng.integers(0, 2, 300)
    assert paired_bootstrap(a, b, 200, 7) == paired_bootstrap(a, b, 200, 7)
    assert paired_bootstrap(a, b, 200, 7) != paired_bootstrap(a, b, 200, 8)


def test_bootstrap_matches_independent_resampler():
    rng = np.random.default_rng(9)
    a, b = rng.integers(0, 2, 120), rng.integers(0, 2, 120)
    r = paired_bootstrap(a, b, 400, 11, alpha=0.1)
    # oracle: draw the whole index matrix at once from the same generator stream
    gen = np.random.default_rng(11)
    idx = np.stack([gen.integers(0, 120, size=120) for _ in range(400)])
    diffs = 100 * (a[idx].mean(axis=1) - b[idx].mean(axis=1))
    assert r.diff_ci == pytest.approx(tuple(np.percentile(diffs, [5, 95])))
    assert r.diff == pytest.approx(diffs.mean())


def test_bootstrap_planted_gap_width():
    rng = np.random.default_rng(21)
    cells = rng.choice(4, size=910, p=[0.4865, 0.0965, 0.0535, 0.3635])
    a, b = np.isin(cells, (0, 1)).astype(int), np.isin(cells, (0, 2)).astype(int)
    r = paired_bootstrap(a, b, 1000, 7)
    assert 3.0 <= r.diff_ci[1] - r.diff_ci[0] <= 6.0
    assert r.diff_ci[0] < r.observed_a - r.observed_b < r.diff_ci[1]


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=20, max_size=200),
       st.integers(0, 2**32 - 1))
def test_bootstrap_point_inside_ci(pairs, seed):
    a, b = np.array(pairs).T
    r = paired_bootstrap(a, b, 200, seed)
    for point, (lo, hi) in ((r.sr_a, r.ci_a), (r.sr_b, r.ci_b), (r.diff, r.diff_ci)):
        assert lo - 1e-9 <= point <= hi + 1e-9


# ------------------------------------------------------------ McNemar

def test_mcnemar_examples():
    assert mcnemar_exact(0, 0) == 1.0
    assert mcnemar_exact(10, 0) == pytest.approx(2 * 0.5 ** 10)
    assert mcnemar_exact(7, 7) == 1.0


@given(st.integers(0, 300), st.integers(0, 300))
def test_mcnemar_matches_scipy(b, c):
    expected = 1.0 if b + c == 0 else binomtest(min(b, c), b + c, 0.5).pvalue
    assert mcnemar_exact(b, c) == pytest.approx(expected, rel=1e-9, abs=1e-300)


def test_mcnemar_on_vectors():
    a = [1, 1, 1, 0, 0, 1]
    b = [0, 0, 1, 0, 1, 1]
    assert discordant_counts(a, b) == (2, 1)
    assert mcnemar(a, b) == mcnemar_exact(2, 1)
    with pytest.raises(LengthMismatch):
        mcnemar([1], [1, 0])
