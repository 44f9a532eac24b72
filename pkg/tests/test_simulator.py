from collections import Counter

import pytest

from skillforge.errors import ConfigInvalid
from skillforge.learning import library_stats
from skillforge.ledger import dumps, read_ledger, read_tasks
from skillforge.metrics import arr, block_stats, mean_steps
from skillforge.simulator import (concat_ledgers, config_from_dict, default_config,
                                  default_scenario_path, default_seed_library, domain_quotas,
                                  generate_stream, load_config, load_scenario, run_scenario,
                                  run_shared, run_stream, should_reflect, worker_run_id)
from skillforge.skills import load_library, scan_library

CHECKOUT = {"name": "add_to_cart", "phrases": ["add to cart"], "actor_success": 1.0,
            "reliability": 1.0, "savings": 3,
            "actions": [["click", "product_card_title_link"],
                        ["click", "add_to_cart_primary_button"],
                        ["click", "cart_drawer_checkout_link"],
                        ["wait_for", "checkout_page_loaded_marker"]]}


def tiny(**kw):
    raw = {"seed": 3, "n_tasks": 40, "subgoals_per_task": [1, 1], "infeasible_rate": 0.0,
           "domains": [{"name": "shop", "templates": [CHECKOUT]}]}
    raw.update(kw)
    return config_from_dict(raw)


# ------------------------------------------------------------ cadence

def test_should_reflect():
    assert should_reflect(3, False, 3)
    assert not should_reflect(4, False, 3)
    assert should_reflect(4, True, 3)
    with pytest.raises(ValueError):
        should_reflect(0, False)


# ------------------------------------------------------------ streams

def test_stream_deterministic():
    c = default_config(n_tasks=120)
    assert generate_stream(c) == generate_stream(c)
    assert generate_stream(c) != generate_stream(c.with_(seed=c.seed + 1))


def test_stream_empty():
    assert generate_stream(default_config(n_tasks=0)) == []


def test_domain_proportions():
    c = default_config(n_tasks=300)
    counts = Counter(t.domain for t in generate_stream(c))
    assert sorted(counts.values()) == [100, 100, 100]
    weights = [d.weight for d in c.domains]
    for n in (300, 301, 997):
        q = domain_quotas(weights, n)
        assert sum(q) == n
        assert all(abs(x / n - 1 / 3) <= 0.02 for x in q)


def test_brittle_template_appears_only_from_start():
    tasks = generate_stream(default_config())
    first = min(int(t.task_id) for t in tasks
                if any(s.template == "contact_seller" for s in t.subgoals))
    assert first >= 100


# ------------------------------------------------------------ config

def test_config_needs_domains():
    with pytest.raises(ConfigInvalid):
        config_from_dict({"n_tasks": 10})


@pytest.mark.parametrize("raw", [
    {"max_steps_per_task": 0},
    {"bogus": 1},
    {"subgoals_per_task": [3, 1]},
    {"brittle_injections": [{"template": "nope"}]},
    {"infeasible_rate": 1.5},
    {"cache_model": {"stable": 1}},
])
def test_config_errors(raw):
    base = {"domains": [{"name": "shop", "templates": [CHECKOUT]}]}
    with pytest.raises(ConfigInvalid):
        config_from_dict({**base, **raw})


def test_load_config_bad_yaml(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("domains: [unclosed\n")
    with pytest.raises(ConfigInvalid):
        load_config(path)


# ------------------------------------------------------------ runs

def test_run_is_deterministic():
    c = default_config(n_tasks=80)
    a, b = run_stream(c), run_stream(c)
    assert dumps(a.rows) == dumps(b.rows)
    assert a.library == b.library


def test_step_budget():
    c = default_config(n_tasks=150, max_steps_per_task=12)
    for t in read_tasks(run_stream(c).rows):
        assert t.step_count <= 12


def test_steps_non_increasing_once_covered():
    result = run_stream(tiny(), seed_library=default_seed_library())
    steps = [t.step_count for t in read_tasks(result.rows)]
    served = [i for i, r in enumerate(read_tasks(result.rows)) if r.fired_skill_ids]
    assert served, "the routine was never induced"
    tail = steps[served[0]:]
    assert all(b <= a for a, b in zip(tail, tail[1:]))
    assert tail[0] < steps[0]


def test_frozen_library_constant_cache():
    c = default_config(n_tasks=400, learning_enabled=False)
    blocks = block_stats(read_tasks(run_stream(c).rows), [100, 200, 300, 400])
    us = {b.cache_utilization for b in blocks}
    assert len(us) == 1


def test_rows_carry_models_and_tokens():
    c = default_config(n_tasks=30)
    for r in run_stream(c).rows:
        if r.event_type in ("planner", "reflector"):
            assert r.model == c.models.planner and r.prompt_tokens > 0
        elif r.event_type == "actor":
            assert r.model == c.models.actor and r.prompt_tokens > 0
        else:
            assert r.prompt_tokens == 0
        assert r.cached_prompt_tokens <= r.prompt_tokens


def test_repeat_rule_suppresses_loops():
    c = default_config(n_tasks=100)
    assert arr(read_tasks(run_stream(c).rows)) == 0.0
    assert arr(read_tasks(run_stream(c.with_(rules_enabled=False)).rows)) > 0.0


def test_learning_lowers_steps():
    c = default_config(seed=1)
    tasks = read_tasks(run_stream(c).rows)
    q = len(tasks) // 4
    assert mean_steps(tasks[-q:]) < mean_steps(tasks[:q])


# ------------------------------------------------------------ scenario

def test_scenario_summary():
    scenario = load_scenario(default_scenario_path())
    result = run_scenario(scenario)
    stats = library_stats(result.all_events, scenario.seed_library, result.library)
    assert stats.as_row() == (1, 1, 1, 1, 1)
    assert [e.id for e in result.library.blacklist] == ["dropdown_via_keyboard_shortcut"]


# ------------------------------------------------------------ shared mode

def test_shared_mode_small(tmp_path):
    c = default_config(n_tasks=15)
    lib_dir = tmp_path / "lib"
    paths = run_shared(c, lib_dir, tmp_path / "out", workers=3,
                       seed_library=default_seed_library())
    assert [p.name for p in paths] == ["ledger_w00.csv", "ledger_w01.csv", "ledger_w02.csv"]
    library, problems = scan_library(lib_dir)
    assert problems == []
    assert load_library(lib_dir) == library
    combined = tmp_path / "all.csv"
    concat_ledgers(paths, combined)
    tasks = read_tasks(read_ledger(combined))
    assert len(tasks) == 45
    assert {t.run_id for t in tasks} == {worker_run_id(c.run_id, i) for i in range(3)}
    assert combined.read_text().count("run_id,task_id") == 1
