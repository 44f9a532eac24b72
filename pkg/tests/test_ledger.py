import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skillforge.errors import (DuplicateTerminal, InvariantViolation, MissingTerminal,
                               NonMonotoneStep, RowAfterTerminal, SchemaMismatch)
from skillforge.ledger import (FIELDS, LedgerEvent, LedgerWriter, append_event, dumps,
                               normalize_action_signature, parse_ledger, read_ledger,
                               read_tasks, write_ledger)

HEADER = ("run_id,task_id,domain,method,step_idx,event_type,model,prompt_tokens,"
          "cached_prompt_tokens,completion_tokens,reasoning_tokens,action_name,action_target,"
          "routine_id,skill_id,reflector_fired,evaluator_status,wall_time_ms")


def row(task="1", step=0, kind="actor", run="r", **kw):
    if kind == "eval":
        kw.setdefault("evaluator_status", "success")
    return LedgerEvent(run, task, "shopping", "skill_agent", step, kind, **kw)


def task_rows(task, n_steps, run="r", status="success"):
    rows = [row(task, i, "action", run, action_name="click", action_target=f"e{i}")
            for i in range(n_steps)]
    return rows + [row(task, n_steps, "eval", run, evaluator_status=status)]


# ------------------------------------------------------------ rows

def test_header_matches_schema():
    assert ",".join(FIELDS) == HEADER
    assert dumps([]).strip() == HEADER


def test_append_event_grows_by_one_row(tmp_path):
    path = tmp_path / "l.csv"
    write_ledger(path, [])
    with LedgerWriter(path) as w:
        w.append(row(prompt_tokens=100, cached_prompt_tokens=40, model="gpt"))
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert read_ledger(path)[0].cached_prompt_tokens == 40


def test_cached_above_prompt_rejected():
    with pytest.raises(InvariantViolation):
        row(prompt_tokens=100, cached_prompt_tokens=120)


@pytest.mark.parametrize("kw", [
    {"kind": "eval", "evaluator_status": ""},
    {"kind": "actor", "evaluator_status": "success"},
    {"kind": "eval", "evaluator_status": "partial"},
    {"kind": "browse"},
    {"step": -1},
    {"prompt_tokens": True},
])
def test_row_invariants(kw):
    with pytest.raises(InvariantViolation):
        row(**kw)


def test_append_event_type_check():
    with pytest.raises(InvariantViolation):
        append_event(io.StringIO(), {"run_id": "r"})


def test_booleans_and_empty_fields():
    text = dumps([row(kind="reflector", reflector_fired=True)])
    line = text.splitlines()[1]
    assert ",true," in line
    assert line.split(",")[11] == ""


def test_thousand_rows_round_trip(tmp_path):
    rng = random.Random(5)
    rows = []
    for t in range(100):
        for s in range(9):
            p = rng.randint(0, 5000)
            rows.append(row(str(t), s, rng.choice(["planner", "actor", "action", "routine"]),
                            prompt_tokens=p, cached_prompt_tokens=rng.randint(0, p),
                            action_target='sel "quoted", with comma', wall_time_ms=s))
        rows.append(row(str(t), 9, "eval", evaluator_status="fail:repeat_action"))
    path = tmp_path / "l.csv"
    write_ledger(path, rows)
    assert read_ledger(path) == rows
    assert len(rows) == 1000


def test_writer_appends_preserve_prefix(tmp_path):
    path = tmp_path / "l.csv"
    with LedgerWriter(path) as w:
        w.extend(task_rows("1", 2))
    before = path.read_bytes()
    with LedgerWriter(path) as w:
        w.extend(task_rows("2", 3))
    after = path.read_bytes()
    assert after.startswith(before)
    assert len(read_tasks(read_ledger(path))) == 2


def test_writer_rejects_foreign_header(tmp_path):
    path = tmp_path / "l.csv"
    path.write_text("a,b,c\n")
    with pytest.raises(SchemaMismatch):
        LedgerWriter(path).open()


def test_bad_header_and_extra_fields():
    with pytest.raises(SchemaMismatch):
        parse_ledger("run_id,task_id\nr,1\n")
    with pytest.raises(SchemaMismatch):
        parse_ledger(HEADER + "\n" + ",".join(["x"] * 19) + "\n")


def test_non_integer_count_rejected():
    fields = dumps([row()]).splitlines()[1].split(",")
    fields[7] = "lots"
    with pytest.raises(InvariantViolation):
        parse_ledger(HEADER + "\n" + ",".join(fields) + "\n")


# ------------------------------------------------------------ tasks

def test_read_tasks_two_tasks():
    views = read_tasks(task_rows("1", 2) + task_rows("2", 2))
    assert [v.task_id for v in views] == ["1", "2"]
    assert [v.step_count for v in views] == [2, 2]
    assert views[0].succeeded


def test_duplicate_terminal():
    rows = task_rows("1", 1) + [row("1", 5, "eval")]
    with pytest.raises(DuplicateTerminal):
        read_tasks(rows)


def test_missing_terminal():
    with pytest.raises(MissingTerminal):
        read_tasks(task_rows("1", 2)[:-1])


def test_row_after_terminal():
    with pytest.raises(RowAfterTerminal):
        read_tasks(task_rows("1", 1) + [row("1", 7, "action")])


def test_shuffled_rows_name_the_task():
    rows = task_rows("1", 3) + [task_rows("2", 3)[i] for i in (1, 0, 2, 3)]
    with pytest.raises(NonMonotoneStep) as exc:
        read_tasks(rows)
    assert exc.value.task_id == "2"


def test_view_derived_fields():
    rows = [row("1", 0, "planner", prompt_tokens=1000, cached_prompt_tokens=600,
                completion_tokens=200, reasoning_tokens=300, wall_time_ms=2000),
            row("1", 1, "routine", routine_id="sort_by_price", wall_time_ms=500),
            row("1", 2, "action", skill_id="repeat_click_same_element"),
            row("1", 3, "eval", evaluator_status="infeasible")]
    v = read_tasks(rows)[0]
    assert v.step_count == 3
    assert v.total_tokens == 1500
    assert v.cached_prompt_tokens == 600
    assert v.wall_time_ms == 2500
    assert v.fired_skill_ids == {"sort_by_price", "repeat_click_same_element"}
    assert v.status == "infeasible" and not v.succeeded


def test_same_task_id_in_two_runs_is_two_tasks():
    views = read_tasks(task_rows("1", 1, run="a") + task_rows("1", 1, run="b"))
    assert [(v.run_id, v.task_id) for v in views] == [("a", "1"), ("b", "1")]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=8), st.randoms())
def test_grouping_stable_under_interleaving(sizes, rnd):
    tasks = [task_rows(str(i), n) for i, n in enumerate(sizes)]
    flat = [r for t in tasks for r in t]
    # merge the per-task queues in a random order, keeping each task's order
    queues = [list(t) for t in tasks]
    mixed = []
    while any(queues):
        q = rnd.choice([q for q in queues if q])
        mixed.append(q.pop(0))
    a = {(v.run_id, v.task_id): v for v in read_tasks(flat)}
    b = {(v.run_id, v.task_id): v for v in read_tasks(mixed)}
    assert a == b


# ------------------------------------------------------------ signatures

def test_action_signatures():
    assert normalize_action_signature("click", "7") == "click#7"
    assert normalize_action_signature("type", "q", "guitar") == "type#guitar"
    assert normalize_action_signature("press", "box", "Enter") == "press#Enter"
    assert normalize_action_signature("scroll", "page") == "scroll#page"
    assert normalize_action_signature("click", "7") == normalize_action_signature("click", "7")
