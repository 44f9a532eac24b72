"""Append-only trajectory ledger: row schema, CSV persistence and per-task views.

Every LLM call, browser action, routine invocation and terminal evaluator
verdict is one row.  The CSV header is fixed; rows are validated on
construction so an invalid row can never reach disk.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import (DuplicateTerminal, InvariantViolation, MissingTerminal, NonMonotoneStep,
                     RowAfterTerminal, SchemaMismatch)

FIELDS = (
    "run_id", "task_id", "domain", "method", "step_idx", "event_type",
    "model", "prompt_tokens", "cached_prompt_tokens", "completion_tokens",
    "reasoning_tokens", "action_name", "action_target", "routine_id",
    "skill_id", "reflector_fired", "evaluator_status", "wall_time_ms",
)
EVENT_TYPES = ("planner", "actor", "reflector", "action", "routine", "eval")
LLM_EVENT_TYPES = frozenset({"planner", "actor", "reflector"})

SUCCESS = "success"
FAIL = "fail"
REPEAT_ACTION = "fail:repeat_action"
INFEASIBLE = "infeasible"

_INT_FIELDS = ("step_idx", "prompt_tokens", "cached_prompt_tokens", "completion_tokens",
               "reasoning_tokens", "wall_time_ms")

CLICK_ACTIONS = frozenset({"click", "double_click", "right_click", "hover", "select_option",
                           "check", "tap"})
KEYBOARD_ACTIONS = frozenset({"type", "press", "key", "hotkey", "key_press", "fill"})


def status_ok(status):
    return status in (SUCCESS, FAIL, INFEASIBLE) or status.startswith("fail:")


@dataclass(frozen=True, slots=True)
class LedgerEvent:
    run_id: str
    task_id: str
    domain: str
    method: str
    step_idx: int
    event_type: str
    model: str = ""
    prompt_tokens: int = 0
    cached_prompt_tokens: int = 0
    completion_tokens: int = 0
    reasoning_tokens: int = 0
    action_name: str = ""
    action_target: str = ""
    routine_id: str = ""
    skill_id: str = ""
    reflector_fired: bool = False
    evaluator_status: str = ""
    wall_time_ms: int = 0

    def __post_init__(self):
        for name in _INT_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise InvariantViolation(f"{name} must be a nonnegative integer, got {value!r}",
                                         self.task_id)
        if self.event_type not in EVENT_TYPES:
            raise InvariantViolation(f"unknown event_type {self.event_type!r}", self.task_id)
        if self.cached_prompt_tokens > self.prompt_tokens:
            raise InvariantViolation(
                f"cached_prompt_tokens {self.cached_prompt_tokens} exceeds prompt_tokens "
                f"{self.prompt_tokens}", self.task_id)
        if self.event_type == "eval":
            if not self.evaluator_status:
                raise InvariantViolation("eval row without evaluator_status", self.task_id)
            if not status_ok(self.evaluator_status):
                raise InvariantViolation(f"unknown evaluator_status {self.evaluator_status!r}",
                                         self.task_id)
        elif self.evaluator_status:
            raise InvariantViolation("evaluator_status set on a non-eval row", self.task_id)

    @property
    def total_tokens(self):
        return self.prompt_tokens + self.completion_tokens + self.reasoning_tokens

    def to_row(self):
        row = []
        for name in FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            row.append(str(value))
        return row

    @classmethod
    def from_row(cls, row):
        if len(row) != len(FIELDS):
            raise SchemaMismatch(f"row has {len(row)} fields, expected {len(FIELDS)}")
        values = dict(zip(FIELDS, row))
        task_id = values["task_id"]
        for name in _INT_FIELDS:
            try:
                values[name] = int(values[name])
            except ValueError:
                raise InvariantViolation(f"{name} is not an integer: {values[name]!r}",
                                         task_id) from None
        flag = values["reflector_fired"]
        if flag not in ("true", "false"):
            raise InvariantViolation(f"reflector_fired must be true/false, got {flag!r}", task_id)
        values["reflector_fired"] = flag == "true"
        return cls(**values)


assert tuple(f.name for f in fields(LedgerEvent)) == FIELDS


def normalize_action_signature(action_name, action_target="", key_or_text=""):
    """``name#target`` for clicks, ``name#key_or_text`` for keyboard actions."""
    if action_name in KEYBOARD_ACTIONS:
        return f"{action_name}#{key_or_text}"
    return f"{action_name}#{action_target}"


# ------------------------------------------------------------------ I/O

def write_header(fp):
    csv.writer(fp, lineterminator="\n").writerow(FIELDS)


def append_event(fp, event):
    """Append one validated row to an open text stream positioned at its end."""
    if not isinstance(event, LedgerEvent):
        raise InvariantViolation(f"expected a LedgerEvent, got {type(event).__name__}")
    csv.writer(fp, lineterminator="\n").writerow(event.to_row())
    return True


class LedgerWriter:
    """Append-only writer; creates the file with its header on first use."""

    def __init__(self, path):
        self.path = Path(path)
        self._fp = None
        self.count = 0

    def __enter__(self):
        self.open()
        return self

    def __exit__(self, *exc):
        self.close()

    def open(self):
        fresh = not self.path.exists() or self.path.stat().st_size == 0
        self._fp = open(self.path, "a", encoding="utf-8", newline="")
        if fresh:
            write_header(self._fp)
        else:
            with open(self.path, encoding="utf-8", newline="") as fh:
                header = next(csv.reader(fh), None)
            if tuple(header or ()) != FIELDS:
                self._fp.close()
                raise SchemaMismatch(f"{self.path}: existing header does not match the schema")

    def append(self, event):
        append_event(self._fp, event)
        self.count += 1

    def extend(self, events):
        for e in events:
            self.append(e)

    def close(self):
        if self._fp is not None:
            self._fp.flush()
            os.fsync(self._fp.fileno())
            self._fp.close()
            self._fp = None


def write_ledger(path, events):
    with open(path, "w", encoding="utf-8", newline="") as fp:
        write_header(fp)
        for e in events:
            append_event(fp, e)


def dumps(events):
    buf = io.StringIO()
    write_header(buf)
    for e in events:
        append_event(buf, e)
    return buf.getvalue()


def parse_ledger(text_or_fp):
    fp = io.StringIO(text_or_fp) if isinstance(text_or_fp, str) else text_or_fp
    reader = csv.reader(fp)
    header = next(reader, None)
    if header is None:
        return []
    if tuple(header) != FIELDS:
        raise SchemaMismatch(f"ledger header does not match the schema: {header}")
    return [LedgerEvent.from_row(row) for row in reader if row]


def read_ledger(path):
    with open(path, encoding="utf-8", newline="") as fp:
        return parse_ledger(fp)


# ---------------------------------------------------------- task views

@dataclass(frozen=True)
class SubgoalSegment:
    """Producer-side annotation of one subgoal; not part of the CSV schema.

    ``actions`` holds the primitive actions the Actor executed as
    ``(name, target, key_or_text)`` triples.
    """

    name: str
    phrases: tuple
    actions: tuple = ()
    routine_id: str = ""
    routine_passed: bool | None = None
    verified: bool = False
    passed: bool = False
    url: str = ""
    domain: str = ""


@dataclass(frozen=True)
class TaskTrajectoryView:
    run_id: str
    task_id: str
    events: tuple
    terminal: LedgerEvent
    segments: tuple = ()

    @property
    def domain(self):
        return self.terminal.domain

    @property
    def method(self):
        return self.terminal.method

    @property
    def status(self):
        return self.terminal.evaluator_status

    @property
    def succeeded(self):
        return self.status == SUCCESS

    @property
    def step_count(self):
        return len(self.events)

    def _sum(self, name):
        return sum(getattr(e, name) for e in self.events) + getattr(self.terminal, name)

    @property
    def prompt_tokens(self):
        return self._sum("prompt_tokens")

    @property
    def cached_prompt_tokens(self):
        return self._sum("cached_prompt_tokens")

    @property
    def total_tokens(self):
        return sum(e.total_tokens for e in self.events) + self.terminal.total_tokens

    @property
    def wall_time_ms(self):
        return self._sum("wall_time_ms")

    @property
    def fired_skill_ids(self):
        ids = set()
        for e in self.events:
            if e.skill_id:
                ids.add(e.skill_id)
            if e.routine_id:
                ids.add(e.routine_id)
        return ids

    def count(self, event_type):
        return sum(1 for e in self.events if e.event_type == event_type)

    def with_segments(self, segments):
        return TaskTrajectoryView(self.run_id, self.task_id, self.events, self.terminal,
                                  tuple(segments))


def read_tasks(events):
    """Group rows by (run_id, task_id) in first-appearance order and validate each task."""
    groups = {}
    for e in events:
        groups.setdefault((e.run_id, e.task_id), []).append(e)
    views = []
    for (run_id, task_id), rows in groups.items():
        label = f"{run_id}/{task_id}"
        prev = None
        for r in rows:
            if prev is not None and r.step_idx <= prev:
                raise NonMonotoneStep(
                    f"task {label}: step_idx {r.step_idx} follows {prev}", task_id)
            prev = r.step_idx
        evals = [i for i, r in enumerate(rows) if r.event_type == "eval"]
        if not evals:
            raise MissingTerminal(f"task {label} has no eval row", task_id)
        if len(evals) > 1:
            raise DuplicateTerminal(f"task {label} has {len(evals)} eval rows", task_id)
        if evals[0] != len(rows) - 1:
            raise RowAfterTerminal(f"task {label} has rows after its eval row", task_id)
        views.append(TaskTrajectoryView(run_id, task_id, tuple(rows[:-1]), rows[-1]))
    return views
