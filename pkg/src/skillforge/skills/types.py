"""Immutable value types for rules, routines, the blacklist and the library."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import date
from typing import Mapping

from ..errors import BadPolarity, LibraryInvariantError, NegativeCount, UnknownPredicate
from .keywords import normalize_keywords

PRIORITIES = ("high", "normal", "low")
DIRECTIONS = ("asc", "desc")

# surface predicate name -> semantic kind
PREDICATE_KINDS = {
    "last_action_equals": "repeat_count",
    "repeat_count": "repeat_count",
    "stale_page": "stale_page",
    "selector_rejected": "selector_rejected",
}

_SLUG = re.compile(r"^[a-z0-9][a-z0-9_\-]*$")
_RUN_SIGNATURE = re.compile(r"^\s*def\s+run\s*\((.*?)\)", re.MULTILINE)


def is_slug(text):
    return bool(_SLUG.match(text or ""))


@dataclass(frozen=True)
class ConfidenceStats:
    n_pass: int = 0
    n_fail: int = 0

    def __post_init__(self):
        if self.n_pass < 0 or self.n_fail < 0:
            raise NegativeCount(f"negative counter ({self.n_pass}, {self.n_fail})")

    @property
    def n(self):
        return self.n_pass + self.n_fail

    def fail_ratio(self):
        return self.n_fail / self.n if self.n else 0.0

    def incremented(self, passed):
        if passed:
            return ConfidenceStats(self.n_pass + 1, self.n_fail)
        return ConfidenceStats(self.n_pass, self.n_fail + 1)

    def __add__(self, other):
        return ConfidenceStats(self.n_pass + other.n_pass, self.n_fail + other.n_fail)


def confidence(stats, prior=0.5):
    """Running pass ratio; ``prior`` is returned when nothing has been observed."""
    if not 0.0 <= prior <= 1.0:
        raise ValueError(f"prior must lie in [0, 1], got {prior}")
    n = stats.n_pass + stats.n_fail
    if n == 0:
        return prior
    return stats.n_pass / n


@dataclass(frozen=True)
class TriggerPattern:
    """A rule predicate: ``name(args...)`` with an optional ``>= threshold``."""

    name: str
    args: tuple = ()
    threshold: int | None = None

    def __post_init__(self):
        if self.name not in PREDICATE_KINDS:
            raise UnknownPredicate(
                f"unsupported predicate {self.name!r}; expected one of {sorted(PREDICATE_KINDS)}")

    @property
    def kind(self):
        return PREDICATE_KINDS[self.name]

    @property
    def signature(self):
        """Signature selector for repeat predicates ('current_action' = whatever repeats)."""
        if self.kind != "repeat_count":
            return None
        return str(self.args[0]) if self.args else "current_action"

    @property
    def repeat_threshold(self):
        if self.kind != "repeat_count":
            return None
        if self.threshold is not None:
            return self.threshold
        if len(self.args) >= 2:
            return int(self.args[1])
        return 2

    def render(self):
        text = f"{self.name}({', '.join(str(a) for a in self.args)})"
        if self.threshold is not None:
            text += f" >= {self.threshold}"
        return text


_PATTERN = re.compile(
    r"^\s*(?P<name>[a-z_][a-z0-9_]*)\s*(?:\((?P<args>[^()]*)\))?\s*(?:>=\s*(?P<thr>\d+))?\s*$")


def parse_trigger_pattern(text):
    m = _PATTERN.match(str(text))
    if not m:
        raise UnknownPredicate(f"cannot parse trigger pattern {text!r}")
    name = m.group("name")
    if name not in PREDICATE_KINDS:
        raise UnknownPredicate(f"unsupported predicate {name!r}")
    args = []
    raw_args = m.group("args")
    if raw_args and raw_args.strip():
        for a in raw_args.split(","):
            a = a.strip()
            args.append(int(a) if a.isdigit() else a)
    thr = m.group("thr")
    return TriggerPattern(name, tuple(args), int(thr) if thr is not None else None)


@dataclass(frozen=True)
class RuleSkill:
    id: str
    trigger_pattern: TriggerPattern
    sites: tuple = ("*",)
    priority: str = "normal"
    body: str = ""

    def __post_init__(self):
        if self.priority not in PRIORITIES:
            raise ValueError(f"priority must be one of {PRIORITIES}, got {self.priority!r}")


@dataclass(frozen=True)
class PolarityVariant:
    dir: str
    phrases: tuple

    def __post_init__(self):
        if self.dir not in DIRECTIONS:
            raise BadPolarity(f"unknown polarity direction {self.dir!r}")

    @property
    def keywords(self):
        return normalize_keywords(self.phrases)


@dataclass(frozen=True)
class RoutineSkill:
    id: str
    trigger_phrases: tuple
    url_glob: str = "*"
    polarity: tuple | None = None
    confidence: ConfidenceStats = field(default_factory=ConfidenceStats)
    body: str = ""
    pre_conditions: tuple = ()
    post_conditions: tuple = ()

    def __post_init__(self):
        if not self.trigger_keywords:
            raise ValueError(f"routine {self.id!r} has no trigger keywords")
        if self.polarity is not None:
            check_polarity(self.polarity)

    @property
    def trigger_keywords(self):
        return normalize_keywords(self.trigger_phrases)

    @property
    def params(self):
        """Parameter names declared by the body's ``def run(...)`` signature."""
        m = _RUN_SIGNATURE.search(self.body)
        if not m or not m.group(1).strip():
            return ()
        names = []
        for part in m.group(1).split(","):
            name = part.split(":")[0].split("=")[0].strip()
            if name:
                names.append(name)
        return tuple(names)

    @property
    def all_keywords(self):
        kws = set(self.trigger_keywords)
        for v in self.polarity or ():
            kws |= v.keywords
        return frozenset(kws)

    def with_confidence(self, stats):
        return replace(self, confidence=stats)


def check_polarity(variants):
    if len(variants) != 2:
        raise BadPolarity(f"polarity_pair needs exactly 2 variants, got {len(variants)}")
    a, b = variants
    if a.dir == b.dir:
        raise BadPolarity(f"duplicate polarity direction {a.dir!r}")
    if not a.keywords or not b.keywords:
        raise BadPolarity("polarity variant with empty keyword set")
    if a.keywords & b.keywords:
        raise BadPolarity(f"overlapping polarity keywords {sorted(a.keywords & b.keywords)}")


@dataclass(frozen=True)
class DemotionEntry:
    id: str
    demoted_at: date
    reason: str
    phrases: tuple

    def __post_init__(self):
        if not self.keywords:
            raise ValueError(f"demotion entry {self.id!r} has no keywords")

    @property
    def keywords(self):
        return normalize_keywords(self.phrases)


@dataclass(frozen=True)
class SkillLibrary:
    """Rules and routines (disjoint by id) plus the append-only blacklist.

    Treat instances as values: every mutator returns a new library.
    """

    rules: Mapping[str, RuleSkill] = field(default_factory=dict)
    routines: Mapping[str, RoutineSkill] = field(default_factory=dict)
    blacklist: tuple = ()
    reflections: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rules", dict(self.rules))
        object.__setattr__(self, "routines", dict(self.routines))
        object.__setattr__(self, "blacklist", tuple(self.blacklist))
        for problem in self.violations():
            raise LibraryInvariantError(problem)

    def violations(self):
        problems = []
        for key, r in self.rules.items():
            if key != r.id:
                problems.append(f"rule keyed {key!r} has id {r.id!r}")
        for key, r in self.routines.items():
            if key != r.id:
                problems.append(f"routine keyed {key!r} has id {r.id!r}")
        shared = set(self.rules) & set(self.routines)
        if shared:
            problems.append(f"ids used by both a rule and a routine: {sorted(shared)}")
        demoted = {e.id for e in self.blacklist}
        active_demoted = demoted & set(self.routines)
        if active_demoted:
            problems.append(f"active routines on the blacklist: {sorted(active_demoted)}")
        return problems

    @classmethod
    def from_skills(cls, rules=(), routines=(), blacklist=(), reflections=""):
        return cls({r.id: r for r in rules}, {r.id: r for r in routines},
                   tuple(blacklist), reflections)

    @property
    def demoted_ids(self):
        return frozenset(e.id for e in self.blacklist)

    def skill_ids(self):
        return set(self.rules) | set(self.routines)

    def with_routine(self, routine):
        routines = dict(self.routines)
        routines[routine.id] = routine
        return replace(self, routines=routines)

    def without_routines(self, ids):
        ids = set(ids)
        return replace(self, routines={k: v for k, v in self.routines.items() if k not in ids})

    def with_demotions(self, entries):
        """Remove the demoted routines and append their entries to the blacklist."""
        entries = tuple(entries)
        gone = {e.id for e in entries}
        routines = {k: v for k, v in self.routines.items() if k not in gone}
        return replace(self, routines=routines, blacklist=self.blacklist + entries)

    def prefix_signature(self):
        """What a prompt's skill index would contain: ids and triggers, not counters."""
        parts = [("rule", r.id, r.trigger_pattern.render()) for r in sorted(self.rules.values(), key=lambda r: r.id)]
        for r in sorted(self.routines.values(), key=lambda r: r.id):
            pol = tuple((v.dir, v.phrases) for v in r.polarity or ())
            parts.append(("routine", r.id, r.trigger_phrases, r.url_glob, pol))
        return tuple(parts)
