"""Deterministic routine retrieval and rule matching."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from ..errors import AmbiguousPolarity
from .keywords import phrase_tokens, url_matches
from .types import PRIORITIES, confidence


class Match(NamedTuple):
    skill_id: str
    dir: str | None = None


@dataclass(frozen=True)
class ActionRecord:
    """One primitive action as seen by the rule window."""

    signature: str
    state_hash: str = ""


@dataclass(frozen=True)
class MonitorReport:
    url: str = ""
    stale_page: bool = False
    selector_rejected: bool = False


def is_eligible(routine, subgoal_keywords, url):
    """A routine is eligible when one of its trigger phrases is contained in the subgoal."""
    if not url_matches(routine.url_glob, url):
        return False
    return any(p <= subgoal_keywords for p in phrase_tokens(routine.trigger_phrases))


def candidates(library, subgoal_keywords, url):
    subgoal_keywords = frozenset(subgoal_keywords)
    return [r for r in library.routines.values() if is_eligible(r, subgoal_keywords, url)]


def polarity_dir(routine, subgoal_keywords):
    if not routine.polarity:
        return None
    hits = [v.dir for v in routine.polarity if v.keywords & subgoal_keywords]
    if len(hits) > 1:
        raise AmbiguousPolarity(routine.id)
    return hits[0] if hits else None


def retrieve(library, subgoal_keywords, url="", prior=0.5):
    """Highest-confidence eligible routine, ties broken by smallest id; None if no match."""
    subgoal_keywords = frozenset(subgoal_keywords)
    best = None
    for r in candidates(library, subgoal_keywords, url):
        key = (-confidence(r.confidence, prior), r.id)
        if best is None or key < best[0]:
            best = (key, r)
    if best is None:
        return None
    routine = best[1]
    return Match(routine.id, polarity_dir(routine, subgoal_keywords))


def _trailing_repeats(window, signature=None):
    """Length of the run of identical signatures (and unchanged state) ending the window."""
    if not window:
        return 0
    last = window[-1]
    if signature is not None and last.signature != signature:
        return 0
    run = 1
    for prev in reversed(window[:-1]):
        if prev.signature != last.signature or prev.state_hash != last.state_hash:
            break
        run += 1
    return run


def predicate_holds(pattern, window, monitor):
    kind = pattern.kind
    if kind == "stale_page":
        return monitor.stale_page
    if kind == "selector_rejected":
        return monitor.selector_rejected
    sig = pattern.signature
    wanted = None if sig in (None, "current_action") else sig
    return _trailing_repeats(window, wanted) >= pattern.repeat_threshold


def match_rules(library, window, monitor=None):
    """Ids of rules whose predicate holds on the window, high priority first, then id."""
    monitor = monitor or MonitorReport()
    window = list(window)
    fired = []
    for rule in library.rules.values():
        if not any(url_matches(site, monitor.url) for site in rule.sites):
            continue
        if predicate_holds(rule.trigger_pattern, window, monitor):
            fired.append(rule)
    fired.sort(key=lambda r: (PRIORITIES.index(r.priority), r.id))
    return [r.id for r in fired]
