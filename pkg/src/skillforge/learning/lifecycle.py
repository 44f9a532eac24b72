"""Confidence bookkeeping, demotion, blacklist screening and the per-task update."""

from __future__ import annotations

from datetime import date
from typing import NamedTuple

from ..errors import DemotedSkill, UnknownSkill
from ..skills.types import DemotionEntry
from .config import LearningConfig
from .events import LibraryEvent
from .induction import induce
from .merging import as_routine, materialize_sibling, merge_polarity_pairs


class UpdateResult(NamedTuple):
    library: object
    events: list


def record_outcome(library, skill_id, outcome, events=None, task_id=""):
    """Bump the pass or fail counter of an active routine."""
    passed = outcome if isinstance(outcome, bool) else outcome == "pass"
    if outcome not in (True, False, "pass", "fail"):
        raise ValueError(f"outcome must be 'pass' or 'fail', got {outcome!r}")
    if skill_id in library.demoted_ids:
        raise DemotedSkill(f"{skill_id!r} is on the blacklist")
    routine = library.routines.get(skill_id)
    if routine is None:
        raise UnknownSkill(skill_id)
    lib = library.with_routine(routine.with_confidence(routine.confidence.incremented(passed)))
    if events is not None:
        events.append(LibraryEvent("outcome", skill_id, task_id, "pass" if passed else "fail"))
    return lib


def demotion_reason(stats):
    return f"fail_ratio={stats.fail_ratio():.2f} over {stats.n} invocations"


def scan_demotions(library, config=None, today=None, events=None, task_id=""):
    """Move every routine whose fail ratio exceeds the threshold to the blacklist.

    Returns ``(library, entries)``; the check is strict (ratio > theta) and
    needs at least ``min_invocations`` recorded outcomes.
    """
    config = config or LearningConfig()
    today = today or date.today()
    entries = []
    for rid in sorted(library.routines):
        r = library.routines[rid]
        st = r.confidence
        if st.n < config.min_invocations or st.fail_ratio() <= config.theta_demote:
            continue
        phrases = list(r.trigger_phrases)
        for v in r.polarity or ():
            phrases += [p for p in v.phrases if p not in phrases]
        entries.append(DemotionEntry(rid, today, demotion_reason(st), tuple(phrases)))
    if not entries:
        return library, []
    if events is not None:
        for e in entries:
            events.append(LibraryEvent("demote", e.id, task_id, e.reason))
    return library.with_demotions(entries), entries


def check_blacklist(candidate, blacklist):
    """Id of the first blacklist entry sharing a keyword with the candidate, else None."""
    kws = candidate.trigger_keywords
    for entry in blacklist:
        if kws & entry.keywords:
            return entry.id
    return None


def admit(library, candidates, config=None, events=None, task_id=""):
    """Screen candidates against the blacklist and existing ids, then add them.

    A candidate with a clean direction flip also brings its flipped twin in
    at zero counts, so the pair can be merged right away.
    """
    config = config or LearningConfig()
    lib = library
    for cand in candidates:
        hit = check_blacklist(cand, lib.blacklist)
        if hit is not None:
            if events is not None:
                events.append(LibraryEvent("reject", cand.proposed_id, task_id,
                                           f"blacklist:{hit}"))
            continue
        taken = lib.skill_ids() | lib.demoted_ids
        if cand.proposed_id in taken:
            if events is not None:
                events.append(LibraryEvent("reject", cand.proposed_id, task_id, "duplicate_id"))
            continue
        lib = lib.with_routine(as_routine(cand, config.admit_confidence))
        if events is not None:
            events.append(LibraryEvent("admit", cand.proposed_id, task_id))
        twin = materialize_sibling(cand, config)
        if twin is None or twin.proposed_id in taken | {cand.proposed_id}:
            continue
        if check_blacklist(twin, lib.blacklist) is not None:
            continue
        lib = lib.with_routine(as_routine(twin, (0, 0)))
        if events is not None:
            events.append(LibraryEvent("materialize", twin.proposed_id, task_id, "",
                                       (cand.proposed_id,)))
    return lib


def library_update(library, trajectory, config=None, today=None):
    """Apply one finished trajectory to the library.

    Order: record routine outcomes, induce (successful tasks only), admit,
    merge polarity pairs, demote.  Deterministic given its inputs.
    """
    config = config or LearningConfig()
    events = []
    tid = trajectory.task_id
    lib = library
    for seg in trajectory.segments:
        if not seg.routine_id or seg.routine_passed is None:
            continue
        if seg.routine_id not in lib.routines:
            events.append(LibraryEvent("stale_outcome", seg.routine_id, tid))
            continue
        lib = record_outcome(lib, seg.routine_id, bool(seg.routine_passed), events, tid)
    candidates = induce(trajectory, lib)
    lib = admit(lib, candidates, config, events, tid)
    lib = merge_polarity_pairs(lib, config, events, tid)
    lib, _ = scan_demotions(lib, config, today, events, tid)
    return UpdateResult(lib, events)
