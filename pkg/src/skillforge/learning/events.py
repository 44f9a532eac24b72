"""Library events (admit / merge / demote / reject / outcome) and the statistics
derived from them."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

KINDS = ("outcome", "admit", "materialize", "merge", "demote", "reject", "stale_outcome")


@dataclass(frozen=True)
class LibraryEvent:
    kind: str
    skill_id: str
    task_id: str = ""
    detail: str = ""
    sources: tuple = ()

    def to_json(self):
        d = asdict(self)
        d["sources"] = list(self.sources)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line):
        d = json.loads(line)
        d["sources"] = tuple(d.get("sources", ()))
        return cls(**d)


@dataclass(frozen=True)
class LibraryStats:
    seed: int
    induced: int
    demoted: int
    active: int
    polarity_pairs: int

    COLUMNS = ("seed", "induced", "demoted", "active", "pairs")

    def as_row(self):
        return (self.seed, self.induced, self.demoted, self.active, self.polarity_pairs)


def library_stats(events, seed_library, final_library):
    """Counts from events rather than file snapshots; a merge of two induced
    routines counts as one induced routine."""
    induced_ids = set()
    induced = demoted = pairs = 0
    for ev in events:
        if ev.kind == "admit":
            induced += 1
            induced_ids.add(ev.skill_id)
        elif ev.kind == "merge":
            pairs += 1
            hits = sum(1 for s in ev.sources if s in induced_ids)
            if hits == 2:
                induced -= 1
            if hits:
                induced_ids.add(ev.skill_id)
        elif ev.kind == "demote":
            demoted += 1
    return LibraryStats(len(seed_library.routines), induced, demoted,
                        len(final_library.routines), pairs)


def write_events(path, events):
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(ev.to_json() + "\n")


def read_events(path):
    with open(path, encoding="utf-8") as fh:
        return [LibraryEvent.from_json(line) for line in fh if line.strip()]
