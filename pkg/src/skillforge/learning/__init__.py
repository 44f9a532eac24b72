"""Library learning: induction, polarity merging, confidence and demotion."""

from .config import DEFAULT_ANTONYMS, LearningConfig, RoutineCandidate
from .events import LibraryEvent, LibraryStats, library_stats, read_events, write_events
from .induction import induce, render_body, slugify
from .lifecycle import (UpdateResult, admit, check_blacklist, demotion_reason, library_update,
                        record_outcome, scan_demotions)
from .merging import (jaccard_body, materialize_sibling, merge_pair, merge_polarity_pairs,
                      polarity_pair)

__all__ = [
    "DEFAULT_ANTONYMS", "LearningConfig", "LibraryEvent", "LibraryStats", "RoutineCandidate",
    "UpdateResult", "admit", "check_blacklist", "demotion_reason", "induce", "jaccard_body",
    "library_stats", "library_update", "materialize_sibling", "merge_pair",
    "merge_polarity_pairs", "polarity_pair", "read_events", "record_outcome", "render_body",
    "scan_demotions", "slugify", "write_events",
]
