from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigInvalid
from ..skills.keywords import normalize_keywords

# (ascending side, descending side)
DEFAULT_ANTONYMS = (
    ("asc", "desc"),
    ("min", "max"),
    ("cheapest", "most expensive"),
    ("oldest", "newest"),
    ("lowest", "highest"),
    ("smallest", "largest"),
)


@dataclass(frozen=True)
class LearningConfig:
    theta_demote: float = 0.5
    min_invocations: int = 3
    jaccard_threshold: float = 0.85
    antonym_lexicon: tuple = DEFAULT_ANTONYMS
    prior: float = 0.5
    admit_confidence: tuple = (1, 0)

    def __post_init__(self):
        if not 0.0 < self.theta_demote < 1.0:
            raise ConfigInvalid(f"theta_demote must lie in (0, 1), got {self.theta_demote}")
        if self.min_invocations < 1:
            raise ConfigInvalid(f"min_invocations must be >= 1, got {self.min_invocations}")
        if not 0.0 < self.jaccard_threshold <= 1.0:
            raise ConfigInvalid(f"jaccard_threshold must lie in (0, 1], got {self.jaccard_threshold}")
        if not 0.0 <= self.prior <= 1.0:
            raise ConfigInvalid(f"prior must lie in [0, 1], got {self.prior}")
        object.__setattr__(self, "antonym_lexicon",
                           tuple((str(a), str(b)) for a, b in self.antonym_lexicon))

    def token_flips(self):
        """Single-token antonym map in both directions, value = (other, side)."""
        flips = {}
        for a, b in self.antonym_lexicon:
            if " " in a.strip() or " " in b.strip():
                continue
            flips[a] = (b, "asc")
            flips[b] = (a, "desc")
        return flips

    def phrase_flips(self):
        flips = {}
        for a, b in self.antonym_lexicon:
            flips[a] = (b, "asc")
            flips[b] = (a, "desc")
        return flips


@dataclass(frozen=True)
class RoutineCandidate:
    proposed_id: str
    trigger_phrases: tuple
    body: str
    params: tuple = ()
    source_task: str = ""
    subgoal_template: str = ""
    url_glob: str = "*"
    pre_conditions: tuple = ()
    post_conditions: tuple = ()

    def __post_init__(self):
        if not normalize_keywords(self.trigger_phrases):
            raise ValueError(f"candidate {self.proposed_id!r} has no trigger keywords")

    @property
    def trigger_keywords(self):
        return normalize_keywords(self.trigger_phrases)
