"""Skill library model: value types, file formats, retrieval and rule matching."""

from .formats import (append_demotions, canonical_text, parse_demoted_log, parse_routine,
                      parse_rule, serialize_demoted_log, serialize_routine, serialize_rule)
from .keywords import normalize_keywords, tokenize_body, url_matches
from .retrieval import ActionRecord, Match, MonitorReport, match_rules, retrieve
from .store import library_lock, load_library, save_library, scan_library
from .types import (ConfidenceStats, DemotionEntry, PolarityVariant, RoutineSkill, RuleSkill,
                    SkillLibrary, TriggerPattern, confidence, parse_trigger_pattern)

__all__ = [
    "ActionRecord", "ConfidenceStats", "DemotionEntry", "Match", "MonitorReport",
    "PolarityVariant", "RoutineSkill", "RuleSkill", "SkillLibrary", "TriggerPattern",
    "append_demotions", "canonical_text", "confidence", "library_lock", "load_library",
    "match_rules", "normalize_keywords", "parse_demoted_log", "parse_routine", "parse_rule",
    "parse_trigger_pattern", "retrieve", "save_library", "scan_library",
    "serialize_demoted_log", "serialize_routine", "serialize_rule", "tokenize_body",
    "url_matches",
]
