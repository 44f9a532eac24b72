"""Parsing and canonical serialization of rule, routine and blacklist files.

Files carry a YAML front-matter block between two ``---`` lines followed by a
free-text body.  Serialization emits keys in a fixed order and wraps flow
lists at a fixed width so that ``serialize(parse(x))`` is byte-stable.
"""

from __future__ import annotations

import json
import re
from datetime import date, datetime

import yaml

_Loader = getattr(yaml, "CSafeLoader", yaml.SafeLoader)

from ..errors import (BadPolarity, MalformedEntry, MalformedFrontMatter, MissingField,
                      NegativeCount, SkillFormatError, UnknownPredicate)
from .types import (ConfidenceStats, DemotionEntry, PolarityVariant, RoutineSkill, RuleSkill,
                    check_polarity, is_slug, parse_trigger_pattern)

DELIMITER = "---"
WRAP_WIDTH = 72
DEMOTED_HEADER = "---\n# demoted.md\n---\n"

_COND_LINE = re.compile(r"^(pre|post):\s*\[(.*)\]\s*$")


def split_front_matter(text, path=None):
    lines = text.splitlines()
    if not lines or lines[0].rstrip() != DELIMITER:
        raise MalformedFrontMatter("file does not start with a '---' line", path)
    for i in range(1, len(lines)):
        if lines[i].rstrip() == DELIMITER:
            return "\n".join(lines[1:i]), "\n".join(lines[i + 1:])
    raise MalformedFrontMatter("front matter has no closing '---' line", path)


def _load_header(header, path):
    try:
        meta = yaml.load(header, Loader=_Loader)
    except yaml.YAMLError as exc:
        raise MalformedFrontMatter(f"front matter is not valid YAML: {exc}", path) from None
    if meta is None:
        return {}
    if not isinstance(meta, dict):
        raise MalformedFrontMatter("front matter must be a mapping", path)
    return meta


def _require(mapping, key, path, where=""):
    if not isinstance(mapping, dict) or mapping.get(key) is None:
        raise MissingField(f"missing field {where}{key!r}", path)
    return mapping[key]


def _str_list(value, key, path):
    if isinstance(value, str):
        return (value,)
    if not isinstance(value, (list, tuple)):
        raise SkillFormatError(f"{key!r} must be a list", path)
    return tuple(str(v) for v in value)


def _canonical_body(text):
    lines = [ln.rstrip() for ln in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    while lines and not lines[0]:
        lines.pop(0)
    return "\n".join(lines)


def _split_conditions(inner):
    items, depth, cur = [], 0, []
    for ch in inner:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == "," and depth == 0:
            items.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    last = "".join(cur).strip()
    if last or items:
        items.append(last)
    return tuple(i for i in items if i)


def split_routine_body(body):
    """Separate the program text from trailing ``pre:``/``post:`` condition lines."""
    lines = _canonical_body(body).split("\n") if body.strip() else []
    conds = {}
    while lines:
        m = _COND_LINE.match(lines[-1])
        if not m or m.group(1) in conds:
            break
        conds[m.group(1)] = _split_conditions(m.group(2))
        lines.pop()
    program = _canonical_body("\n".join(lines))
    return program, conds.get("pre", ()), conds.get("post", ())


# ---------------------------------------------------------------- parsing

def parse_rule(text, path=None):
    header, body = split_front_matter(text, path)
    meta = _load_header(header, path)
    rule_id = str(_require(meta, "id", path))
    trigger = _require(meta, "trigger", path)
    pattern_text = _require(trigger, "pattern", path, "trigger.")
    priority = str(_require(meta, "priority", path))
    try:
        pattern = parse_trigger_pattern(pattern_text)
    except UnknownPredicate as exc:
        raise UnknownPredicate(str(exc), path) from None
    sites = _str_list(trigger.get("sites", ["*"]), "sites", path)
    try:
        return RuleSkill(rule_id, pattern, sites, priority, _canonical_body(body))
    except ValueError as exc:
        raise SkillFormatError(str(exc), path) from None


def parse_routine(text, path=None):
    header, body = split_front_matter(text, path)
    meta = _load_header(header, path)
    routine_id = str(_require(meta, "id", path))
    trigger = _require(meta, "trigger", path)
    phrases = _str_list(_require(trigger, "keywords", path, "trigger."), "keywords", path)
    url_glob = str(trigger.get("url_glob", "*"))
    conf = _require(meta, "confidence", path)
    n_pass = _require(conf, "n_pass", path, "confidence.")
    n_fail = _require(conf, "n_fail", path, "confidence.")
    if any(not isinstance(v, int) or isinstance(v, bool) for v in (n_pass, n_fail)):
        raise SkillFormatError("confidence counters must be integers", path)
    if n_pass < 0 or n_fail < 0:
        raise NegativeCount(f"negative confidence counter ({n_pass}, {n_fail})", path)

    polarity = None
    if "polarity_pair" in meta:
        raw = meta["polarity_pair"]
        if not isinstance(raw, list):
            raise BadPolarity("polarity_pair must be a list", path)
        variants = []
        for item in raw:
            if not isinstance(item, dict) or "dir" not in item or "keywords" not in item:
                raise BadPolarity("polarity variant needs 'dir' and 'keywords'", path)
            try:
                variants.append(PolarityVariant(str(item["dir"]),
                                                _str_list(item["keywords"], "keywords", path)))
            except BadPolarity as exc:
                raise BadPolarity(str(exc), path) from None
        polarity = tuple(variants)
        try:
            check_polarity(polarity)
        except BadPolarity as exc:
            raise BadPolarity(str(exc), path) from None

    program, pre, post = split_routine_body(body)
    try:
        return RoutineSkill(routine_id, phrases, url_glob, polarity,
                            ConfidenceStats(n_pass, n_fail), program, pre, post)
    except (BadPolarity, NegativeCount):
        raise
    except ValueError as exc:
        raise MissingField(str(exc), path) from None


def _as_date(value, path):
    if isinstance(value, datetime):
        return value.date()
    if isinstance(value, date):
        return value
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        raise MalformedEntry(f"bad demoted_at date {value!r}", path) from None


def parse_demoted_log(text, path=None):
    if not text.strip():
        return []
    if text.lstrip().startswith(DELIMITER):
        _, body = split_front_matter(text.lstrip(), path)
    else:
        body = text
    try:
        raw = yaml.load(body, Loader=_Loader)
    except yaml.YAMLError as exc:
        raise MalformedEntry(f"blacklist body is not valid YAML: {exc}", path) from None
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise MalformedEntry("blacklist body must be a list of entries", path)
    entries = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise MalformedEntry(f"entry {i} is not a mapping", path)
        for key in ("id", "demoted_at", "reason", "keywords"):
            if item.get(key) in (None, "", []):
                raise MalformedEntry(f"entry {i} is missing {key!r}", path)
        phrases = _str_list(item["keywords"], "keywords", path)
        try:
            entries.append(DemotionEntry(str(item["id"]), _as_date(item["demoted_at"], path),
                                         str(item["reason"]), phrases))
        except ValueError as exc:
            raise MalformedEntry(f"entry {i}: {exc}", path) from None
    return entries


# ---------------------------------------------------------- serialization

def _q(text):
    return json.dumps(text, ensure_ascii=False)


def _scalar(text):
    return text if is_slug(text) else _q(text)


def flow_list(prefix, items, width=WRAP_WIDTH):
    """Render ``prefix["a", "b", ...]`` wrapping greedily at ``width`` columns."""
    if not items:
        return [prefix + "[]"]
    indent = " " * (len(prefix) + 1)
    lines = []
    line = prefix + "["
    fresh = True
    for i, item in enumerate(items):
        token = _q(item) + ("]" if i == len(items) - 1 else ",")
        if fresh:
            line += token
            fresh = False
        elif len(line) + 1 + len(token) > width:
            lines.append(line)
            line = indent + token
        else:
            line += " " + token
    lines.append(line)
    return lines


def serialize_rule(rule):
    lines = [DELIMITER, f"id: {_scalar(rule.id)}", "trigger:",
             f"  pattern: {rule.trigger_pattern.render()}"]
    lines += flow_list("  sites: ", list(rule.sites))
    lines += [f"priority: {rule.priority}", DELIMITER]
    if rule.body:
        lines.append(rule.body)
    return "\n".join(lines) + "\n"


def serialize_routine(routine):
    lines = [DELIMITER, f"id: {_scalar(routine.id)}", "trigger:"]
    lines += flow_list("  keywords: ", list(routine.trigger_phrases))
    lines.append(f"  url_glob: {_q(routine.url_glob)}")
    if routine.polarity is not None:
        lines.append("polarity_pair:")
        for v in routine.polarity:
            lines.append(f"  - dir: {v.dir}")
            lines += flow_list("    keywords: ", list(v.phrases))
    lines += ["confidence:", f"  n_pass: {routine.confidence.n_pass}",
              f"  n_fail: {routine.confidence.n_fail}", DELIMITER]
    body = routine.body
    if routine.pre_conditions or routine.post_conditions:
        conds = (f"pre:  [{', '.join(routine.pre_conditions)}]\n"
                 f"post: [{', '.join(routine.post_conditions)}]")
        body = f"{body}\n\n{conds}" if body else conds
    if body:
        lines.append(body)
    return "\n".join(lines) + "\n"


def serialize_demotion_entry(entry):
    lines = [f"- id: {_scalar(entry.id)}",
             f"  demoted_at: {entry.demoted_at.isoformat()}",
             f"  reason: {_q(entry.reason)}"]
    lines += flow_list("  keywords: ", list(entry.phrases))
    return "\n".join(lines) + "\n"


def serialize_demoted_log(entries):
    return DEMOTED_HEADER + "".join(serialize_demotion_entry(e) for e in entries)


def append_demotions(text, entries):
    """Append entries to an existing blacklist file; the old bytes are kept as-is."""
    if not text.strip():
        text = DEMOTED_HEADER
    elif not text.endswith("\n"):
        text += "\n"
    return text + "".join(serialize_demotion_entry(e) for e in entries)


def canonical_text(text):
    """Trailing-whitespace-insensitive form used to compare files."""
    return "\n".join(ln.rstrip() for ln in text.rstrip().splitlines()) + "\n"
