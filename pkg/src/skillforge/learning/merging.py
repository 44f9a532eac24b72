"""Polarity-pair detection and merging.

Two routines form a polarity pair when their bodies are token-for-token equal
except at positions holding an antonym pair from the lexicon (asc/desc,
oldest/newest, ...).  The pair is folded into one routine taking a ``dir``
parameter, with one keyword variant per direction.
"""

from __future__ import annotations

import re
from dataclasses import replace

from ..skills.keywords import body_token_spans, normalize_keywords, tokenize_body
from ..skills.types import ConfidenceStats, PolarityVariant, RoutineSkill, check_polarity
from ..errors import BadPolarity
from .events import LibraryEvent

_RUN_DEF = re.compile(r"(def\s+run\s*\()([^)]*)(\))")


def jaccard_body(a, b):
    ta, tb = set(tokenize_body(a)), set(tokenize_body(b))
    if not ta and not tb:
        return 1.0
    return len(ta & tb) / len(ta | tb)


def flip_side(body_a, body_b, token_flips):
    """'asc' if ``body_a`` is the ascending side of a pure direction flip of
    ``body_b``, 'desc' for the reverse, None when the bodies differ otherwise."""
    ta, tb = tokenize_body(body_a), tokenize_body(body_b)
    if len(ta) != len(tb):
        return None
    side = None
    for x, y in zip(ta, tb):
        if x == y:
            continue
        flip = token_flips.get(x)
        if flip is None or flip[0] != y:
            return None
        if side is not None and flip[1] != side:
            return None
        side = flip[1]
    return side


def _phrase_key(phrase):
    return " ".join(tokenize_body(phrase))


def _distinct(phrases, other):
    other_keys = {_phrase_key(p) for p in other}
    return tuple(p for p in phrases if _phrase_key(p) not in other_keys)


def _flip_positions(body, token_flips, replacement):
    """Rewrite every antonym token in ``body``; ``replacement(tok)`` gives the new text."""
    spans = body_token_spans(body)
    if [t for t, _, _ in spans] != tokenize_body(body):
        return None
    out, last, changed = [], 0, 0
    for tok, start, end in spans:
        if tok in token_flips:
            out.append(body[last:start])
            out.append(replacement(tok))
            last = end
            changed += 1
    out.append(body[last:])
    return "".join(out) if changed else None


def _lift_direction(body, token_flips):
    lifted = _flip_positions(body, token_flips, lambda tok: "{dir}")
    if lifted is None:
        return body

    def add_param(m):
        params = m.group(2).strip()
        names = [p.split(":")[0].split("=")[0].strip() for p in params.split(",") if p.strip()]
        if "dir" in names:
            return m.group(0)
        params = f"{params}, dir: str" if params else "dir: str"
        return f"{m.group(1)}{params}{m.group(3)}"

    return _RUN_DEF.sub(add_param, lifted, count=1)


def merged_id(a_id, b_id, taken):
    prefix = []
    for x, y in zip(a_id.split("_"), b_id.split("_")):
        if x != y:
            break
        prefix.append(x)
    name = "_".join(prefix).strip("_")
    if name and name not in taken:
        return name
    fallback = min(a_id, b_id) + "_pm"
    return fallback if fallback not in taken else None


def polarity_pair(f, g, config):
    """Return (asc, desc) when ``f`` and ``g`` may merge, else None."""
    if f.polarity or g.polarity or f.url_glob != g.url_glob:
        return None
    if len(tokenize_body(f.body)) != len(tokenize_body(g.body)):
        return None
    if jaccard_body(f.body, g.body) < config.jaccard_threshold:
        return None
    side = flip_side(f.body, g.body, config.token_flips())
    if side is None:
        return None
    asc, desc = (f, g) if side == "asc" else (g, f)
    asc_kw, desc_kw = _distinct(asc.trigger_phrases, desc.trigger_phrases), \
        _distinct(desc.trigger_phrases, asc.trigger_phrases)
    if not asc_kw or not desc_kw:
        return None
    if normalize_keywords(asc_kw) & normalize_keywords(desc_kw):
        return None
    return asc, desc


def merge_pair(asc, desc, new_id, config):
    asc_kw = _distinct(asc.trigger_phrases, desc.trigger_phrases)
    desc_kw = _distinct(desc.trigger_phrases, asc.trigger_phrases)
    phrases = tuple(asc.trigger_phrases) + tuple(
        p for p in desc.trigger_phrases if _phrase_key(p) not in
        {_phrase_key(q) for q in asc.trigger_phrases})
    variants = (PolarityVariant("asc", asc_kw), PolarityVariant("desc", desc_kw))
    check_polarity(variants)
    return RoutineSkill(
        id=new_id,
        trigger_phrases=phrases,
        url_glob=asc.url_glob,
        polarity=variants,
        confidence=asc.confidence + desc.confidence,
        body=_lift_direction(asc.body, config.token_flips()),
        pre_conditions=asc.pre_conditions,
        post_conditions=asc.post_conditions,
    )


def merge_polarity_pairs(library, config, events=None, task_id=""):
    """Greedily merge polarity pairs, scanning routine ids in ascending order."""
    ids = sorted(library.routines)
    consumed = set()
    merges = []
    taken = set(library.skill_ids()) | set(library.demoted_ids)
    for i, a in enumerate(ids):
        if a in consumed:
            continue
        for b in ids[i + 1:]:
            if b in consumed:
                continue
            pair = polarity_pair(library.routines[a], library.routines[b], config)
            if pair is None:
                continue
            new_id = merged_id(a, b, taken - {a, b})
            if new_id is None:
                continue
            try:
                merged = merge_pair(pair[0], pair[1], new_id, config)
            except BadPolarity:
                continue
            consumed |= {a, b}
            taken.add(new_id)
            merges.append((a, b, merged))
            break
    if not merges:
        return library
    lib = library.without_routines(consumed)
    for a, b, merged in merges:
        lib = lib.with_routine(merged)
        if events is not None:
            events.append(LibraryEvent("merge", merged.id, task_id, "", (a, b)))
    return lib


def materialize_sibling(candidate, config):
    """The direction-flipped twin of a candidate, or None if it has no clean flip.

    The twin shares the body up to antonym tokens and takes the flipped trigger
    phrases; it is only produced when the two bodies would pass the merge test.
    """
    token_flips = config.token_flips()
    phrase_flips = config.phrase_flips()
    body = _flip_positions(candidate.body, token_flips, lambda tok: token_flips[tok][0])
    if body is None:
        return None
    phrases, flipped = [], 0
    for p in candidate.trigger_phrases:
        key = _phrase_key(p)
        if key in phrase_flips:
            phrases.append(phrase_flips[key][0])
            flipped += 1
        else:
            phrases.append(p)
    if not flipped:
        return None
    parts = candidate.proposed_id.split("_")
    new_parts = [token_flips[p][0] if p in token_flips else p for p in parts]
    new_id = "_".join(new_parts) if new_parts != parts else candidate.proposed_id + "_flip"
    if jaccard_body(candidate.body, body) < config.jaccard_threshold:
        return None
    return replace(candidate, proposed_id=new_id, trigger_phrases=tuple(phrases), body=body)


def as_routine(candidate, stats):
    return RoutineSkill(candidate.proposed_id, tuple(candidate.trigger_phrases),
                        candidate.url_glob, None, ConfidenceStats(*stats), candidate.body,
                        tuple(candidate.pre_conditions), tuple(candidate.post_conditions))
