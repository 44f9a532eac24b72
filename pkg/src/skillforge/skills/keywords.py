"""Keyword normalization and glob matching used by retrieval."""

import fnmatch
import re
from functools import lru_cache
from urllib.parse import urlsplit

_NON_WORD = re.compile(r"[^0-9a-z\s]+")


def normalize_keywords(text, stop_tokens=()):
    """Lowercase, strip punctuation, split on whitespace and deduplicate.

    ``text`` may be a string or an iterable of strings (phrases); phrases are
    joined before tokenizing, so applying the function to its own output is a
    no-op.
    """
    if text is None:
        return frozenset()
    if not isinstance(text, str):
        text = " ".join(text)
    tokens = _NON_WORD.sub(" ", text.lower()).split()
    if stop_tokens:
        stop = set(stop_tokens)
        return frozenset(t for t in tokens if t not in stop)
    return frozenset(tokens)


@lru_cache(maxsize=8192)
def _phrase_set(phrase):
    return normalize_keywords(phrase)


def phrase_tokens(phrases):
    """Per-phrase token sets, skipping phrases that normalize to nothing."""
    out = []
    for p in phrases:
        toks = _phrase_set(p)
        if toks:
            out.append(toks)
    return out


@lru_cache(maxsize=4096)
def _body_tokens(text):
    return tuple(_NON_WORD.sub(" ", text.lower()).split())


def tokenize_body(text):
    """Ordered token sequence of a program body (same rules as keywords)."""
    return list(_body_tokens(text))


def body_token_spans(text):
    """(token, start, end) triples in source order, aligned with tokenize_body."""
    return [(m.group(0).lower(), m.start(), m.end())
            for m in re.finditer(r"[0-9A-Za-z]+", text)]


def url_matches(pattern, url):
    """Glob-match a URL; patterns starting with '/' are matched on the path."""
    if pattern in ("", "*"):
        return True
    target = url or ""
    if pattern.startswith("/") and "://" in target:
        target = urlsplit(target).path or "/"
    return fnmatch.fnmatchcase(target, pattern)
