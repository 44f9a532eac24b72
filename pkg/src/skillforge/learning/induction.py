"""Turn verified, successful subgoal segments into routine candidates."""

from __future__ import annotations

import json
import re

from ..ledger import KEYBOARD_ACTIONS
from ..skills.keywords import normalize_keywords
from .config import RoutineCandidate

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_SAFE_LITERAL = re.compile(r'^[^"\\\n\r]*$')


def slugify(name):
    return re.sub(r"[^0-9a-z]+", "_", name.lower()).strip("_")


def url_glob_for(url, domain=""):
    """``/<first path segment>/*`` of the segment URL, falling back to the domain."""
    path = url.split("://", 1)[-1]
    if "://" in url:
        path = "/" + path.split("/", 1)[1] if "/" in path else "/"
    head = [p for p in path.split("/") if p][:1]
    if head:
        return f"/{head[0]}/*"
    return f"/{domain}/*" if domain else "*"


def render_body(actions):
    """Program text for a list of (name, target, key_or_text) actions.

    Typed text is lifted into parameters (``text``, ``text_2``, ...) so the
    routine generalizes over queries; click targets stay literal.  Returns
    ``(body, params)`` or None when an action cannot be rendered safely.
    """
    lines, params = [], []
    for name, target, text in actions:
        if not _IDENT.match(name or "") or not _SAFE_LITERAL.match(target or ""):
            return None
        args = [json.dumps(target)] if target else []
        if name in KEYBOARD_ACTIONS:
            if not text:
                return None
            pname = "text" if not params else f"text_{len(params) + 1}"
            params.append(pname)
            args.append(pname)
        elif text:
            if not _SAFE_LITERAL.match(text):
                return None
            args.append(json.dumps(text))
        lines.append(f"    {name}({', '.join(args)})")
    signature = ", ".join(f"{p}: str" for p in params)
    return "def run(" + signature + ") -> None:\n" + "\n".join(lines), tuple(params)


def induce(view, library=None):
    """Candidates from a trajectory; empty unless the task succeeded.

    A segment qualifies when it was solved by the Actor (no routine served it),
    used at least two primitive actions, and the Reflector verified it.
    """
    if not view.succeeded:
        return []
    out = []
    seen = set()
    for seg in view.segments:
        if seg.routine_id or len(seg.actions) < 2 or not seg.verified or not seg.passed:
            continue
        if not normalize_keywords(seg.phrases):
            continue
        rendered = render_body(seg.actions)
        if rendered is None:
            continue
        cid = slugify(seg.name)
        if not cid or cid in seen:
            continue
        seen.add(cid)
        body, params = rendered
        out.append(RoutineCandidate(
            proposed_id=cid,
            trigger_phrases=tuple(seg.phrases),
            body=body,
            params=params,
            source_task=view.task_id,
            subgoal_template=seg.name,
            url_glob=url_glob_for(seg.url, seg.domain or view.domain),
        ))
    return out
