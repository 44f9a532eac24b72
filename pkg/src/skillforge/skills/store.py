"""On-disk library layout (``rules/``, ``routines/``, ``demoted.md``, ``reflections.md``)
and the exclusive writer lock shared by concurrent workers."""

from __future__ import annotations

import contextlib
import fcntl
import os
import tempfile
from pathlib import Path

from ..errors import LibraryInvariantError, SkillFormatError
from .formats import (append_demotions, parse_demoted_log, parse_routine, parse_rule,
                      serialize_routine, serialize_rule)
from .types import SkillLibrary

LOCK_NAME = ".lock"


def _atomic_write(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def load_library(directory):
    """Read a library directory; a missing directory yields an empty library."""
    library, problems = scan_library(directory)
    if problems:
        raise problems[0][1]
    return library


def scan_library(directory):
    """Parse every file, collecting (path, error) pairs instead of stopping at the first."""
    root = Path(directory)
    problems = []
    rules, routines, blacklist, reflections = [], [], [], ""
    for sub, parser, sink in (("rules", parse_rule, rules), ("routines", parse_routine, routines)):
        folder = root / sub
        if not folder.is_dir():
            continue
        for path in sorted(folder.glob("*.md")):
            try:
                sink.append(parser(path.read_text(encoding="utf-8"), path=str(path)))
            except SkillFormatError as exc:
                problems.append((str(path), exc))
    demoted = root / "demoted.md"
    if demoted.exists():
        try:
            blacklist = parse_demoted_log(demoted.read_text(encoding="utf-8"), path=str(demoted))
        except SkillFormatError as exc:
            problems.append((str(demoted), exc))
    refl = root / "reflections.md"
    if refl.exists():
        reflections = refl.read_text(encoding="utf-8")

    seen = {}
    for skill in rules + routines:
        if skill.id in seen:
            problems.append((str(root), LibraryInvariantError(f"duplicate skill id {skill.id!r}")))
        seen[skill.id] = skill
    lib = SkillLibrary.__new__(SkillLibrary)
    object.__setattr__(lib, "rules", {r.id: r for r in rules})
    object.__setattr__(lib, "routines", {r.id: r for r in routines})
    object.__setattr__(lib, "blacklist", tuple(blacklist))
    object.__setattr__(lib, "reflections", reflections)
    for problem in lib.violations():
        problems.append((str(root), LibraryInvariantError(problem)))
    return lib, problems


def save_library(library, directory):
    """Write the library; routine/rule files are replaced, ``demoted.md`` only appended."""
    root = Path(directory)
    for sub in ("rules", "routines"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    for sub, skills, render in (("rules", library.rules, serialize_rule),
                                ("routines", library.routines, serialize_routine)):
        folder = root / sub
        for path in folder.glob("*.md"):
            if path.stem not in skills:
                path.unlink()
        for skill_id, skill in skills.items():
            path = folder / f"{skill_id}.md"
            text = render(skill)
            if not path.exists() or path.read_text(encoding="utf-8") != text:
                _atomic_write(path, text)

    demoted = root / "demoted.md"
    old_text = demoted.read_text(encoding="utf-8") if demoted.exists() else ""
    on_disk = parse_demoted_log(old_text, path=str(demoted)) if old_text else []
    if list(library.blacklist[:len(on_disk)]) != on_disk:
        raise LibraryInvariantError("blacklist on disk is not a prefix of the library blacklist")
    new_entries = library.blacklist[len(on_disk):]
    if new_entries or not demoted.exists():
        with open(demoted, "a", encoding="utf-8") as fh:
            fh.write(append_demotions(old_text, new_entries)[len(old_text):])
    if library.reflections:
        _atomic_write(root / "reflections.md", library.reflections)


@contextlib.contextmanager
def library_lock(directory):
    """Exclusive advisory lock on ``<directory>/.lock`` for library writers.

    One lock file guards the blacklist, routines and rules together, so the
    acquisition order of the three stores cannot deadlock.
    """
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / LOCK_NAME, "a+") as fh:
        fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh.fileno(), fcntl.LOCK_UN)
