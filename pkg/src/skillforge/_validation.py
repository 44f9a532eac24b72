"""Argument checks shared by the estimator wrappers and the CLI."""

from __future__ import annotations

import numpy as np

from .errors import EmptyInput, LengthMismatch
from .ledger import LedgerEvent, TaskTrajectoryView, read_tasks


def check_verdicts(y, name="y"):
    """A 1-D array of 0/1 task verdicts."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise EmptyInput(f"{name} is empty")
    if arr.dtype == bool:
        return arr.astype(int)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 verdicts")
    return arr.astype(int)


def check_paired(y_a, y_b):
    a, b = check_verdicts(y_a, "y_a"), check_verdicts(y_b, "y_b")
    if a.shape != b.shape:
        raise LengthMismatch(f"verdict vectors differ in length: {a.size} vs {b.size}")
    return a, b


def check_boundaries(boundaries, n_tasks=None):
    """Strictly increasing positive block ends; the last must equal ``n_tasks`` if given."""
    if boundaries is None:
        return None
    ends = [int(b) for b in boundaries]
    if not ends or ends[0] < 1 or any(b <= a for a, b in zip(ends, ends[1:])):
        raise ValueError(f"block ends {list(boundaries)} must be positive and increasing")
    if n_tasks is not None and ends[-1] != n_tasks:
        raise ValueError(f"last block end {ends[-1]} does not match {n_tasks} tasks")
    return ends


def check_tasks(X):
    """Task views from views, ledger rows, or a mix-free list of either."""
    items = list(X)
    if not items:
        raise EmptyInput("no tasks given")
    if all(isinstance(x, TaskTrajectoryView) for x in items):
        return items
    if all(isinstance(x, LedgerEvent) for x in items):
        return read_tasks(items)
    raise TypeError("expected task views or ledger rows")
