"""Paired bootstrap confidence intervals and the exact McNemar test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInput, LengthMismatch


@dataclass(frozen=True)
class BootstrapResult:
    """Bootstrap summary in percent.  ``sr_a``/``sr_b``/``diff`` are resample
    means; ``observed_*`` are the plain sample values."""

    sr_a: float
    ci_a: tuple
    sr_b: float
    ci_b: tuple
    diff: float
    diff_ci: tuple
    observed_a: float
    observed_b: float
    iterations: int
    seed: int
    alpha: float

    @property
    def half_width(self):
        return (self.diff_ci[1] - self.diff_ci[0]) / 2

    def to_dict(self):
        return {"sr_a": self.sr_a, "ci_a": list(self.ci_a), "sr_b": self.sr_b,
                "ci_b": list(self.ci_b), "diff": self.diff, "diff_ci": list(self.diff_ci),
                "observed_a": self.observed_a, "observed_b": self.observed_b,
                "iterations": self.iterations, "seed": self.seed, "alpha": self.alpha}


def _paired(y_a, y_b):
    a = np.asarray(y_a, dtype=float)
    b = np.asarray(y_b, dtype=float)
    if a.ndim != 1 or a.shape != b.shape:
        raise LengthMismatch(f"verdict vectors differ in shape: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise EmptyInput("verdict vectors are empty")
    return a, b


def paired_bootstrap(y_a, y_b, iterations=1000, seed=7, alpha=0.05):
    """Resample task indices with replacement and score both methods on each draw.

    One PCG64 generator drives all draws, one ``integers(0, n, size=n)`` call
    per iteration, so a given (inputs, iterations, seed) always gives the same
    intervals.
    """
    a, b = _paired(y_a, y_b)
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    n = a.size
    rng = np.random.default_rng(seed)
    sr_a = np.empty(iterations)
    sr_b = np.empty(iterations)
    for i in range(iterations):
        idx = rng.integers(0, n, size=n)
        sr_a[i] = a[idx].mean()
        sr_b[i] = b[idx].mean()
    diff = sr_a - sr_b
    q = [100 * alpha / 2, 100 * (1 - alpha / 2)]

    def ci(v):
        lo, hi = np.percentile(100 * v, q)
        return (float(lo), float(hi))

    return BootstrapResult(
        sr_a=float(100 * sr_a.mean()), ci_a=ci(sr_a),
        sr_b=float(100 * sr_b.mean()), ci_b=ci(sr_b),
        diff=float(100 * diff.mean()), diff_ci=ci(diff),
        observed_a=float(100 * a.mean()), observed_b=float(100 * b.mean()),
        iterations=iterations, seed=seed, alpha=alpha,
    )


def discordant_counts(y_a, y_b):
    a, b = _paired(y_a, y_b)
    wins_a = int(np.sum((a == 1) & (b == 0)))
    wins_b = int(np.sum((a == 0) & (b == 1)))
    return wins_a, wins_b


def mcnemar_exact(b, c):
    """Two-sided exact binomial test on discordant counts; 1.0 when b + c = 0."""
    n = b + c
    if n == 0:
        return 1.0
    k = min(b, c)
    tail = sum(math.comb(n, i) for i in range(k + 1)) / 2 ** n
    return min(1.0, 2 * tail)


def mcnemar(y_a, y_b):
    return mcnemar_exact(*discordant_counts(y_a, y_b))
