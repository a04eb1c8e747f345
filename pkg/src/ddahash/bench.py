"""Repeated wall-clock timing with Student-t confidence intervals."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InvalidArgumentError

DEFAULT_RUNS = 20


@dataclass(frozen=True)
class Timing:
    name: str
    samples: tuple  # seconds per run

    @property
    def runs(self) -> int:
        return len(self.samples)

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples))

    def ci(self, confidence: float = 0.95) -> tuple[float, float]:
        return mean_ci(self.samples, confidence)[1:]

    def summary(self, confidence: float = 0.95) -> str:
        lo, hi = self.ci(confidence)
        return (
            f"{self.name}: mean {self.mean * 1e3:.4f} ms "
            f"({confidence:.0%} CI {lo * 1e3:.4f}..{hi * 1e3:.4f} ms, n={self.runs})"
        )


def mean_ci(samples, confidence: float = 0.95):
    """``(mean, low, high)`` of a two-sided Student-t interval."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise InvalidArgumentError("a confidence interval needs at least 2 samples")
    if not 0.0 < confidence < 1.0:
        raise InvalidArgumentError("confidence must be in (0, 1)")
    m = float(x.mean())
    half = float(stats.t.ppf(0.5 + confidence / 2, x.size - 1) * x.std(ddof=1) / np.sqrt(x.size))
    return m, m - half, m + half


def time_runs(name: str, fn, runs: int = DEFAULT_RUNS, warmup: int = 1) -> Timing:
    """Call ``fn()`` ``runs`` times after ``warmup`` untimed calls."""
    if runs < 2:
        raise InvalidArgumentError(f"need at least 2 runs, got {runs}")
    for _ in range(warmup):
        fn()
    out = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return Timing(name, tuple(out))


def speedup(baseline: Timing, candidate: Timing) -> float:
    """How many times faster ``candidate`` is than ``baseline`` (ratio of means)."""
    return baseline.mean / candidate.mean
