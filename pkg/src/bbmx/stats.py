"""Distribution comparison and estimation utilities for the verification suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Callable, Sequence

import numpy as np

from .rng import StreamKey


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted sample with its empirical CDF."""

    samples: np.ndarray

    def __init__(self, samples: Sequence[float] | np.ndarray) -> None:
        arr = np.sort(np.asarray(samples, dtype=np.float64))
        if arr.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", arr)

    @property
    def n(self) -> int:
        return int(self.samples.size)

    def cdf(self, x: np.ndarray | float) -> np.ndarray | float:
        return np.searchsorted(self.samples, x, side="right") / self.n


@dataclass(frozen=True)
class ComparisonReport:
    """One verification check: a statistic against its threshold."""

    name: str
    value: float
    threshold: float
    passed: bool
    n_a: int = 0
    n_b: int = 0
    stderr: float = float("nan")
    detail: str = ""

    def row(self) -> dict:
        return asdict(self)


def check_leq(
    name: str, value: float, threshold: float, n_a: int = 0, n_b: int = 0,
    stderr: float = float("nan"), detail: str = "",
) -> ComparisonReport:
    return ComparisonReport(
        name=name, value=float(value), threshold=float(threshold),
        passed=bool(value <= threshold), n_a=n_a, n_b=n_b, stderr=stderr, detail=detail,
    )


def ks_distance(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """Two-sample Kolmogorov-Smirnov statistic via a merge scan."""
    grid = np.concatenate([a.samples, b.samples])
    return float(np.max(np.abs(a.cdf(grid) - b.cdf(grid))))


def empirical_laplace(samples, lam: float) -> tuple[float, float]:
    """Sample mean and stderr of exp(-lam * x)."""
    if lam <= 0:
        raise ValueError("Laplace argument must be positive")
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("need samples")
    if arr.min() < -700.0 / lam:
        raise OverflowError(
            f"sample {arr.min():.3g} would overflow exp at lam={lam}"
        )
    vals = np.exp(-lam * arr)
    se = float(vals.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return float(vals.mean()), se


def tail_slope(samples, u_lo: float, u_hi: float, n_points: int = 20) -> float:
    """Least-squares slope of -log(survival) over [u_lo, u_hi].

    Fits the exponential tail rate; requires at least 50 samples above u_lo
    and distinct survival values across the window.
    """
    if u_hi <= u_lo:
        raise ValueError("need u_lo < u_hi")
    if n_points < 2:
        raise ValueError("need at least 2 fit points")
    arr = np.sort(np.asarray(samples, dtype=np.float64))
    n_exceed = int(arr.size - np.searchsorted(arr, u_lo, side="right"))
    if n_exceed < 50:
        raise ValueError(f"only {n_exceed} samples exceed u_lo={u_lo}; need >= 50")
    us = np.linspace(u_lo, u_hi, n_points)
    surv = 1.0 - np.searchsorted(arr, us, side="right") / arr.size
    keep = surv > 0
    us, surv = us[keep], surv[keep]
    if us.size < 2 or np.allclose(surv, surv[0]):
        raise ValueError("no tail variation over the requested window")
    y = -np.log(surv)
    slope = float(np.polyfit(us, y, 1)[0])
    return slope


def median_center(samples) -> np.ndarray:
    """Shift samples so the (lower) median is zero."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("need samples")
    srt = np.sort(arr)
    med = srt[(arr.size - 1) // 2]  # lower median for even sizes
    return arr - med


def bootstrap_ci(
    samples,
    statistic: Callable[[np.ndarray], float],
    n_boot: int,
    level: float,
    key: StreamKey,
) -> tuple[float, float]:
    """Percentile bootstrap confidence interval, deterministic given the key."""
    if n_boot < 200:
        raise ValueError("need at least 200 bootstrap resamples")
    if not (0.0 < level < 1.0):
        raise ValueError("level must be in (0, 1)")
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("need samples")
    rng = key.generator()
    stats = np.empty(n_boot)
    for b in range(n_boot):
        stats[b] = statistic(arr[rng.integers(0, arr.size, arr.size)])
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(stats, [alpha, 1.0 - alpha])
    return float(lo), float(hi)
