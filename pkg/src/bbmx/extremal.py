"""Limiting point processes and the spectrally positive stable-1 law.

Exponential-intensity Poisson point processes (the law of the extreme local
maxima), decorated superpositions, restricted cluster masses, and a sampler
for the stable law with Laplace transform exp(t * lam * log(lam)) built as a
compensated Poisson integral over the jump measure t z^-2 dz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .paths import SQRT2
from .rng import StreamKey

EULER_GAMMA = float(np.euler_gamma)

# Compensation threshold for which the linear term of the compensated
# Laplace exponent vanishes, so the sampler's law is exactly the canonical
# exp(t * lam * log(lam)) as the truncation window widens.
CANONICAL_RHO = math.exp(1.0 - EULER_GAMMA)


class InfiniteIntensityError(ValueError):
    """Raised for point-process windows with infinite intensity mass."""


@dataclass(frozen=True)
class PointMeasure:
    """Finite point measure on the real line, atoms sorted descending."""

    atoms: np.ndarray

    def __init__(self, atoms: Sequence[float] | np.ndarray) -> None:
        arr = np.sort(np.asarray(atoms, dtype=np.float64))[::-1].copy()
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("atoms must be finite")
        object.__setattr__(self, "atoms", arr)

    def __len__(self) -> int:
        return int(self.atoms.size)

    def count_at_least(self, x: float) -> int:
        """Number of atoms >= x."""
        return int(np.sum(self.atoms >= x))

    def shifted(self, c: float) -> "PointMeasure":
        return PointMeasure(self.atoms + c)


@dataclass(frozen=True)
class DecoratedPointMeasure:
    """Pairs (tip, cluster); clusters live on (-inf, 0] with max atom 0."""

    pairs: tuple[tuple[float, PointMeasure], ...]

    def __init__(self, pairs: Sequence[tuple[float, PointMeasure]]) -> None:
        ordered = tuple(sorted(pairs, key=lambda p: -p[0]))
        for tip, cluster in ordered:
            if len(cluster) == 0:
                raise ValueError("clusters must contain their own maximum (atom 0)")
            if cluster.atoms[0] != 0.0 or np.any(cluster.atoms > 0.0):
                raise ValueError("cluster atoms must be <= 0 with max atom exactly 0")
            if not np.isfinite(tip):
                raise ValueError("tips must be finite")
        object.__setattr__(self, "pairs", ordered)

    def __len__(self) -> int:
        return len(self.pairs)

    def tips(self) -> np.ndarray:
        return np.array([tip for tip, _ in self.pairs])

    def flattened(self) -> PointMeasure:
        """Superposition: every cluster translated to its tip."""
        if not self.pairs:
            return PointMeasure([])
        return PointMeasure(
            np.concatenate([cluster.atoms + tip for tip, cluster in self.pairs])
        )


@dataclass(frozen=True)
class Window:
    """Interval [lower, upper]; either side may be infinite."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("window bounds must not be NaN")
        if self.lower > self.upper:
            raise ValueError("window lower bound exceeds upper bound")

    def contains(self, x: np.ndarray | float):
        return (x >= self.lower) & (x <= self.upper)


def _exp_intensity_mass(rate: float, window: Window) -> float:
    """Mass of rate * exp(-sqrt(2) u) du over the window."""
    lo, hi = window.lower, window.upper
    upper_term = 0.0 if math.isinf(hi) else math.exp(-SQRT2 * hi)
    return rate / SQRT2 * (math.exp(-SQRT2 * lo) - upper_term)


def _exp_ppp_atoms(rate: float, window: Window, rng: np.random.Generator) -> np.ndarray:
    if math.isinf(window.lower):
        raise InfiniteIntensityError("window with lower = -inf has infinite mass")
    mass = _exp_intensity_mass(rate, window)
    n = rng.poisson(mass)
    if n == 0:
        return np.empty(0)
    lo, hi = window.lower, window.upper
    s_lo = math.exp(-SQRT2 * lo)
    s_hi = 0.0 if math.isinf(hi) else math.exp(-SQRT2 * hi)
    u = rng.uniform(0.0, 1.0, n)
    return -np.log(s_lo - u * (s_lo - s_hi)) / SQRT2


def sample_exp_ppp(z: float, window: Window, key: StreamKey) -> PointMeasure:
    """PPP with intensity z * exp(-sqrt(2) u) du restricted to ``window``."""
    if z < 0:
        raise ValueError("intensity prefactor must be nonnegative")
    if z == 0.0:
        return PointMeasure([])
    return PointMeasure(_exp_ppp_atoms(z, window, key.generator()))


def recentered_tip_ppp(u: float, window: Window, key: StreamKey) -> PointMeasure:
    """PPP with intensity u * exp(-sqrt(2) x) dx (tips recentered about the level)."""
    if u <= 1.0:
        raise ValueError("level parameter must exceed 1")
    if math.isinf(window.lower):
        raise InfiniteIntensityError("window with lower = -inf has infinite mass")
    return PointMeasure(_exp_ppp_atoms(u, window, key.generator()))


def assemble_limit_process(
    tips: PointMeasure, clusters: Sequence[PointMeasure]
) -> DecoratedPointMeasure:
    """Pair descending tips with clusters, in order."""
    if len(clusters) != len(tips):
        raise ValueError(
            f"need one cluster per tip, got {len(clusters)} clusters for {len(tips)} tips"
        )
    return DecoratedPointMeasure(list(zip(tips.atoms.tolist(), clusters)))


def restricted_mass(process: DecoratedPointMeasure, v: float, window: Window) -> int:
    """Mass on [-v, inf) contributed by clusters whose tip lies in ``window``."""
    total = 0
    for tip, cluster in process.pairs:
        if window.contains(tip):
            total += cluster.count_at_least(-v - tip)
    return total


def stable1_laplace(t: float, lam: float) -> float:
    """Laplace transform exp(t * lam * log(lam)) of the stable-1 variable."""
    if t <= 0:
        raise ValueError("scale must be positive")
    if lam <= 0:
        raise ValueError("Laplace argument must be positive")
    return math.exp(t * lam * math.log(lam))


@dataclass(frozen=True)
class StableSamplerConfig:
    """Truncated compensated-Poisson construction of the stable-1 law.

    Jumps follow a PPP with intensity scale * z^-2 dz on [z_min, z_max]; the
    compensator subtracts scale * log(rho / z_min).  With the default
    rho = exp(1 - euler_gamma) the linear term of the Laplace exponent
    vanishes and the law converges to exp(scale * lam * log(lam)) as
    z_min -> 0, z_max -> inf.
    """

    scale: float = 1.0
    rho: float = CANONICAL_RHO
    z_min: float = 2e-3
    z_max: float = 1e6

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if not (0.0 < self.z_min < self.rho < self.z_max):
            raise ValueError("need 0 < z_min < rho < z_max")

    @property
    def jump_mass(self) -> float:
        return self.scale * (1.0 / self.z_min - 1.0 / self.z_max)


def stable1_compensator(config: StableSamplerConfig) -> float:
    """Deterministic compensation term scale * log(rho / z_min)."""
    return config.scale * math.log(config.rho / config.z_min)


def stable1_truncation_bound(config: StableSamplerConfig, lam: float) -> float:
    """Bound on |E exp(-lam R) - exp(scale lam log lam)| from the z-truncation.

    Small jumps below z_min contribute at most scale * lam^2 * z_min / 2 to
    the Laplace exponent; jumps above z_max are missing with total intensity
    scale / z_max.
    """
    if lam <= 0:
        raise ValueError("Laplace argument must be positive")
    target = stable1_laplace(config.scale, lam)
    exponent_gap = config.scale * lam * lam * config.z_min / 2.0
    return target * (math.expm1(exponent_gap) + config.scale / config.z_max)


def stable1_jump_sums(
    config: StableSamplerConfig,
    key: StreamKey,
    size: int,
    max_chunk_jumps: int = 20_000_000,
) -> np.ndarray:
    """Raw per-sample sums of the truncated jump process (no compensation).

    The draw sequence depends only on (scale, z_min, z_max, key) and not on
    rho, so configs differing only in rho share these sums bitwise.
    """
    rng = key.generator()
    mass = config.jump_mass
    inv_lo = 1.0 / config.z_min
    inv_hi = 1.0 / config.z_max
    out = np.empty(size)
    chunk = max(1, int(max_chunk_jumps / max(mass, 1.0)))
    done = 0
    while done < size:
        m = min(chunk, size - done)
        counts = rng.poisson(mass, m)
        total = int(counts.sum())
        u = rng.uniform(0.0, 1.0, total)
        jumps = 1.0 / (inv_lo - u * (inv_lo - inv_hi))
        idx = np.repeat(np.arange(m), counts)
        out[done : done + m] = np.bincount(idx, weights=jumps, minlength=m)
        done += m
    return out


def stable1_sample(
    config: StableSamplerConfig,
    key: StreamKey,
    size: int | None = None,
) -> float | np.ndarray:
    """Draw from the truncated compensated stable-1 construction.

    Replacing rho by k*rho changes each sample by exactly the deterministic
    compensator difference scale * log(k) (the jump sums are shared bitwise).
    """
    sums = stable1_jump_sums(config, key, 1 if size is None else int(size))
    out = sums - stable1_compensator(config)
    if size is None:
        return float(out[0])
    return out


ClusterMassSampler = Callable[[float, np.random.Generator], float]
"""Draws one cluster level-set mass C([-level, 0]) given the level."""


def compensation_level(u: float, x: float) -> float:
    """Cluster window depth w_u(x) = u - log(u)/sqrt(2) + x for a tip offset x."""
    return u - math.log(u) / SQRT2 + x


def estimate_compensator(
    u: float,
    x_minus: float,
    x_plus: float,
    rho: float,
    cluster_source: ClusterMassSampler,
    n_comp: int,
    key: StreamKey,
) -> tuple[float, float]:
    """Plug-in estimate of the truncated-mean compensator over the tip window.

    Integrates E[zeta ; zeta <= rho] against the tip intensity
    u exp(-sqrt(2) x) dx on [x_minus, x_plus], where
    zeta = exp(-sqrt(2) u) * C([-w_u(x), 0]); the x-positions are drawn from
    the normalized intensity so the integral is mass * mean.
    """
    if n_comp < 1:
        raise ValueError("need at least one compensator draw")
    rng = key.generator(1)  # distinct sub-stream from the statistic draw
    window = Window(x_minus, x_plus)
    mass = _exp_intensity_mass(u, window)
    s_lo = math.exp(-SQRT2 * x_minus)
    s_hi = math.exp(-SQRT2 * x_plus)
    xs = -np.log(s_lo - rng.uniform(0.0, 1.0, n_comp) * (s_lo - s_hi)) / SQRT2
    scale = math.exp(-SQRT2 * u)
    zeta = np.array([scale * cluster_source(compensation_level(u, x), rng) for x in xs])
    vals = zeta * (zeta <= rho)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_comp)) if n_comp > 1 else float("inf")
    return mass * mean, mass * se


def compensated_mass_statistic(
    u: float,
    x_minus: float,
    x_plus: float,
    rho: float,
    cluster_source: ClusterMassSampler,
    n_comp: int,
    key: StreamKey,
    compensator: float | None = None,
) -> float:
    """One draw of the compensated extremal mass near the critical tip level.

    Tips fall as a PPP with intensity u exp(-sqrt(2) x) dx on
    [x_minus, x_plus]; each tip at offset x contributes an independent cluster
    mass C([-w_u(x), 0]); the normalized total exp(-sqrt(2) u) * sum is then
    reduced by the truncated-mean compensator (estimated from ``n_comp``
    draws unless supplied).
    """
    if u <= math.e:
        raise ValueError("level u must exceed e")
    if not (x_minus < 0.0 < x_plus):
        raise ValueError("tip window must straddle 0")
    if rho <= 0:
        raise ValueError("compensation threshold must be positive")
    if compensator is None:
        comp, _ = estimate_compensator(u, x_minus, x_plus, rho, cluster_source, n_comp, key)
    else:
        comp = compensator
    rng = key.generator()
    atoms = _exp_ppp_atoms(u, Window(x_minus, x_plus), rng)
    scale = math.exp(-SQRT2 * u)
    total = sum(cluster_source(compensation_level(u, x), rng) for x in atoms)
    return scale * total - comp
