"""Sampling from the cluster law: backbone, timestamps, decorations.

A cluster draw integrates decoration masses along a backbone at rate-2
Poisson timestamps.  The backbone is the negative of a Bessel-3 process from
0 minus the logarithmic curve (3/(2 sqrt 2)) log+ s.  Decorations are either
exact (a conditioned BBM per event, feasible only for small event times) or
surrogate: the critical level-set approximation
``c0 * Z * a * exp(sqrt(2) a - a^2 / (2 s))`` with ``a = v + W(s)`` and ``Z``
resampled from an empirical bank of derivative-martingale values.

Two regimes of the same law are sampled differently:

* Bulk (typical masses, the log-mass fluctuation law): backbone as above;
  up-crossings of the backbone toward 0 are irrelevant at this scale.
* Tail (unusually large masses, the intensity-measure estimates): mass comes
  from rare returns of the backbone to O(1) below the tip at time scale
  s ~ v^2, with density ~ s^(-3/2).  With ``up_excursions=True`` these
  returns are injected as a Poisson sprinkle of local excursions, each
  anchored at an event with peak-height density (1 + w^-)^2 below a soft
  barrier.  Decorations near the barrier are Z-reweighted by the ceiling
  factor exp(-kappa Z e^{sqrt2 W}), the probability that a decoration of
  mass scale Z keeps its maximum below the backbone ceiling; in the bulk the
  factor is 1 and the reweighting is a no-op.

Intensity estimates use a horizon proportional to v^2, so the captured
fraction of the up-return intensity is the same at every window depth and
estimates at different v are directly comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bbm import PruneConfig, centering, conditioned_bbm, derivative_martingale, simulate
from .paths import Bessel3Path, SQRT2, SamplePath, TimeGrid, backbone_curve
from .rng import StreamKey

# Tail-regime conventions: up-return rate constant, peak-height support,
# ceiling-conditioning strength, local excursion half-width.  Absolute
# intensity constants are not identifiable from the verified statistics
# (which are ratios across window depths), so these are fixed once here.
UP_RATE = 6.0
PEAK_LO = -6.0
PEAK_HI = 0.75
KAPPA = 0.25
LOCAL_HALFWIDTH = 10.0
_S_EXC_MIN = 1.0
_SKIP_LOG = -16.0
_BULK_HORIZON_FACTOR = 8.0


@dataclass(frozen=True)
class TimestampProcess:
    """Ascending event times on [0, horizon]."""

    events: np.ndarray
    horizon: float

    def __post_init__(self) -> None:
        ev = np.asarray(self.events, dtype=np.float64)
        if ev.size and (ev.min() < 0.0 or ev.max() > self.horizon):
            raise ValueError("events must lie in [0, horizon]")
        if np.any(np.diff(ev) < 0):
            raise ValueError("events must be ascending")
        object.__setattr__(self, "events", ev)

    def __len__(self) -> int:
        return int(self.events.size)


def sample_timestamps(horizon: float, key: StreamKey) -> TimestampProcess:
    """Homogeneous rate-2 Poisson process on [0, horizon]."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    rng = key.generator()
    n = rng.poisson(2.0 * horizon)
    return TimestampProcess(np.sort(rng.uniform(0.0, horizon, n)), horizon)


@dataclass(frozen=True)
class ZBank:
    """Empirical bank of derivative-martingale values for decoration draws.

    ``values`` holds the positive simulated values divided by their mean, so
    the bank mean is 1; ``mean_positive`` restores the raw scale.
    """

    values: np.ndarray
    source_t: float
    source_seed: int
    c_diamond: float
    n_runs: int
    mean_positive: float
    n_nonpositive: int = 0

    def __post_init__(self) -> None:
        vals = np.sort(np.asarray(self.values, dtype=np.float64))
        if vals.size == 0 or vals[0] <= 0:
            raise ValueError("bank must contain positive values only")
        object.__setattr__(self, "values", vals)

    @property
    def z_max(self) -> float:
        return float(self.values[-1])

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.values[rng.integers(0, self.values.size, n)]

    def save_csv(self, path: str | Path) -> None:
        head = (
            f"# z-bank t={self.source_t!r} seed={self.source_seed} "
            f"c_diamond={self.c_diamond!r} n_runs={self.n_runs} "
            f"mean_positive={self.mean_positive!r} n_nonpositive={self.n_nonpositive}\n"
            "z\n"
        )
        body = "\n".join(repr(v) for v in self.values)
        Path(path).write_text(head + body + "\n")

    @classmethod
    def load_csv(cls, path: str | Path) -> "ZBank":
        lines = Path(path).read_text().strip().splitlines()
        meta: dict[str, str] = {}
        for tok in lines[0].lstrip("# ").split():
            k, _, val = tok.partition("=")
            meta[k] = val
        values = np.array([float(x) for x in lines[2:]])
        return cls(
            values=values,
            source_t=float(meta["t"]),
            source_seed=int(meta["seed"]),
            c_diamond=float(meta["c_diamond"]),
            n_runs=int(meta["n_runs"]),
            mean_positive=float(meta["mean_positive"]),
            n_nonpositive=int(meta.get("n_nonpositive", 0)),
        )


def build_z_bank(
    n_runs: int,
    t: float,
    key: StreamKey,
    prune: PruneConfig | None = None,
    c_diamond: float = 1.0,
) -> ZBank:
    """Simulate BBMs and bank the positive derivative-martingale values."""
    zs = np.empty(n_runs)
    for i in range(n_runs):
        system = simulate(t, prune, key.replica(i))
        zs[i] = derivative_martingale(system, c_diamond)
    pos = zs[zs > 0]
    if pos.size == 0:
        raise RuntimeError("no positive martingale values; increase t or n_runs")
    return ZBank(
        values=pos / pos.mean(),
        source_t=t,
        source_seed=key.seed,
        c_diamond=c_diamond,
        n_runs=n_runs,
        mean_positive=float(pos.mean()),
        n_nonpositive=int(np.sum(zs <= 0)),
    )


def calibrate_c0(level_ratios: np.ndarray, z_normalized: np.ndarray) -> tuple[float, float]:
    """Through-origin regression of level-set ratios on bank-normalized Z.

    ``level_ratios`` are counts / (v exp(sqrt2 v - v^2/2t)); ``z_normalized``
    are martingale values divided by the bank's positive mean.  Returns
    (slope, stderr).
    """
    r = np.asarray(level_ratios, dtype=np.float64)
    z = np.asarray(z_normalized, dtype=np.float64)
    if r.shape != z.shape or r.size < 10:
        raise ValueError("need matched arrays with at least 10 pairs")
    denom = float(np.sum(z * z))
    slope = float(np.sum(r * z)) / denom
    resid = r - slope * z
    var = float(np.sum(resid * resid * z * z)) / denom**2
    return slope, math.sqrt(var)


@dataclass(frozen=True)
class ClusterModel:
    """Calibrated constants and the Z bank behind the surrogate decoration."""

    c0: float
    z_bank: ZBank
    c0_stderr: float = float("nan")
    kappa: float = KAPPA
    up_rate: float = UP_RATE
    peak_lo: float = PEAK_LO
    peak_hi: float = PEAK_HI
    local_halfwidth: float = LOCAL_HALFWIDTH

    def __post_init__(self) -> None:
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")


def typical_horizon(v: float) -> float:
    """Default integration horizon for bulk statistics."""
    return max(4.0 * v ** (4.0 / 3.0), 100.0)


def tail_horizon(v: float) -> float:
    """Integration horizon for intensity (tail) statistics: 3 v^2."""
    return max(3.0 * v * v, typical_horizon(v))


@dataclass(frozen=True)
class ClusterDiagnostics:
    s_cut: float
    horizon: float
    bulk_horizon: float
    truncation_bound: float
    regime_warnings: int
    exact_events: int
    exact_attempts: int
    up_excursion_count: int


@dataclass(frozen=True)
class ClusterSample:
    """One draw of the cluster level-set mass C([-v, 0])."""

    mode: str
    v: float
    mass: float
    backbone: SamplePath
    timestamps: TimestampProcess
    contributions: np.ndarray
    diagnostics: ClusterDiagnostics


def _draw_peaks(rng, n: int, lo: float, hi: float) -> np.ndarray:
    """Peak heights with density (1 + w^-)^2 on [lo, 0] and flat on [0, hi]."""
    m_neg = ((1.0 - lo) ** 3 - 1.0) / 3.0
    u = rng.uniform(0.0, m_neg + hi, n)
    neg = u < m_neg
    out = np.empty(n)
    out[neg] = 1.0 - (1.0 + 3.0 * (m_neg - u[neg])) ** (1.0 / 3.0)
    out[~neg] = u[~neg] - m_neg
    return out


def _bessel3_from0_at(times: np.ndarray, rng) -> np.ndarray:
    """Bessel-3 from 0 at ascending positive times (norm of 3-d BM)."""
    if times.size == 0:
        return np.empty(0)
    dt = np.empty_like(times)
    dt[0] = times[0]
    dt[1:] = np.diff(times)
    steps = rng.standard_normal((3, times.size)) * np.sqrt(dt)
    cum = np.cumsum(steps, axis=1)
    return np.sqrt(np.sum(cum * cum, axis=0))


def _conditioned_bank_draw(
    rng, bank: np.ndarray, ceil_factor: np.ndarray, max_rounds: int = 500
) -> np.ndarray:
    """Bank draws reweighted by exp(-z * ceil_factor), via rejection."""
    z = np.empty(ceil_factor.size)
    todo = np.arange(ceil_factor.size)
    for _ in range(max_rounds):
        cand = bank[rng.integers(0, bank.size, todo.size)]
        acc = rng.uniform(0.0, 1.0, todo.size) < np.exp(-cand * ceil_factor[todo])
        z[todo[acc]] = cand[acc]
        todo = todo[~acc]
        if todo.size == 0:
            break
    if todo.size:
        z[todo] = bank[0]
    return z


def _sprinkle_events(
    rng, v: float, horizon: float, model: ClusterModel, z_max: float
) -> tuple[np.ndarray, np.ndarray, int]:
    """Up-excursion events: absolute times, backbone heights, excursion count.

    Excursion times follow a PPP with intensity 2 * up_rate * s^(-3/2) on
    [_S_EXC_MIN, horizon]; each carries an anchor event at its peak plus
    rate-2 events in a local window, at height peak - Bessel3(|u|).
    Excursions whose best-case contribution is negligible are skipped before
    their local paths are drawn.
    """
    lam = 4.0 * model.up_rate * (_S_EXC_MIN**-0.5 - horizon**-0.5)
    n_draw = rng.poisson(lam)
    if n_draw == 0:
        return np.empty(0), np.empty(0), 0
    uu = rng.uniform(0.0, 1.0, n_draw)
    inv = _S_EXC_MIN**-0.5 - uu * (_S_EXC_MIN**-0.5 - horizon**-0.5)
    s_exc = inv**-2.0
    peaks = _draw_peaks(rng, n_draw, model.peak_lo, model.peak_hi)
    a = v + peaks
    width = 2.0 + 4.0 * model.local_halfwidth
    with np.errstate(divide="ignore"):
        bound = (
            SQRT2 * a
            - a * a / (2.0 * (s_exc + model.local_halfwidth))
            + np.log(np.maximum(model.c0 * z_max * width * a, 1e-300))
            - (SQRT2 * v + math.log(v))
        )
    keep = (bound > _SKIP_LOG) & (a > 0.0)
    s_exc, peaks = s_exc[keep], peaks[keep]
    times_parts: list[np.ndarray] = []
    heights_parts: list[np.ndarray] = []
    for se, pk in zip(s_exc, peaks):
        n_loc = rng.poisson(4.0 * model.local_halfwidth)
        u_loc = np.sort(rng.uniform(-model.local_halfwidth, model.local_halfwidth, n_loc))
        left = -u_loc[u_loc < 0.0][::-1]
        right = u_loc[u_loc > 0.0]
        y = np.empty(u_loc.size)
        y[: left.size] = _bessel3_from0_at(left, rng)[::-1]
        y[left.size :] = _bessel3_from0_at(right, rng)
        t_abs = np.concatenate([se + u_loc, [se]])
        h_abs = np.concatenate([pk - y, [pk]])
        ok = (t_abs > 0.0) & (t_abs <= horizon)
        times_parts.append(t_abs[ok])
        heights_parts.append(h_abs[ok])
    if not times_parts:
        return np.empty(0), np.empty(0), 0
    return np.concatenate(times_parts), np.concatenate(heights_parts), int(s_exc.size)


def _truncation_bound(v: float, horizon: float, model: ClusterModel) -> float:
    """Heuristic bound on the mean surrogate mass beyond the horizon.

    Integrates the surrogate mean along the median backbone envelope
    -sqrt(s) - curve, plus the missing up-return intensity (s^(-3/2) tail)
    times the mean per-return contribution.
    """
    s = np.geomspace(horizon, 16.0 * horizon, 64)
    a = v - np.sqrt(s) - backbone_curve(s)
    bulk = float(
        np.trapezoid(
            2.0 * model.c0 * np.maximum(a, 0.0) * np.exp(SQRT2 * a - a * a / (2.0 * s)), s
        )
    )
    per_return = (
        model.c0 * math.exp(SQRT2 * model.peak_hi) * (2.0 + 4.0 * model.local_halfwidth)
    )
    tail = 4.0 * model.up_rate * horizon**-0.5 * per_return
    return bulk + tail


def sample_cluster(
    v: float,
    key: StreamKey,
    *,
    horizon: float | None = None,
    mode: str = "surrogate",
    s_cut: float = 10.0,
    model: ClusterModel | None = None,
    z_source: ZBank | None = None,
    up_excursions: bool = False,
    s_max_exact: float = 14.0,
) -> ClusterSample:
    """Draw the cluster level-set mass C([-v, 0]).

    ``mode``: "exact" decorates every event with a conditioned BBM (requires
    v <= 12 and a small horizon), "surrogate" uses the critical level-set
    approximation everywhere, "hybrid" is exact below ``s_cut``.  Enable
    ``up_excursions`` for tail statistics only.
    """
    if v <= 0:
        raise ValueError("window depth v must be positive")
    if mode not in ("exact", "surrogate", "hybrid"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact" and v > 12.0:
        raise ValueError("pure exact mode requires v <= 12")
    if horizon is None:
        horizon = typical_horizon(v) if mode != "exact" else min(s_max_exact, typical_horizon(v))
    if model is None:
        model = default_model()
    bank = (z_source or model.z_bank).values
    rng = key.generator()

    bulk_h = horizon if mode == "exact" else min(horizon, _BULK_HORIZON_FACTOR * v ** (4.0 / 3.0))
    n_base = rng.poisson(2.0 * bulk_h)
    times = np.sort(rng.uniform(0.0, bulk_h, n_base))
    heights = -_bessel3_from0_at(times, rng) - backbone_curve(times)

    n_exc = 0
    if up_excursions and mode != "exact" and horizon > _S_EXC_MIN:
        t_exc, h_exc, n_exc = _sprinkle_events(rng, v, horizon, model, bank[-1])
        if t_exc.size:
            times = np.concatenate([times, t_exc])
            heights = np.concatenate([heights, h_exc])
            order = np.argsort(times, kind="stable")
            times, heights = times[order], heights[order]

    a = v + heights
    contributions = np.zeros(times.size)
    regime_warnings = 0
    exact_events = 0
    exact_attempts = 0

    exact_mask = np.zeros(times.size, dtype=bool)
    if mode == "exact":
        exact_mask[:] = True
    elif mode == "hybrid":
        exact_mask = times <= s_cut

    if exact_mask.any():
        if times[exact_mask].max() > s_max_exact:
            raise ValueError(
                f"exact decoration requested beyond s_max_exact={s_max_exact}"
            )
        for i in np.nonzero(exact_mask)[0]:
            system, attempts = conditioned_bbm(
                float(times[i]), float(-heights[i]), key, s_max_exact=s_max_exact,
                path=(int(i),),
            )
            exact_attempts += attempts
            exact_events += 1
            centered = system.alive_heights - centering(system.horizon)
            lo, hi = -v - heights[i], -heights[i]
            contributions[i] = float(np.sum((centered >= lo) & (centered <= hi)))

    sur_mask = ~exact_mask & (a > 0.0) & (times > 0.0)
    if sur_mask.any():
        s_sur = times[sur_mask]
        a_sur = a[sur_mask]
        w_sur = heights[sur_mask]
        regime_warnings = int(np.sum(a_sur > 0.9 * SQRT2 * s_sur))
        ceil_factor = model.kappa * np.exp(SQRT2 * np.minimum(w_sur, 4.0))
        z = bank[rng.integers(0, bank.size, a_sur.size)]
        hot = ceil_factor > 1e-8
        if hot.any():
            z[hot] = _conditioned_bank_draw(rng, bank, ceil_factor[hot])
        contributions[sur_mask] = (
            model.c0 * z * a_sur * np.exp(SQRT2 * a_sur - a_sur * a_sur / (2.0 * s_sur))
        )

    # deduplicate (measure-zero) time collisions for the backbone path
    uniq, first_idx = np.unique(times, return_index=True)
    diagnostics = ClusterDiagnostics(
        s_cut=s_cut if mode == "hybrid" else (math.inf if mode == "exact" else 0.0),
        horizon=float(horizon),
        bulk_horizon=float(bulk_h),
        truncation_bound=_truncation_bound(v, horizon, model) if mode != "exact" else 0.0,
        regime_warnings=regime_warnings,
        exact_events=exact_events,
        exact_attempts=exact_attempts,
        up_excursion_count=n_exc,
    )
    backbone = (
        SamplePath(TimeGrid(uniq), heights[first_idx])
        if uniq.size
        else SamplePath(TimeGrid([0.0]), np.array([0.0]))
    )
    return ClusterSample(
        mode=mode,
        v=v,
        mass=float(contributions.sum()),
        backbone=backbone,
        timestamps=TimestampProcess(times, horizon),
        contributions=contributions,
        diagnostics=diagnostics,
    )


def x_statistic(sample: ClusterSample) -> float:
    """Normalized level-set mass C([-w, 0]) / (w exp(sqrt2 w))."""
    w = sample.v
    if w <= 0:
        raise ValueError("window depth must be positive")
    return sample.mass / (w * math.exp(SQRT2 * w))


def cluster_mass_source(
    model: ClusterModel,
    mode: str = "surrogate",
    up_excursions: bool = True,
    horizon_rule=tail_horizon,
):
    """Adapter: (level, rng) -> mass, for the compensated-mass statistic."""

    def source(level: float, rng: np.random.Generator) -> float:
        seed_pair = rng.integers(0, 2**63 - 1, 2)
        key = StreamKey(int(seed_pair[0]), int(seed_pair[1] % 2**31))
        sample = sample_cluster(
            level,
            key,
            horizon=horizon_rule(level),
            mode=mode,
            model=model,
            up_excursions=up_excursions,
        )
        return sample.mass

    return source


@dataclass(frozen=True)
class GammaEstimate:
    """Empirical tail w * P(X(w) > y) on a y-grid, plus the first moment."""

    w: float
    y_grid: np.ndarray
    tail: np.ndarray
    stderr: np.ndarray
    n_samples: int
    c_star_hat: float
    c_star_stderr: float
    horizon: float

    def __post_init__(self) -> None:
        if np.any(np.diff(self.tail) > 1e-12):
            raise ValueError("tail estimates must be nonincreasing in y")


def gamma_tail(
    w: float,
    n: int,
    y_grid,
    key: StreamKey,
    *,
    mode: str = "surrogate",
    model: ClusterModel | None = None,
    horizon: float | None = None,
) -> GammaEstimate:
    """Estimate the intensity of unusually large clusters at window depth w.

    Draws ``n`` cluster masses at v = w with the tail-regime sprinkle on and
    returns w * P(X > y) per grid point (binomial stderr), plus the plug-in
    first moment w * mean(X).
    """
    if n < 1000:
        raise ValueError("need at least 1000 samples")
    y_grid = np.asarray(y_grid, dtype=np.float64)
    if y_grid.size == 0 or np.any(y_grid <= 0) or np.any(np.diff(y_grid) <= 0):
        raise ValueError("y grid must be positive ascending")
    model = model or default_model()
    horizon = tail_horizon(w) if horizon is None else horizon
    xs = np.empty(n)
    for i in range(n):
        sample = sample_cluster(
            w,
            key.child(i),
            horizon=horizon,
            mode=mode,
            model=model,
            up_excursions=True,
        )
        xs[i] = x_statistic(sample)
    p = np.array([np.mean(xs > y) for y in y_grid])
    return GammaEstimate(
        w=w,
        y_grid=y_grid,
        tail=w * p,
        stderr=w * np.sqrt(np.maximum(p * (1 - p), 0.0) / n),
        n_samples=n,
        c_star_hat=float(w * xs.mean()),
        c_star_stderr=float(w * xs.std(ddof=1) / math.sqrt(n)),
        horizon=horizon,
    )


@dataclass(frozen=True)
class ZetaGridSpec:
    s_min: float = 1e-4
    s_max: float = 1e4
    points: int = 400
    rounds: int = 8

    def __post_init__(self) -> None:
        if not (0.0 < self.s_min < self.s_max):
            raise ValueError("need 0 < s_min < s_max")
        if self.points < 16:
            raise ValueError("need at least 16 grid points")
        if self.rounds < 0:
            raise ValueError("rounds must be nonnegative")


@dataclass(frozen=True)
class ZetaSample:
    """Grid infimum of sqrt(2) Y_s + 1/(2s) along a Bessel-3 path from 0."""

    value: float
    argmin_s: float
    grid_spec: ZetaGridSpec
    round_values: np.ndarray

    def __post_init__(self) -> None:
        if self.value <= 0:
            raise ValueError("functional minimum must be positive")


def _functional(times: np.ndarray, bessel_values: np.ndarray) -> np.ndarray:
    return SQRT2 * bessel_values + 0.5 / times


def zeta_functional_minimum(path_values, spec: ZetaGridSpec) -> tuple[float, float, np.ndarray]:
    """Refined minimum of the functional along a deterministic path function.

    ``path_values`` maps an array of times to path values.  Used as the
    closed-form oracle path for the sampler's refinement logic.
    """
    times = np.geomspace(spec.s_min, spec.s_max, spec.points)
    rounds = [float(np.min(_functional(times, path_values(times))))]
    for _ in range(spec.rounds):
        f = _functional(times, path_values(times))
        i = int(np.argmin(f))
        new = []
        if i > 0:
            new.append(0.5 * (times[i - 1] + times[i]))
        if i < times.size - 1:
            new.append(0.5 * (times[i] + times[i + 1]))
        times = np.sort(np.concatenate([times, new]))
        rounds.append(float(np.min(_functional(times, path_values(times)))))
    f = _functional(times, path_values(times))
    i = int(np.argmin(f))
    return float(f[i]), float(times[i]), np.array(rounds)


def zeta_sample(key: StreamKey, spec: ZetaGridSpec | None = None) -> ZetaSample:
    """Sample the level-set fluctuation scale: refined grid infimum of
    sqrt(2) Y_s + 1/(2s) for a Bessel-3 path Y from 0.

    Each refinement round inserts the midpoints of the two grid intervals
    adjacent to the current argmin, using exact bridge interpolation of the
    three Brownian coordinates, so round minima are nonincreasing.
    """
    spec = spec or ZetaGridSpec()
    rng = key.generator()
    times = np.geomspace(spec.s_min, spec.s_max, spec.points)
    path = Bessel3Path(times, 0.0, rng)
    rounds = [float(np.min(_functional(path.times, path.values)))]
    for _ in range(spec.rounds):
        f = _functional(path.times, path.values)
        i = int(np.argmin(f))
        new = []
        if i > 0:
            new.append(0.5 * (path.times[i - 1] + path.times[i]))
        if i < path.times.size - 1:
            new.append(0.5 * (path.times[i] + path.times[i + 1]))
        path.refine(np.asarray(new))
        rounds.append(float(np.min(_functional(path.times, path.values))))
    f = _functional(path.times, path.values)
    i = int(np.argmin(f))
    return ZetaSample(
        value=float(f[i]),
        argmin_s=float(path.times[i]),
        grid_spec=spec,
        round_values=np.array(rounds),
    )


_DEFAULT_MODEL: ClusterModel | None = None


def default_model() -> ClusterModel:
    """Packaged cluster model: shipped Z bank and calibrated c0."""
    global _DEFAULT_MODEL
    if _DEFAULT_MODEL is None:
        from . import _defaults

        bank = ZBank.load_csv(_defaults.z_bank_path())
        _DEFAULT_MODEL = ClusterModel(
            c0=_defaults.DEFAULT_C0,
            z_bank=bank,
            c0_stderr=_defaults.DEFAULT_C0_STDERR,
        )
    return _DEFAULT_MODEL
