"""Event-driven binary branching Brownian motion with genealogy and pruning.

Each particle lives an independent Exp(1) lifetime and then splits in two;
between events it diffuses as a standard Brownian motion.  Motion is sampled
exactly at branch times and at fixed synchronization times (every
``check_interval``), where the pruning barrier is applied: any particle more
than ``window`` below the running maximum is killed and logged.

Randomness is organized per particle: particle ``label`` reads cell
``(label, counter)`` of a keyed hash table (counter 0 is the lifetime, then
one counter per motion segment).  Killing a particle therefore leaves every
other particle's draws untouched, so a pruned run and an unpruned run with
the same key agree exactly on all surviving lineages.  Labels are binary-heap
indices (children of ``L`` are ``2L`` and ``2L+1``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .extremal import DecoratedPointMeasure, PointMeasure
from .paths import SQRT2, log_plus
from .rng import StreamKey, exponential_at, normal_at

_U64 = np.uint64
_LABEL_CAP = np.uint64(2**62)

STATUS_BRANCHED = 1
STATUS_PRUNED = 2
STATUS_ALIVE = 3


class PopulationCapError(RuntimeError):
    """Raised when the node count exceeds the configured hard cap."""


class PruneSafetyError(ValueError):
    """Raised when a level-set query is outside the certified prune-safe range."""


class ConditioningError(RuntimeError):
    """Raised when rejection sampling exhausts its attempt budget."""

    def __init__(self, message: str, attempts: int, acceptance_estimate: float):
        super().__init__(message)
        self.attempts = attempts
        self.acceptance_estimate = acceptance_estimate


def centering(t: float) -> float:
    """Front centering sqrt(2) t - (3 / (2 sqrt(2))) log+ t."""
    return SQRT2 * t - (3.0 / (2.0 * SQRT2)) * float(log_plus(t))


@dataclass(frozen=True)
class PruneConfig:
    """Height-barrier pruning relative to the running maximum."""

    enabled: bool = True
    window: float = 10.0
    check_interval: float = 0.25
    margin: float = 3.0
    node_cap: int = 50_000_000

    def __post_init__(self) -> None:
        if self.window <= 0:
            raise ValueError("prune window must be positive")
        if self.check_interval <= 0:
            raise ValueError("check interval must be positive")
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")


@dataclass
class PruneLog:
    """Accounting for pruning decisions and their certified effect."""

    enabled: bool
    window: float
    margin: float
    pruned_count: int = 0
    # sum over kills of exp(horizon - kill time); multiplied by the
    # drifted-BM recovery probability exp(-2 sqrt(2) gap) this union-bounds
    # the expected number of would-be descendants above (max - window + gap).
    recovery_weight: float = 0.0

    def bias_bound(self, v: float) -> float:
        """Union bound on level-set corruption at depth v below the maximum."""
        gap = self.window - v
        if gap <= 0:
            return float("inf")
        return self.recovery_weight * float(np.exp(-2.0 * SQRT2 * gap))


class _NodeStore:
    """Flat growable arrays for the genealogy."""

    def __init__(self, cap0: int = 1024):
        self.n = 0
        self._cap = cap0
        self.parent = np.empty(cap0, dtype=np.int64)
        self.birth = np.empty(cap0, dtype=np.float64)
        self.end = np.empty(cap0, dtype=np.float64)
        self.height_end = np.empty(cap0, dtype=np.float64)
        self.label = np.empty(cap0, dtype=np.uint64)
        self.status = np.zeros(cap0, dtype=np.int8)

    def _grow(self, need: int) -> None:
        new_cap = max(2 * self._cap, self.n + need)
        for name in ("parent", "birth", "end", "height_end", "label", "status"):
            old = getattr(self, name)
            arr = np.empty(new_cap, dtype=old.dtype)
            arr[: self.n] = old[: self.n]
            setattr(self, name, arr)
        self.status[self.n :] = 0
        self._cap = new_cap

    def add(self, parents: np.ndarray, births: np.ndarray, labels: np.ndarray) -> np.ndarray:
        k = len(parents)
        if self.n + k > self._cap:
            self._grow(k)
        rows = np.arange(self.n, self.n + k, dtype=np.int64)
        self.parent[rows] = parents
        self.birth[rows] = births
        self.label[rows] = labels
        self.n += k
        return rows


@dataclass
class ParticleSystem:
    """Branching Brownian motion state at a fixed horizon."""

    horizon: float
    parent: np.ndarray
    birth: np.ndarray
    end: np.ndarray
    height_end: np.ndarray
    label: np.ndarray
    status: np.ndarray
    prune_log: PruneLog
    alive_rows: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.alive_rows = np.nonzero(self.status == STATUS_ALIVE)[0]

    @property
    def n_nodes(self) -> int:
        return int(self.parent.size)

    @property
    def n_alive(self) -> int:
        return int(self.alive_rows.size)

    @property
    def alive_heights(self) -> np.ndarray:
        return self.height_end[self.alive_rows]


def simulate(
    t: float,
    prune: PruneConfig | None = None,
    key: StreamKey = StreamKey(0),
    path: tuple[int, ...] = (),
) -> ParticleSystem:
    """Run BBM to horizon ``t``.

    ``path`` derives an independent sub-stream of ``key`` (used e.g. for
    rejection-sampling attempts); the default is the key's main stream.
    """
    if t < 0:
        raise ValueError("horizon must be nonnegative")
    prune = prune or PruneConfig(enabled=False)
    base = key.table_key(*path)
    log = PruneLog(enabled=prune.enabled, window=prune.window, margin=prune.margin)

    store = _NodeStore()
    root = store.add(
        np.array([-1], dtype=np.int64),
        np.zeros(1),
        np.array([1], dtype=np.uint64),
    )
    # alive working set
    a_row = root
    a_label = np.array([1], dtype=np.uint64)
    a_h = np.zeros(1)
    a_last = np.zeros(1)
    a_ctr = np.ones(1, dtype=np.uint64)
    a_branch = exponential_at(base, a_label, np.zeros(1, dtype=np.uint64))

    n_windows = max(int(np.ceil(t / prune.check_interval)), 0) if t > 0 else 0
    for k in range(1, n_windows + 1):
        t_next = min(k * prune.check_interval, t)
        # branch cascade inside the window
        while True:
            br = a_branch < t_next
            if not br.any():
                break
            keep = ~br
            p_row = a_row[br]
            p_label = a_label[br]
            p_time = a_branch[br]
            dt = p_time - a_last[br]
            h_branch = a_h[br] + np.sqrt(dt) * normal_at(base, p_label, a_ctr[br])
            store.end[p_row] = p_time
            store.height_end[p_row] = h_branch
            store.status[p_row] = STATUS_BRANCHED

            c_label = np.concatenate([p_label * _U64(2), p_label * _U64(2) + _U64(1)])
            if c_label.size and c_label.max() >= _LABEL_CAP:
                raise PopulationCapError("genealogy depth exceeds label capacity")
            c_birth = np.concatenate([p_time, p_time])
            c_h = np.concatenate([h_branch, h_branch])
            c_parent = np.concatenate([p_row, p_row])
            c_life = exponential_at(base, c_label, np.zeros(c_label.size, dtype=np.uint64))
            c_row = store.add(c_parent, c_birth, c_label)
            if store.n > prune.node_cap:
                raise PopulationCapError(
                    f"population exceeded node cap {prune.node_cap} at t={t_next:.2f}"
                )
            a_row = np.concatenate([a_row[keep], c_row])
            a_label = np.concatenate([a_label[keep], c_label])
            a_h = np.concatenate([a_h[keep], c_h])
            a_last = np.concatenate([a_last[keep], c_birth])
            a_ctr = np.concatenate([a_ctr[keep], np.ones(c_label.size, dtype=np.uint64)])
            a_branch = np.concatenate([a_branch[keep], c_birth + c_life])
        # synchronize motion to the window end
        dt = t_next - a_last
        a_h = a_h + np.sqrt(np.maximum(dt, 0.0)) * normal_at(base, a_label, a_ctr)
        a_ctr = a_ctr + _U64(1)
        a_last[:] = t_next
        # prune at interior checks
        if prune.enabled and t_next < t and a_h.size:
            barrier = a_h.max() - prune.window
            kill = a_h < barrier
            if kill.any():
                rows = a_row[kill]
                store.end[rows] = t_next
                store.height_end[rows] = a_h[kill]
                store.status[rows] = STATUS_PRUNED
                log.pruned_count += int(kill.sum())
                log.recovery_weight += float(kill.sum()) * float(np.exp(t - t_next))
                keep = ~kill
                a_row, a_label, a_h = a_row[keep], a_label[keep], a_h[keep]
                a_last, a_ctr, a_branch = a_last[keep], a_ctr[keep], a_branch[keep]

    store.end[a_row] = t
    store.height_end[a_row] = a_h
    store.status[a_row] = STATUS_ALIVE

    n = store.n
    return ParticleSystem(
        horizon=t,
        parent=store.parent[:n].copy(),
        birth=store.birth[:n].copy(),
        end=store.end[:n].copy(),
        height_end=store.height_end[:n].copy(),
        label=store.label[:n].copy(),
        status=store.status[:n].copy(),
        prune_log=log,
    )


def centered_max(system: ParticleSystem) -> float:
    """Maximum alive height minus the centering at the horizon."""
    if system.n_alive == 0:
        raise ValueError("system has no alive particles")
    return float(system.alive_heights.max() - centering(system.horizon))


def derivative_martingale(system: ParticleSystem, c_diamond: float = 1.0) -> float:
    """Sum of (sqrt(2) t - h) exp(sqrt(2) (h - sqrt(2) t)) over alive particles."""
    if c_diamond <= 0:
        raise ValueError("c_diamond must be positive")
    t = system.horizon
    h = system.alive_heights
    if h.size == 0:
        return 0.0
    return float(c_diamond * np.sum((SQRT2 * t - h) * np.exp(SQRT2 * (h - SQRT2 * t))))


def level_set_count(system: ParticleSystem, v: float) -> int:
    """Number of alive particles at height >= centering - v."""
    log = system.prune_log
    if log.enabled and v > log.window - log.margin:
        raise PruneSafetyError(
            f"level {v} exceeds certified prune-safe depth "
            f"{log.window - log.margin} (bias bound {log.bias_bound(v):.3g})"
        )
    threshold = centering(system.horizon) - v
    return int(np.sum(system.alive_heights >= threshold))


def genealogical_distance(system: ParticleSystem, row_a: int, row_b: int) -> float:
    """Time since the most recent common ancestor of two alive particles."""
    alive = set(system.alive_rows.tolist())
    if row_a not in alive or row_b not in alive:
        raise ValueError("both particles must be alive at the horizon")
    a, b = int(row_a), int(row_b)
    while a != b:
        if system.birth[a] > system.birth[b]:
            a = int(system.parent[a])
        elif system.birth[b] > system.birth[a]:
            b = int(system.parent[b])
        else:
            a, b = int(system.parent[a]), int(system.parent[b])
        if a < 0 or b < 0:
            raise RuntimeError("genealogy walk escaped the root")
    return float(system.horizon - system.end[a])


def _ancestors_at(system: ParticleSystem, cut: float) -> np.ndarray:
    """For each alive row, the ancestor row whose lifespan contains ``cut``."""
    rows = system.alive_rows.copy()
    while True:
        mask = system.birth[rows] > cut
        if not mask.any():
            return rows
        rows[mask] = system.parent[rows[mask]]


def local_maxima(system: ParticleSystem, r: float) -> np.ndarray:
    """Rows of alive particles that are highest within genealogical distance r.

    Exact height ties keep the smallest row index.
    """
    if r <= 0:
        raise ValueError("ball radius must be positive")
    if system.n_alive == 0:
        return np.empty(0, dtype=np.int64)
    cut = system.horizon - r
    if cut < 0:
        groups = np.zeros(system.n_alive, dtype=np.int64)
    else:
        groups = _ancestors_at(system, cut)
    h = system.alive_heights
    order = np.lexsort((system.alive_rows, -h, groups))
    sorted_groups = groups[order]
    first = np.ones(order.size, dtype=bool)
    first[1:] = sorted_groups[1:] != sorted_groups[:-1]
    winners = system.alive_rows[order[first]]
    return np.sort(winners)


def extract_clusters(system: ParticleSystem, r: float) -> DecoratedPointMeasure:
    """Tips and relative-height clusters around every r-local maximum."""
    if system.n_alive == 0:
        return DecoratedPointMeasure([])
    cut = system.horizon - r
    if cut < 0:
        groups = np.zeros(system.n_alive, dtype=np.int64)
    else:
        groups = _ancestors_at(system, cut)
    m_t = centering(system.horizon)
    h = system.alive_heights
    pairs = []
    for g in np.unique(groups):
        sel = h[groups == g]
        top = sel.max()
        pairs.append((float(top - m_t), PointMeasure(sel - top)))
    return DecoratedPointMeasure(pairs)


def conditioned_bbm(
    s: float,
    ceiling: float,
    key: StreamKey,
    s_max_exact: float = 14.0,
    max_attempts: int = 100_000,
    path: tuple[int, ...] = (),
) -> tuple[ParticleSystem, int]:
    """BBM at horizon ``s`` conditioned on centered maximum <= ceiling.

    Plain rejection sampling; returns the accepted system and the number of
    attempts used (acceptance telemetry).
    """
    if s > s_max_exact:
        raise ValueError(f"horizon {s} exceeds exact-conditioning cap {s_max_exact}")
    unpruned = PruneConfig(enabled=False)
    for attempt in range(1, max_attempts + 1):
        system = simulate(s, unpruned, key, path=(*path, attempt))
        if centered_max(system) <= ceiling:
            return system, attempt
    raise ConditioningError(
        f"no acceptance in {max_attempts} attempts at (s={s}, ceiling={ceiling})",
        attempts=max_attempts,
        acceptance_estimate=1.0 / max_attempts,
    )
