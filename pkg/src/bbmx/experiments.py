"""Batch experiment runner: replica scheduling, persistence, determinism.

Each experiment maps a replica index to data rows; replica ``k`` draws from
``StreamKey(seed, k)``, so outputs are a pure function of (config, seed) and
independent of the worker budget.  Aggregation is always in replica order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import cluster as cl
from . import extremal as ex
from .bbm import PruneConfig, centered_max, derivative_martingale, level_set_count, simulate
from .config import ExperimentConfig
from .reporting import RunRecord, TOOL_VERSION, emit_plot_data, render_figure, write_csv, write_report_jsonl
from .rng import StreamKey


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# per-replica row builders (module level: picklable for the process pool)

def _rows_simulate_bbm(cfg: ExperimentConfig, replica: int) -> list[tuple]:
    key = StreamKey(cfg.seed, replica)
    t = cfg.value("t", float)
    prune = PruneConfig(
        enabled=cfg.value("prune", bool, True),
        window=cfg.value("window", float, 10.0),
        check_interval=cfg.value("check_interval", float, 0.25),
        margin=cfg.value("margin", float, 3.0),
    )
    c_diamond = cfg.value("c_diamond", float, 1.0)
    level = cfg.value("level", float, float("nan"))
    system = simulate(t, prune, key)
    row = [
        replica,
        system.n_alive,
        system.n_nodes,
        system.prune_log.pruned_count,
        centered_max(system),
        derivative_martingale(system, c_diamond),
    ]
    if not np.isnan(level):
        row.append(level_set_count(system, level))
    return [tuple(row)]


def _columns_simulate_bbm(cfg: ExperimentConfig) -> list[str]:
    cols = ["replica", "n_alive", "n_nodes", "pruned_count", "centered_max", "z"]
    if not np.isnan(cfg.value("level", float, float("nan"))):
        cols.append("level_count")
    return cols


def _rows_sample_cluster(cfg: ExperimentConfig, replica: int) -> list[tuple]:
    key = StreamKey(cfg.seed, replica)
    v = cfg.value("v", float)
    n = cfg.value("n", int, 1)
    mode = cfg.value("mode", str, "surrogate")
    up = cfg.value("up_excursions", bool, False)
    horizon = cfg.value("horizon", float, float("nan"))
    s_cut = cfg.value("s_cut", float, 10.0)
    model = _resolve_model(cfg)
    rows = []
    for i in range(n):
        sample = cl.sample_cluster(
            v,
            key.child(i),
            horizon=None if np.isnan(horizon) else horizon,
            mode=mode,
            s_cut=s_cut,
            model=model,
            up_excursions=up,
        )
        rows.append(
            (
                replica,
                i,
                sample.mass,
                cl.x_statistic(sample),
                len(sample.timestamps),
                sample.diagnostics.up_excursion_count,
                sample.diagnostics.regime_warnings,
                sample.diagnostics.truncation_bound,
            )
        )
    return rows


_COLS_SAMPLE_CLUSTER = [
    "replica", "draw", "mass", "x_statistic", "n_events",
    "up_excursions", "regime_warnings", "truncation_bound",
]


def _rows_sample_stable(cfg: ExperimentConfig, replica: int) -> list[tuple]:
    key = StreamKey(cfg.seed, replica)
    n = cfg.value("n", int, 100_000)
    config = ex.StableSamplerConfig(
        scale=cfg.value("scale", float, 1.0),
        rho=cfg.value("rho", float, ex.CANONICAL_RHO),
        z_min=cfg.value("z_min", float, 2e-3),
        z_max=cfg.value("z_max", float, 1e6),
    )
    lambdas = [float(x) for x in cfg.value("lambdas", str, "0.5,1,2").split(",")]
    samples = ex.stable1_sample(config, key, size=n)
    rows = []
    for lam in lambdas:
        emp = np.exp(-lam * np.asarray(samples))
        rows.append(
            (
                replica,
                lam,
                float(emp.mean()),
                float(emp.std(ddof=1) / np.sqrt(n)),
                ex.stable1_laplace(config.scale, lam),
                ex.stable1_truncation_bound(config, lam),
            )
        )
    return rows


_COLS_SAMPLE_STABLE = ["replica", "lambda", "laplace", "stderr", "target", "truncation_bound"]


def _rows_sample_zeta(cfg: ExperimentConfig, replica: int) -> list[tuple]:
    key = StreamKey(cfg.seed, replica)
    n = cfg.value("n", int, 1000)
    spec = cl.ZetaGridSpec(
        s_min=cfg.value("s_min", float, 1e-4),
        s_max=cfg.value("s_max", float, 1e4),
        points=cfg.value("points", int, 400),
        rounds=cfg.value("rounds", int, 8),
    )
    rows = []
    for i in range(n):
        z = cl.zeta_sample(key.child(i), spec)
        last_drop = float(z.round_values[-2] - z.round_values[-1]) if spec.rounds else 0.0
        rows.append((replica, i, z.value, z.argmin_s, last_drop))
    return rows


_COLS_SAMPLE_ZETA = ["replica", "draw", "value", "argmin_s", "last_round_drop"]


def _rows_estimate_gamma(cfg: ExperimentConfig, replica: int) -> list[tuple]:
    key = StreamKey(cfg.seed, replica)
    w = cfg.value("w", float)
    n = cfg.value("n", int)
    y_grid = [float(x) for x in cfg.value("y_grid", str, "0.5,1,2,4").split(",")]
    model = _resolve_model(cfg)
    est = cl.gamma_tail(w, n, y_grid, key, model=model)
    return [
        (
            replica, float(y), float(tl), float(se), n,
            est.c_star_hat, est.c_star_stderr, est.horizon,
        )
        for y, tl, se in zip(est.y_grid, est.tail, est.stderr)
    ]


_COLS_ESTIMATE_GAMMA = [
    "replica", "y", "tail", "stderr", "n", "c_star_hat", "c_star_stderr", "horizon",
]


def _rows_compensated_mass(cfg: ExperimentConfig, replica: int) -> list[tuple]:
    key = StreamKey(cfg.seed, replica)
    u = cfg.value("u", float)
    x_minus = cfg.value("x_minus", float, -2.5)
    x_plus = cfg.value("x_plus", float, 4.0)
    rho = cfg.value("rho", float, 1.0)
    n = cfg.value("n", int, 100)
    n_comp = cfg.value("n_comp", int, 10_000)
    model = _resolve_model(cfg)
    source = cl.cluster_mass_source(model)
    comp, comp_se = ex.estimate_compensator(
        u, x_minus, x_plus, rho, source, n_comp, key.child(0)
    )
    rows = []
    for i in range(n):
        val = ex.compensated_mass_statistic(
            u, x_minus, x_plus, rho, source, n_comp, key.child(1 + i), compensator=comp
        )
        rows.append((replica, i, val, comp, comp_se))
    return rows


_COLS_COMPENSATED_MASS = ["replica", "draw", "value", "compensator", "compensator_stderr"]


def _resolve_model(cfg: ExperimentConfig):
    bank_path = cfg.value("z_bank", str, "")
    c0 = cfg.value("c0", float, float("nan"))
    if not bank_path and np.isnan(c0):
        return cl.default_model()
    base = cl.default_model()
    bank = cl.ZBank.load_csv(bank_path) if bank_path else base.z_bank
    return cl.ClusterModel(c0=base.c0 if np.isnan(c0) else c0, z_bank=bank)


_EXPERIMENTS = {
    "simulate-bbm": (_rows_simulate_bbm, _columns_simulate_bbm),
    "sample-cluster": (_rows_sample_cluster, lambda cfg: _COLS_SAMPLE_CLUSTER),
    "sample-stable": (_rows_sample_stable, lambda cfg: _COLS_SAMPLE_STABLE),
    "sample-zeta": (_rows_sample_zeta, lambda cfg: _COLS_SAMPLE_ZETA),
    "estimate-gamma": (_rows_estimate_gamma, lambda cfg: _COLS_ESTIMATE_GAMMA),
    "compensated-mass": (_rows_compensated_mass, lambda cfg: _COLS_COMPENSATED_MASS),
}


def _replica_task(args: tuple) -> tuple[int, list[tuple]]:
    cfg, replica = args
    fn = _EXPERIMENTS[cfg.experiment][0]
    return replica, fn(cfg, replica)


def resolve_workers(flag: int | None, env: dict | None = None) -> int:
    """Worker budget: CLI flag wins over BBMX_WORKERS, else 1."""
    env = os.environ if env is None else env
    if flag is not None:
        return max(int(flag), 1)
    raw = env.get("BBMX_WORKERS", "")
    return max(int(raw), 1) if raw else 1


def run(config: ExperimentConfig) -> tuple[RunRecord, int]:
    """Execute an experiment; returns the record and the number of failures."""
    started = _now()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = {
        "experiment": config.experiment,
        "config_hash": config.config_hash(),
        "seed": str(config.seed),
        "tool_version": TOOL_VERSION,
    }

    if config.experiment == "verify-suite":
        return _run_verify_suite(config, out_dir, header, started)

    fn, cols_fn = _EXPERIMENTS[config.experiment]
    tasks = [(config, r) for r in range(config.replicas)]
    results: dict[int, list[tuple]] = {}
    if config.workers > 1 and config.replicas > 1:
        with ProcessPoolExecutor(max_workers=min(config.workers, config.replicas)) as pool:
            for replica, rows in pool.map(_replica_task, tasks):
                results[replica] = rows
    else:
        for task in tasks:
            replica, rows = _replica_task(task)
            results[replica] = rows
    all_rows: list[tuple] = []
    for r in range(config.replicas):
        all_rows.extend(results[r])

    data_path = write_csv(out_dir / "data.csv", cols_fn(config), all_rows, header)
    record = RunRecord(
        experiment=config.experiment,
        config_hash=config.config_hash(),
        seed=config.seed,
        replicas=config.replicas,
        started_at=started,
        finished_at=_now(),
        data_files=[str(data_path)],
        rows=[dict(zip(cols_fn(config), row)) for row in all_rows],
    )
    record.save(out_dir / "record.json")
    return record, 0


def _run_verify_suite(
    config: ExperimentConfig, out_dir: Path, header: dict, started: str
) -> tuple[RunRecord, int]:
    from . import verification

    wanted = [
        int(x)
        for x in config.value("criteria", str, "1,2,3,4,5,6,7,8,9,10,11,12").split(",")
    ]
    key = StreamKey(config.seed)
    reports, artifacts = verification.run_criteria(
        wanted, key, workers=config.workers, out_dir=out_dir
    )
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        print(f"[{status}] {rep.name}: value={rep.value:.6g} threshold={rep.threshold:.6g}")
    rows = [
        (r.name, r.value, r.threshold, int(r.passed), r.n_a, r.n_b, r.detail)
        for r in reports
    ]
    data_path = write_csv(
        out_dir / "data.csv",
        ["criterion", "value", "threshold", "passed", "n_a", "n_b", "detail"],
        rows,
        header,
    )
    write_report_jsonl(out_dir / "report.jsonl", reports)
    for name, samples in artifacts.items():
        table = emit_plot_data(samples, "ecdf", out_dir / name, header)
        render_figure(table)
    failures = sum(1 for r in reports if not r.passed)
    record = RunRecord(
        experiment=config.experiment,
        config_hash=config.config_hash(),
        seed=config.seed,
        replicas=config.replicas,
        started_at=started,
        finished_at=_now(),
        data_files=[str(data_path), str(out_dir / "report.jsonl")],
        diagnostics={"failures": failures},
        rows=[dict(r.row()) for r in reports],
    )
    record.save(out_dir / "record.json")
    return record, failures
