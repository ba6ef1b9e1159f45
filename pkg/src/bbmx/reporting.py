"""Deterministic CSV/JSONL output and plot emission (tables + figures).

The CSV contract is bit-exact: comma separators, '.' decimal point, LF line
endings, floats rendered with repr (shortest round-trip form), header comment
lines carrying config hash, seed, and tool version.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

TOOL_VERSION = "bbmx 0.1.0"

HISTOGRAM_BINS = 64  # fixed equal-width binning over [min, max]


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    header_info: dict[str, str],
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {k}={v}" for k, v in header_info.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def read_csv(path: str | Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    meta: dict[str, str] = {}
    columns: list[str] = []
    rows: list[list[str]] = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            k, _, v = line.lstrip("# ").partition("=")
            meta[k] = v
        elif not columns:
            columns = line.split(",")
        elif line:
            rows.append(line.split(","))
    return meta, columns, rows


@dataclass
class RunRecord:
    """Summary of one experiment run."""

    experiment: str
    config_hash: str
    seed: int
    replicas: int
    tool_version: str = TOOL_VERSION
    started_at: str = ""
    finished_at: str = ""
    data_files: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    rows: list[dict] = field(default_factory=list)

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "replicas": self.replicas,
            "tool_version": self.tool_version,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "data_files": self.data_files,
            "diagnostics": self.diagnostics,
            "n_rows": len(self.rows),
        }
        path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
        return path


def write_report_jsonl(path: str | Path, reports) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps(r.row(), sort_keys=True) for r in reports]
    path.write_text("\n".join(lines) + "\n")
    return path


PLOT_KINDS = ("histogram", "ecdf", "tail", "scatter")


def emit_plot_data(
    values: np.ndarray,
    kind: str,
    out_base: str | Path,
    header_info: dict[str, str],
    y_values: np.ndarray | None = None,
) -> Path:
    """Write a plain (x, y[, extra]) table for one plot kind.

    histogram: fixed 64 equal-width bins over [min, max] -> (center, count)
    ecdf:      sorted values -> (x, k/n)
    tail:      sorted values -> (x, survival, neg_log_survival)
    scatter:   paired values -> (x, y)
    """
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}")
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("no data to plot")
    out = Path(f"{out_base}.{kind}.csv")
    if kind == "histogram":
        lo, hi = float(values.min()), float(values.max())
        if lo == hi:
            hi = lo + 1.0
        counts, edges = np.histogram(values, bins=HISTOGRAM_BINS, range=(lo, hi))
        centers = 0.5 * (edges[:-1] + edges[1:])
        write_csv(out, ["x", "count"], zip(centers, counts), header_info)
    elif kind == "ecdf":
        xs = np.sort(values)
        ys = np.arange(1, xs.size + 1) / xs.size
        write_csv(out, ["x", "cdf"], zip(xs, ys), header_info)
    elif kind == "tail":
        xs = np.sort(values)
        surv = 1.0 - np.arange(1, xs.size + 1) / xs.size
        keep = surv > 0
        xs, surv = xs[keep], surv[keep]
        write_csv(out, ["x", "survival", "neg_log_survival"],
                  zip(xs, surv, -np.log(surv)), header_info)
    else:
        if y_values is None or len(y_values) != values.size:
            raise ValueError("scatter requires matched y values")
        write_csv(out, ["x", "y"], zip(values, np.asarray(y_values, dtype=np.float64)),
                  header_info)
    return out


def render_figure(table_path: str | Path, out_path: str | Path | None = None) -> Path:
    """Render a plot-data table to a PNG next to it."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    table_path = Path(table_path)
    meta, columns, rows = read_csv(table_path)
    data = np.array([[float(x) for x in row] for row in rows])
    kind = table_path.suffixes[-2].lstrip(".") if len(table_path.suffixes) >= 2 else "scatter"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if kind == "histogram":
        width = data[1, 0] - data[0, 0] if data.shape[0] > 1 else 1.0
        ax.bar(data[:, 0], data[:, 1], width=0.9 * width, color="#46658c")
        ax.set_ylabel("count")
    elif kind == "ecdf":
        ax.step(data[:, 0], data[:, 1], where="post", color="#46658c")
        ax.set_ylabel("empirical CDF")
    elif kind == "tail":
        ax.semilogy(data[:, 0], data[:, 1], color="#46658c")
        ax.set_ylabel("survival")
    else:
        ax.plot(data[:, 0], data[:, 1], ".", ms=3, alpha=0.6, color="#46658c")
        ax.set_ylabel(columns[1] if len(columns) > 1 else "y")
    ax.set_xlabel(columns[0])
    title = meta.get("experiment", table_path.stem)
    ax.set_title(f"{title} ({kind})")
    fig.tight_layout()
    out = Path(out_path) if out_path else table_path.with_suffix(".png")
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out
