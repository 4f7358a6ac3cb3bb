"""Render the three figure analogues from ris-crs harness CSVs.

The CSV contract (column order matters only for humans; lookup is by name):

  sweeps:  strategy,snr_db,n_ris,nt,trial,seed,min_rate,iters_outer,wall_ms
  traces:  strategy,snr_db,n_ris,nt,trial,seed,iteration,t

fig3 plots min_rate versus snr_db, fig4 versus n_ris, fig5 plots the
objective t versus iteration. One line per strategy, mean over trials with
a shaded band of one standard error. Aggregation happens here so the raw
trial rows in the CSV stay inspectable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

SWEEP_COLUMNS = ("strategy", "snr_db", "n_ris", "nt", "trial", "seed",
                 "min_rate", "iters_outer", "wall_ms")
TRACE_COLUMNS = ("strategy", "snr_db", "n_ris", "nt", "trial", "seed",
                 "iteration", "t")

#: x column and y column per figure kind.
FIGURE_AXES = {
    "fig3": ("snr_db", "min_rate", "transmit SNR (dB)"),
    "fig4": ("n_ris", "min_rate", "RIS elements"),
    "fig5": ("iteration", "t", "outer iteration"),
}

#: default line styles, one per harness strategy tag
DEFAULT_STYLES = {
    "RIS_CRS": dict(color="#c0392b", marker="o", linestyle="-"),
    "RIS_RSMA": dict(color="#2980b9", marker="s", linestyle="-"),
    "RIS_SDMA": dict(color="#27ae60", marker="^", linestyle="-"),
    "NORIS_CRS": dict(color="#c0392b", marker="o", linestyle="--"),
    "NORIS_RSMA": dict(color="#2980b9", marker="s", linestyle="--"),
    "NORIS_SDMA": dict(color="#27ae60", marker="^", linestyle="--"),
}


@dataclass
class PlotJob:
    csv_path: str
    figure_kind: str  # fig3 | fig4 | fig5
    out_image_path: str
    styles: dict = field(default_factory=lambda: dict(DEFAULT_STYLES))

    def __post_init__(self) -> None:
        if self.figure_kind not in FIGURE_AXES:
            raise ValueError(f"unknown figure kind {self.figure_kind!r}")


class SchemaError(ValueError):
    pass


def load_rows(csv_path: str, figure_kind: str) -> list[dict]:
    """Read and validate a harness CSV; raises SchemaError naming the first
    missing column, and rejects an empty body."""
    required = TRACE_COLUMNS if figure_kind == "fig5" else SWEEP_COLUMNS
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"missing column {col!r} in {csv_path}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{csv_path} has no data rows")
    return rows


def aggregate(rows: list[dict], figure_kind: str) -> dict:
    """Per-strategy series: sorted x values with the mean and standard error
    of the y column over trials at each x."""
    x_col, y_col, _ = FIGURE_AXES[figure_kind]
    buckets: dict[str, dict[float, list[float]]] = {}
    for row in rows:
        x = float(row[x_col])
        y = float(row[y_col])
        buckets.setdefault(row["strategy"], {}).setdefault(x, []).append(y)
    series = {}
    for strategy, by_x in buckets.items():
        xs = np.array(sorted(by_x))
        means = np.array([np.mean(by_x[x]) for x in xs])
        stderr = np.array([
            np.std(by_x[x], ddof=1) / np.sqrt(len(by_x[x]))
            if len(by_x[x]) > 1 else 0.0
            for x in xs
        ])
        series[strategy] = {"x": xs, "mean": means, "stderr": stderr}
    return series


def render(job: PlotJob) -> str:
    """Render the figure; returns the output path. The CSV is never
    modified and repeated renders produce identical images."""
    rows = load_rows(job.csv_path, job.figure_kind)
    series = aggregate(rows, job.figure_kind)
    missing = sorted(set(series) - set(job.styles))
    if missing:
        raise ValueError(f"no style for strategies: {', '.join(missing)}")

    x_col, y_col, x_label = FIGURE_AXES[job.figure_kind]
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=150)
    for strategy in sorted(series):
        s = series[strategy]
        style = job.styles[strategy]
        ax.plot(s["x"], s["mean"], label=strategy, markersize=4, **style)
        if np.any(s["stderr"] > 0):
            ax.fill_between(s["x"], s["mean"] - s["stderr"],
                            s["mean"] + s["stderr"],
                            color=style.get("color"), alpha=0.18, lw=0)
    ax.set_xlabel(x_label)
    ax.set_ylabel("max-min rate (bits/s/Hz)" if y_col == "min_rate"
                  else "objective t (bits/s/Hz)")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(job.out_image_path, metadata={"Software": "ris-crs-plots"})
    plt.close(fig)
    return job.out_image_path
