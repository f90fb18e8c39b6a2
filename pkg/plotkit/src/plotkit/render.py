"""Render sweep result CSVs into the standard figure set.

Input files are the long-format trials CSV written by `qrmux run` (for the
memory-function, memory-capacity, and NMSE figures) and the ratio-pairs CSV
written by `qrmux analyze --kind improvement_ratio` (for the spatial-versus-
temporal scatter). Rendering is read-only and byte-stable for a fixed style
version: rerunning on the same input reproduces the same file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

STYLE_VERSION = "1"

PLOT_KINDS = ("mf_profile", "mc_vs_order", "nmse_vs_order", "ratio_scatter")

TRIALS_COLUMNS = {"preset", "n_qubits", "tau", "V", "order", "trial",
                  "metric", "value"}
PAIRS_COLUMNS = {"preset", "n_qubits", "tau", "metric",
                 "spatial_order1to5_v1", "temporal_v1to5_order1"}

# NMSE panels for the low NARMA orders read best on a log axis.
LOG_SCALE_NARMA = (2, 5)

FILTER_KEYS = ("preset", "n_qubits", "tau", "V", "order")


class PlotSchemaError(ValueError):
    """The input CSV does not carry the columns the figure kind needs."""


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    input_csv: Path
    output_path: Path
    filters: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in PLOT_KINDS:
            raise ValueError(f"kind must be one of {PLOT_KINDS}, got {self.kind!r}")
        if Path(self.output_path).suffix.lower() not in (".png", ".svg"):
            raise ValueError("output path must end in .png or .svg")


def _apply_style() -> None:
    plt.rcdefaults()
    matplotlib.rcParams.update({
        "figure.dpi": 110,
        "savefig.dpi": 110,
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "legend.fontsize": 8,
        "svg.hashsalt": f"plotkit-{STYLE_VERSION}",
    })


def _save(fig, output_path: Path) -> None:
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    if output_path.suffix.lower() == ".svg":
        # a fixed hashsalt plus no date stamp keeps the bytes reproducible
        fig.savefig(output_path, format="svg", metadata={"Date": None})
    else:
        fig.savefig(output_path, format="png",
                    metadata={"Software": f"plotkit {STYLE_VERSION}"})
    plt.close(fig)


def _load_trials(path, filters: dict) -> pd.DataFrame:
    df = pd.read_csv(path)
    missing = TRIALS_COLUMNS - set(df.columns)
    if missing:
        raise PlotSchemaError(f"{path}: missing columns {sorted(missing)}")
    for key, value in filters.items():
        if key not in FILTER_KEYS:
            raise PlotSchemaError(f"unknown filter key {key!r}; "
                                  f"choose from {FILTER_KEYS}")
        if key == "preset":
            df = df[df[key] == value]
        else:
            df = df[np.isclose(df[key].astype(float), float(value))]
    if df.empty:
        raise PlotSchemaError(f"{path}: no rows left after filters {filters}")
    return df


def _require_unique_cell(df: pd.DataFrame, columns) -> None:
    cells = df[list(columns)].drop_duplicates()
    if len(cells) > 1:
        raise PlotSchemaError(
            f"multiple parameter settings present "
            f"({cells.to_dict('records')}); narrow them with --filter")


def _mean_std(df: pd.DataFrame, keys) -> pd.DataFrame:
    grouped = df.groupby(list(keys))["value"].agg(["mean", "std", "count"])
    return grouped.reset_index().fillna({"std": 0.0})


def render_mf_profile(spec: PlotSpec) -> None:
    df = _load_trials(spec.input_csv, spec.filters)
    df = df[df["metric"].str.fullmatch(r"mf_\d+")].copy()
    if df.empty:
        raise PlotSchemaError("no memory-function rows (metric mf_<d>) found")
    _require_unique_cell(df, ("preset", "n_qubits", "tau", "V"))
    df["delay"] = df["metric"].str.slice(3).astype(int)
    stats = _mean_std(df, ("order", "delay"))

    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    for order, block in stats.groupby("order"):
        block = block.sort_values("delay")
        ax.errorbar(block["delay"], block["mean"], yerr=block["std"],
                    lw=1.0, elinewidth=0.5, label=f"order {order}")
    ax.set_xlabel("delay d")
    ax.set_ylabel("memory function")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    _save(fig, spec.output_path)


def render_mc_vs_order(spec: PlotSpec) -> None:
    df = _load_trials(spec.input_csv, spec.filters)
    df = df[df["metric"] == "mc"]
    if df.empty:
        raise PlotSchemaError("no memory-capacity rows (metric mc) found")
    _require_unique_cell(df, ("preset", "n_qubits", "tau"))
    stats = _mean_std(df, ("V", "order"))

    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    for v, block in stats.groupby("V"):
        block = block.sort_values("order")
        ax.errorbar(block["order"], block["mean"], yerr=block["std"],
                    marker="o", ms=3.5, lw=1.0, capsize=2, label=f"V = {v}")
    ax.set_xlabel("order of spatial multiplexing")
    ax.set_ylabel("memory capacity")
    ax.set_xticks(sorted(stats["order"].unique()))
    ax.legend()
    fig.tight_layout()
    _save(fig, spec.output_path)


def render_nmse_vs_order(spec: PlotSpec) -> None:
    df = _load_trials(spec.input_csv, spec.filters)
    df = df[df["metric"].str.fullmatch(r"nmse_narma\d+")].copy()
    if df.empty:
        raise PlotSchemaError("no NMSE rows (metric nmse_narma<n>) found")
    _require_unique_cell(df, ("preset", "n_qubits", "tau"))
    df["narma"] = df["metric"].str.slice(len("nmse_narma")).astype(int)
    narma_orders = sorted(df["narma"].unique())

    fig, axes = plt.subplots(1, len(narma_orders),
                             figsize=(2.6 * len(narma_orders), 3.0),
                             squeeze=False)
    for ax, narma in zip(axes[0], narma_orders):
        stats = _mean_std(df[df["narma"] == narma], ("V", "order"))
        for v, block in stats.groupby("V"):
            block = block.sort_values("order")
            ax.errorbar(block["order"], block["mean"], yerr=block["std"],
                        marker="o", ms=3, lw=1.0, capsize=2, label=f"V = {v}")
        ax.set_title(f"NARMA{narma}")
        ax.set_xlabel("order")
        ax.set_xticks(sorted(stats["order"].unique()))
        if narma in LOG_SCALE_NARMA:
            ax.set_yscale("log")
    axes[0][0].set_ylabel("NMSE")
    axes[0][-1].legend()
    fig.tight_layout()
    _save(fig, spec.output_path)


def render_ratio_scatter(spec: PlotSpec) -> None:
    df = pd.read_csv(spec.input_csv)
    missing = PAIRS_COLUMNS - set(df.columns)
    if missing:
        raise PlotSchemaError(f"{spec.input_csv}: missing columns "
                              f"{sorted(missing)}")
    for key, value in spec.filters.items():
        if key not in ("preset", "n_qubits", "tau"):
            raise PlotSchemaError(f"unknown filter key {key!r} for ratio_scatter")
        if key == "preset":
            df = df[df[key] == value]
        else:
            df = df[np.isclose(df[key].astype(float), float(value))]
    df = df.dropna(subset=["spatial_order1to5_v1", "temporal_v1to5_order1"])

    groups = (("memory capacity", df[df["metric"] == "mc"]),
              ("NMSE", df[df["metric"].str.startswith("nmse_")]))
    fig, axes = plt.subplots(1, 2, figsize=(7.4, 3.4))
    for ax, (title, block) in zip(axes, groups):
        ax.set_title(title)
        ax.set_xlabel("spatial ratio (order 1 to 5, V = 1)")
        ax.set_ylabel("temporal ratio (V = 1 to 5, order 1)")
        if not block.empty:
            for metric, sub in block.groupby("metric"):
                ax.scatter(sub["spatial_order1to5_v1"],
                           sub["temporal_v1to5_order1"], s=14, label=metric)
            ax.legend()
        low, high = _square_limits(ax, block)
        ax.plot([low, high], [low, high], color="black", lw=1.0)  # y = x
        ax.set_xlim(low, high)
        ax.set_ylim(low, high)
    fig.tight_layout()
    _save(fig, spec.output_path)


def _square_limits(ax, block) -> tuple[float, float]:
    if block.empty:
        return 0.0, 1.0
    values = np.concatenate([block["spatial_order1to5_v1"].to_numpy(),
                             block["temporal_v1to5_order1"].to_numpy()])
    low = min(0.0, float(np.min(values)))
    high = float(np.max(values)) * 1.1
    if not math.isfinite(high) or high <= low:
        high = low + 1.0
    return low, high


_RENDERERS = {
    "mf_profile": render_mf_profile,
    "mc_vs_order": render_mc_vs_order,
    "nmse_vs_order": render_nmse_vs_order,
    "ratio_scatter": render_ratio_scatter,
}


def render(spec: PlotSpec) -> Path:
    """Render one figure; returns the written path."""
    _apply_style()
    _RENDERERS[spec.kind](spec)
    return Path(spec.output_path)
