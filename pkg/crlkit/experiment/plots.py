"""SVG charts drawn from the CSV files of a run, a diagnostic or a sweep.

Charts never hold numbers that aren't in a CSV next to them.
"""
from dataclasses import dataclass
import logging
import os
from typing import Dict, List, Tuple

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from crlkit import exception  # noqa: E402
from crlkit.baseline import SWEEP_FILE  # noqa: E402
from crlkit.experiment import metrics, runner  # noqa: E402
from crlkit.utils import json as crl_json  # noqa: E402


LOG = logging.getLogger("CRLKIT")

SWEEP_METRICS = ("success_rate", "return", "feasible", "good")


@dataclass
class Chart:
    path: str
    points: int = 0
    shape: Tuple[int, ...] = ()
    thresholds: Tuple[float, ...] = ()


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _read_csv(path) -> pd.DataFrame:
    df = pd.read_csv(path)
    if df.empty:
        raise exception.InvalidArgumentError(f"{path} has no rows to plot")
    return df


def thresholds_from_config(run_dir) -> Dict[str, float]:
    path = os.path.join(run_dir, runner.CONFIG_FILE)
    if not os.path.exists(path):
        return {}
    task = crl_json.load(path).get("task", {})
    out = {c["name"]: c["threshold"] for c in task.get("constraints", [])}
    if task.get("success"):
        out[task["success"]["name"]] = task["success"]["threshold"]
    return out


def line_chart(df, x, columns, path, title, ylabel, thresholds=None) -> Chart:
    fig, ax = plt.subplots(figsize=(6, 4))
    for col in columns:
        ax.plot(df[x], df[col], label=col)
    drawn = []
    for name, value in (thresholds or {}).items():
        ax.axhline(value, color="black", linestyle=":", linewidth=1)
        drawn.append(value)
    ax.set_title(title)
    ax.set_xlabel(x)
    ax.set_ylabel(ylabel)
    if len(columns) > 1:
        ax.legend(fontsize="small")
    _save(fig, path)
    return Chart(path=path, points=len(df), thresholds=tuple(drawn))


def plot_run(run_dir, out_dir=None) -> Dict[str, Chart]:
    """Return, success, constraint rates with thresholds and multipliers."""
    out_dir = out_dir or run_dir
    df = _read_csv(os.path.join(run_dir, metrics.METRICS_FILE))
    thresholds = thresholds_from_config(run_dir)
    charts = {
        "return": line_chart(
            df, "step", ["return"], os.path.join(out_dir, "return.svg"),
            "Average return", "return",
        ),
        "success": line_chart(
            df, "step", ["success_rate"], os.path.join(out_dir, "success.svg"),
            "Success rate", "success rate",
        ),
    }
    rate_cols = [c for c in df.columns if c.startswith("rate_")]
    if rate_cols:
        charts["rates"] = line_chart(
            df, "step", rate_cols, os.path.join(out_dir, "rates.svg"),
            "Average behavior rate", "rate",
            thresholds={c[len("rate_"):]: thresholds[c[len("rate_"):]]
                        for c in rate_cols if c[len("rate_"):] in thresholds},
        )
    mult_path = os.path.join(run_dir, metrics.MULTIPLIERS_FILE)
    if os.path.exists(mult_path) and not pd.read_csv(mult_path).empty:
        mdf = pd.read_csv(mult_path)
        lambda_cols = [c for c in mdf.columns if c.startswith("lambda_")]
        charts["lambdas"] = line_chart(
            mdf, "step", lambda_cols, os.path.join(out_dir, "lambdas.svg"),
            "Lagrange multipliers", "lambda",
        )
    return charts


def grid_from_sweep(df: pd.DataFrame, metric: str):
    """Seed-averaged metric on the weight grid plus the axis values."""
    weight_cols = [c for c in df.columns if c.startswith("w_")]
    axes = [sorted(df[c].unique()) for c in weight_cols]
    grid = np.full(tuple(len(a) for a in axes), np.nan)
    for key, group in df.groupby(weight_cols):
        key = key if isinstance(key, tuple) else (key,)
        index = tuple(a.index(v) for a, v in zip(axes, key))
        grid[index] = group[metric].astype(float).mean()
    return grid, weight_cols, axes


def heat_chart(grid, weight_cols, axes, metric, path) -> Chart:
    """One panel for one or two weights, one panel per third weight value."""
    if grid.ndim == 1:
        panels = [(grid[None, :], None)]
    elif grid.ndim == 2:
        panels = [(grid, None)]
    elif grid.ndim == 3:
        panels = [(grid[:, :, i], v) for i, v in enumerate(axes[2])]
    else:
        raise exception.InvalidArgumentError(
            f"Can't draw a heat grid over {grid.ndim} weights",
        )
    fig, axs = plt.subplots(1, len(panels), figsize=(4 * len(panels), 3.6), squeeze=False)
    finite = grid[np.isfinite(grid)]
    vmin, vmax = (finite.min(), finite.max()) if finite.size else (0.0, 1.0)
    for ax, (panel, third) in zip(axs[0], panels):
        im = ax.imshow(panel, origin="lower", vmin=vmin, vmax=vmax, cmap="viridis", aspect="auto")
        if grid.ndim == 1:
            ax.set_yticks([])
            ax.set_xticks(range(len(axes[0])), [f"{v:g}" for v in axes[0]])
            ax.set_xlabel(weight_cols[0])
        else:
            ax.set_yticks(range(len(axes[0])), [f"{v:g}" for v in axes[0]])
            ax.set_xticks(range(len(axes[1])), [f"{v:g}" for v in axes[1]])
            ax.set_ylabel(weight_cols[0])
            ax.set_xlabel(weight_cols[1])
        if third is not None:
            ax.set_title(f"{weight_cols[2]} = {third:g}")
        fig.colorbar(im, ax=ax)
    fig.suptitle(metric)
    _save(fig, path)
    return Chart(path=path, shape=tuple(grid.shape))


def plot_sweep(sweep_dir, out_dir=None) -> Dict[str, Chart]:
    out_dir = out_dir or sweep_dir
    df = _read_csv(os.path.join(sweep_dir, SWEEP_FILE))
    names = list(SWEEP_METRICS) + [c for c in df.columns if c.startswith("rate_")]
    charts = {}
    for metric in names:
        grid, weight_cols, axes = grid_from_sweep(df, metric)
        charts[metric] = heat_chart(
            grid, weight_cols, axes, metric, os.path.join(out_dir, f"heat_{metric}.svg"),
        )
    return charts


def plot_diagnostic(root, out_dir=None) -> Dict[str, Chart]:
    """Largest multiplier and critic loss of both modes on a log scale."""
    out_dir = out_dir or root
    df = _read_csv(os.path.join(root, runner.COMPARISON_FILE))
    fig, axs = plt.subplots(1, 3, figsize=(14, 4))
    for mode, group in df.groupby("mode"):
        axs[0].plot(group["step"], group["max_lambda"], label=mode)
        axs[1].plot(group["step"], group["max_critic_loss"], label=mode)
        axs[2].plot(group["step"], group["return"], label=mode)
    axs[0].set_yscale("symlog")
    axs[1].set_yscale("symlog")
    for ax, title in zip(axs, ("largest multiplier", "largest critic loss", "return")):
        ax.set_title(title)
        ax.set_xlabel("step")
        ax.legend(fontsize="small")
    path = os.path.join(out_dir, "comparison.svg")
    _save(fig, path)
    charts = {"comparison": Chart(path=path, points=len(df))}
    for mode in df["mode"].unique():
        mode_dir = os.path.join(root, mode)
        if os.path.exists(os.path.join(mode_dir, metrics.METRICS_FILE)):
            for name, chart in plot_run(mode_dir).items():
                charts[f"{mode}/{name}"] = chart
    return charts


def plot_summary(root, out_dir=None) -> Dict[str, Chart]:
    """Seed mean with a one standard error band."""
    out_dir = out_dir or root
    df = _read_csv(os.path.join(root, runner.SUMMARY_FILE))
    charts = {}
    for metric in ("return", "success_rate"):
        fig, ax = plt.subplots(figsize=(6, 4))
        mean, err = df[f"{metric}_mean"], df[f"{metric}_stderr"].fillna(0.0)
        ax.plot(df["step"], mean)
        ax.fill_between(df["step"], mean - err, mean + err, alpha=0.3)
        ax.set_title(f"{metric} over {int(df['n_seeds'].max())} seeds")
        ax.set_xlabel("step")
        path = os.path.join(out_dir, f"summary_{metric}.svg")
        _save(fig, path)
        charts[f"summary_{metric}"] = Chart(path=path, points=len(df))
    return charts


def emit_plots(path, out_dir=None) -> Dict[str, Chart]:
    """Draw whatever the directory holds: a run, seeds, a diagnostic or a sweep."""
    if not os.path.isdir(path):
        raise exception.InvalidArgumentError(f"{path} is not a directory")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    charts: Dict[str, Chart] = {}
    if os.path.exists(os.path.join(path, SWEEP_FILE)):
        charts.update(plot_sweep(path, out_dir))
    if os.path.exists(os.path.join(path, runner.COMPARISON_FILE)):
        charts.update(plot_diagnostic(path, out_dir))
    if os.path.exists(os.path.join(path, metrics.METRICS_FILE)):
        charts.update(plot_run(path, out_dir))
    if os.path.exists(os.path.join(path, runner.SUMMARY_FILE)):
        charts.update(plot_summary(path, out_dir))
    seed_dirs: List[str] = sorted(
        d for d in os.listdir(path)
        if d.startswith("seed_") and os.path.isdir(os.path.join(path, d))
    )
    for d in seed_dirs:
        if os.path.exists(os.path.join(path, d, metrics.METRICS_FILE)):
            for name, chart in plot_run(os.path.join(path, d)).items():
                charts[f"{d}/{name}"] = chart
    if not charts:
        raise exception.InvalidArgumentError(f"Nothing to plot in {path}")
    LOG.info(f"Wrote {len(charts)} charts for {path}")
    return charts
