"""Figure builders: convergence curves and privacy-accuracy trade-offs.

Series assembly is separated from rendering so the grouping and
mean/stderr arithmetic are testable without touching a canvas. Rendering
is pinned — fixed geometry, fixed dpi, stripped metadata, fixed SVG hash
salt — so the same inputs reproduce the same image (PNG: identical pixel
buffer; SVG: identical bytes outside the metadata block).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib as mpl
import numpy as np
from matplotlib.figure import Figure

from .errors import SchemaError
from .tables import SweepTable, TraceTable

TRADEOFF_AXES = ("epsilon-bar", "delta")
_FIGSIZE = (6.4, 4.8)
_DPI = 100
_SVG_SALT = "dzoa-plots"
_PNG_METADATA = {"Software": None}
_SVG_METADATA = {"Date": None, "Creator": None}


@dataclass(frozen=True)
class Series:
    """One plotted curve: x positions, mean values, pointwise stderr."""

    label: str
    x: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray


def convergence_series(table: TraceTable) -> list[Series]:
    """One series per (method, epsilon): mean over seeds, per-round stderr.

    All traces must share a single delta (curves at mixed privacy slacks
    are not comparable on one panel) and, within a group, a common round
    grid.
    """
    deltas = sorted(set(table.delta.tolist()))
    if len(deltas) != 1:
        raise SchemaError(
            f"convergence input mixes delta values {deltas}; filter to one"
        )
    method = np.array(table.method)
    out: list[Series] = []
    for meth in sorted(set(table.method)):
        meth_mask = method == meth
        for eps in sorted(set(table.epsilon[meth_mask].tolist())):
            mask = meth_mask & (table.epsilon == eps)
            grid = None
            per_seed = []
            for seed in sorted(set(table.seed[mask].tolist())):
                sel = mask & (table.seed == seed)
                order = np.argsort(table.m[sel], kind="stable")
                m_vals = table.m[sel][order]
                if grid is None:
                    grid = m_vals
                elif not np.array_equal(grid, m_vals):
                    raise SchemaError(
                        f"method {meth!r} eps {eps:g}: seed {seed} covers rounds "
                        f"{m_vals.tolist()}, other seeds cover {grid.tolist()}"
                    )
                per_seed.append(table.normalized_error[sel][order])
            stack = np.vstack(per_seed)
            mean = stack.mean(axis=0)
            if stack.shape[0] > 1:
                stderr = stack.std(axis=0, ddof=1) / np.sqrt(stack.shape[0])
            else:
                stderr = np.zeros_like(mean)
            out.append(Series(label=f"{meth}, ε={eps:g}",
                              x=grid.astype(float), mean=mean, stderr=stderr))
    return out


def tradeoff_series(table: SweepTable, axis: str) -> list[Series]:
    """Final-error curves from an aggregate table.

    axis='epsilon-bar': x is the composed budget, one series per
    (method, delta). axis='delta': x is delta, one series per
    (method, epsilon).
    """
    if axis not in TRADEOFF_AXES:
        raise SchemaError(f"unknown tradeoff axis {axis!r}; use one of {TRADEOFF_AXES}")
    if axis == "epsilon-bar":
        group_vals, x_vals, group_symbol = table.delta, table.epsilon_bar, "δ"
    else:
        group_vals, x_vals, group_symbol = table.epsilon, table.delta, "ε"
    method = np.array(table.method)
    out: list[Series] = []
    for meth in sorted(set(table.method)):
        meth_mask = method == meth
        for group in sorted(set(group_vals[meth_mask].tolist())):
            mask = meth_mask & (group_vals == group)
            order = np.argsort(x_vals[mask], kind="stable")
            out.append(Series(
                label=f"{meth}, {group_symbol}={group:g}",
                x=x_vals[mask][order],
                mean=table.mean_final_error[mask][order],
                stderr=table.stderr_final_error[mask][order],
            ))
    return out


def _new_axes():
    fig = Figure(figsize=_FIGSIZE, dpi=_DPI)
    ax = fig.add_subplot()
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig: Figure, out_path) -> str:
    path = str(out_path)
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        fig.savefig(path, format="png", dpi=_DPI, metadata=dict(_PNG_METADATA))
    elif suffix == ".svg":
        with mpl.rc_context({"svg.hashsalt": _SVG_SALT}):
            fig.savefig(path, format="svg", metadata=dict(_SVG_METADATA))
    else:
        raise SchemaError(f"{path}: unsupported image format (use .png or .svg)")
    return path


def plot_convergence(csv_paths, out_path) -> str:
    """Render mean normalized error vs outer round, shaded by ±1 stderr."""
    series = convergence_series(TraceTable.from_files(csv_paths))
    fig, ax = _new_axes()
    for s in series:
        (line,) = ax.plot(s.x, s.mean, marker="o", markersize=3, label=s.label)
        ax.fill_between(s.x, s.mean - s.stderr, s.mean + s.stderr,
                        color=line.get_color(), alpha=0.25, linewidth=0)
    if all(np.all(s.mean > 0) for s in series):
        ax.set_yscale("log")
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("normalized error")
    ax.legend()
    return _save(fig, out_path)


def plot_tradeoff(csv_path, axis, out_path) -> str:
    """Render final error vs composed budget, or vs delta on a log axis."""
    series = tradeoff_series(SweepTable.from_file(csv_path), axis)
    fig, ax = _new_axes()
    for s in series:
        ax.errorbar(s.x, s.mean, yerr=s.stderr, marker="o", markersize=4,
                    capsize=3, label=s.label)
    if axis == "delta":
        ax.set_xscale("log")
        ax.set_xlabel("δ")
    else:
        ax.set_xlabel("composed privacy budget")
    ax.set_ylabel("mean final normalized error")
    ax.legend()
    return _save(fig, out_path)
