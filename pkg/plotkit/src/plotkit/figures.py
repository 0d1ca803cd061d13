"""Deterministic figure rendering.

Each figure kind maps CSV columns straight onto axes; nothing is computed
beyond unit-free reshaping (polar grid assembly for the regime map, per-ray
slicing for the dispersion curves).  Output is always a PNG/SVG pair with
pinned style, fixed metadata, and a fixed SVG hash salt so re-rendering the
same CSV is byte-identical.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import BoundaryNorm, ListedColormap
from matplotlib.patches import Patch

from .schema import REGIMES, SchemaError, read_ledger, read_regimes

KINDS = ("timeseries", "residuals", "regime_map", "dispersion")

TIMESERIES_COLUMNS = (
    "norm_u_hatB0",
    "norm_b_hatB1",
    "norm_H_hatB1",
    "norm_A_hatB1",
    "X",
)

RESIDUAL_COLUMNS = (
    "res_frozen_law",
    "res_mass_jac",
    "res_components",
    "res_trace",
    "res_div_H",
    "res_mean_b",
)

# one fixed color per (minus, plus) regime pair, indexed 3*minus + plus
_PAIR_COLORS = (
    "#5e3c99", "#b2abd2", "#f7f7f7",
    "#e66101", "#fdb863", "#ffffbf",
    "#1b7837", "#a6dba0", "#d9f0d3",
)

_STYLE = {
    "figure.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "svg.hashsalt": "plotkit",
}


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input CSVs, figure kind, output base path, scales.

    `output` is a path without extension; render() writes output + ".png"
    and output + ".svg".  `scales` may set "x"/"y" to matplotlib scale names
    (timeseries and residuals only).
    """

    inputs: tuple
    kind: str
    output: str
    scales: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; pick one of {KINDS}")
        if not self.inputs:
            raise SchemaError("FigureSpec needs at least one input CSV")


def regimes_at(table, xi1: float, xi2: float):
    """(regime_minus, regime_plus) of the sweep row nearest to (xi1, xi2)."""
    if table.rows.shape[0] == 0:
        raise SchemaError("empty regime table")
    d2 = (table.column("xi1") - xi1) ** 2 + (table.column("xi2") - xi2) ** 2
    i = int(np.argmin(d2))
    return table.regime_minus[i], table.regime_plus[i]


def _polar_grid(table):
    """Reshape sweep rows onto their (radius, angle) grid."""
    radius = np.round(np.hypot(table.column("xi1"), table.column("xi2")), 9)
    angle = np.round(np.degrees(np.arctan2(table.column("xi2"), table.column("xi1"))), 9)
    angle = np.where(angle < 0, angle + 360.0, angle)
    rvals = np.unique(radius)
    avals = np.unique(angle)
    if len(rvals) * len(avals) != table.rows.shape[0]:
        raise SchemaError("regime CSV rows do not form a complete polar grid")
    code = np.empty((len(rvals), len(avals)), dtype=int)
    ridx = {v: i for i, v in enumerate(rvals)}
    aidx = {v: i for i, v in enumerate(avals)}
    for i in range(table.rows.shape[0]):
        code[ridx[radius[i]], aidx[angle[i]]] = 3 * REGIMES.index(
            table.regime_minus[i]
        ) + REGIMES.index(table.regime_plus[i])
    return rvals, avals, code


def _save(fig, base: str):
    os.makedirs(os.path.dirname(os.path.abspath(base)), exist_ok=True)
    png, svg = base + ".png", base + ".svg"
    fig.savefig(png, metadata={"Software": "plotkit"})
    fig.savefig(svg, metadata={"Date": None})
    plt.close(fig)
    return [png, svg]


def _render_lines(table, columns, spec, title):
    if table.rows.shape[0] == 0:
        raise SchemaError(f"{spec.inputs[0]}: empty ledger, nothing to plot")
    t = table.column("t")
    marker = "o" if len(t) < 3 else None
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6.4, 4.0), layout="constrained")
        for name in columns:
            ax.plot(t, table.column(name), label=name, marker=marker)
        ax.set_xscale(spec.scales.get("x", "linear"))
        ax.set_yscale(spec.scales.get("y", "linear"))
        ax.set_xlabel("t")
        ax.set_title(title)
        ax.legend(loc="best")
        return _save(fig, spec.output)


def _render_regime_map(table, spec):
    rvals, avals, code = _polar_grid(table)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6.4, 4.2), layout="constrained")
        cmap = ListedColormap(_PAIR_COLORS)
        norm = BoundaryNorm(np.arange(-0.5, 9.5), cmap.N)
        da = avals[1] - avals[0] if len(avals) > 1 else 1.0
        dr = rvals[1] - rvals[0] if len(rvals) > 1 else 1.0
        ax.imshow(
            code,
            origin="lower",
            aspect="auto",
            cmap=cmap,
            norm=norm,
            interpolation="nearest",
            extent=(avals[0] - da / 2, avals[-1] + da / 2, rvals[0] - dr / 2, rvals[-1] + dr / 2),
        )
        present = sorted(set(code.ravel().tolist()))
        ax.legend(
            handles=[
                Patch(color=_PAIR_COLORS[c], label=f"{REGIMES[c // 3]}/{REGIMES[c % 3]}")
                for c in present
            ],
            loc="upper right",
            title="minus/plus",
        )
        ax.set_xlabel("angle of xi (degrees)")
        ax.set_ylabel("|xi|")
        ax.set_title("damping regimes of the two wave branches")
        return _save(fig, spec.output)


def _render_dispersion(table, spec):
    radius = np.hypot(table.column("xi1"), table.column("xi2"))
    angle = np.round(np.degrees(np.arctan2(table.column("xi2"), table.column("xi1"))), 6)
    avals = np.unique(angle)
    rays = []
    for want in (0.0, 30.0, 60.0, 85.0):
        a = avals[np.argmin(np.abs(avals - want))]
        if a not in rays:
            rays.append(a)
    re_minus = np.maximum(table.column("re_root_1"), table.column("re_root_2"))
    re_plus = np.maximum(table.column("re_root_3"), table.column("re_root_4"))
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 5.6), sharex=True, layout="constrained")
        for a in rays:
            sel = angle == a
            order = np.argsort(radius[sel])
            r = radius[sel][order]
            ax1.plot(r, table.column("lambda_minus")[sel][order], label=f"minus, {a:g} deg")
            ax1.plot(r, table.column("lambda_plus")[sel][order], "--", label=f"plus, {a:g} deg")
            ax2.plot(r, re_minus[sel][order], label=f"minus, {a:g} deg")
            ax2.plot(r, re_plus[sel][order], "--", label=f"plus, {a:g} deg")
        ax1.set_yscale("log")
        ax1.set_ylabel("wave-speed eigenvalues")
        ax1.legend(loc="best", ncols=2)
        ax2.set_ylabel("slowest decay rate")
        ax2.set_xlabel("|xi|")
        ax2.legend(loc="best", ncols=2)
        ax1.set_title("dispersion along frequency rays")
        return _save(fig, spec.output)


def render(spec: FigureSpec):
    """Render the figure; returns the list of written image paths."""
    if spec.kind == "timeseries":
        table = read_ledger(spec.inputs[0])
        return _render_lines(table, TIMESERIES_COLUMNS, spec, "norms and X along the run")
    if spec.kind == "residuals":
        table = read_ledger(spec.inputs[0])
        return _render_lines(table, RESIDUAL_COLUMNS, spec, "identity residual drift")
    table = read_regimes(spec.inputs[0])
    if table.rows.shape[0] == 0:
        raise SchemaError(f"{spec.inputs[0]}: empty sweep, nothing to plot")
    if spec.kind == "regime_map":
        return _render_regime_map(table, spec)
    return _render_dispersion(table, spec)
