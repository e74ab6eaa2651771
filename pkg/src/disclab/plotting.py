"""Figures written next to the CSV/JSON output of the report commands."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .piecewise import JUMP_TOL, PiecewiseLinear  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def figsize(scale=1.0):
    width = 6.0 * scale
    return width, width * (math.sqrt(5.0) - 1.0) / 2.0


def polyline(f: PiecewiseLinear):
    """x, y arrays with NaN breaks at discontinuities, ready for ``plot``."""
    xs, ys = [], []
    for k, jump in enumerate(f.jumps):
        if k and abs(jump) > JUMP_TOL:
            xs.append(np.nan)
            ys.append(np.nan)
        xs += [f.xs[k], f.xs[k + 1]]
        ys += [f.starts[k], f.ends[k]]
    return np.array(xs), np.array(ys)


def plot_functions(funcs: dict, path, title: str | None = None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        for label, f in funcs.items():
            x, y = polyline(f)
            ax.plot(x, y, lw=0.9, label=label)
        ax.axhline(0.0, color="0.6", lw=0.5)
        ax.set_xlim(0.0, 1.0)
        ax.set_xlabel("x")
        if title:
            ax.set_title(title)
        if len(funcs) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_profile(prof, path, constant: float | None = None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        ax.plot(prof.n, prof.nd, ".", ms=1.5, color="C0", label=r"$n D_n^*$")
        if constant is not None:
            n = np.geomspace(2, prof.n[-1], 200)
            ax.plot(n, constant * np.log(n), color="C3", lw=1.0,
                    label=fr"${constant:.7f}\,\log n$")
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_scan(scan, a_star: float, c_star: float, path, references: dict | None = None):
    a, c = np.array(scan).T
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        ax.plot(a, c, color="C0", lw=1.0)
        ax.plot([a_star], [c_star], "o", color="C3", ms=4)
        ax.annotate(f"a = {a_star:.5f}\nc = {c_star:.7f}", (a_star, c_star),
                    textcoords="offset points", xytext=(-70, -30))
        for name, value in (references or {}).items():
            if c.min() <= value <= c.max() * 1.01:
                ax.axhline(value, color="0.6", lw=0.5, ls="--")
                ax.text(a[0], value, name, fontsize=7, va="bottom")
        ax.set_xlabel("a")
        ax.set_ylabel("c(a)")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
