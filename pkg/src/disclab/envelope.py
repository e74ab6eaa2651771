"""Windowed envelopes x -> max/min_{n in W} D_n(x) as exact piecewise-linear functions.

On every interval (u_k, u_{k+1}] between consecutive distinct point values
the counts A_n(x) are constant, so each D_n is a line of slope -n there and
the envelope of a window is the upper (or lower) envelope of |W| lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .piecewise import JUMP_TOL, MERGE_TOL, PiecewiseLinear, merge_breakpoints
from .points import PointSet

EnvelopeFunction = PiecewiseLinear

Window = tuple[int, int]


def _floor_power(a: float, k: int) -> int:
    # guard against a**k landing a hair below an integer
    return int(math.floor(a ** k * (1.0 + 1e-13)))


@dataclass(frozen=True)
class WindowScheme:
    """Index windows A0 = {1..m}, A1, A2 = {N-m+1..N} with N = floor(a^t), m = floor(a^(t-1))."""

    a: float
    t: int

    def __post_init__(self):
        if not 3.0 < self.a < 4.0:
            raise InvalidParameterError(f"a must lie in (3, 4), got {self.a}")
        if self.t < 1 or int(self.t) != self.t:
            raise InvalidParameterError(f"t must be a positive integer, got {self.t}")

    @property
    def N(self) -> int:
        return _floor_power(self.a, self.t)

    @property
    def m(self) -> int:
        return _floor_power(self.a, self.t - 1)

    @property
    def A(self) -> Window:
        return (1, self.N)

    @property
    def A0(self) -> Window:
        return (1, self.m)

    @property
    def A1(self) -> Window:
        return (self.m + 1, self.N - self.m)

    @property
    def A2(self) -> Window:
        return (self.N - self.m + 1, self.N)


def _upper_walk(c: np.ndarray, s: np.ndarray, xl: float, xr: float, out: list) -> None:
    # upper envelope of lines c + s*x on (xl, xr]; appends (x, slope, start value)
    v = c + s * xl
    vmax = v.max()
    tie = np.flatnonzero(v == vmax)
    cur = int(tie[np.argmax(s[tie])])
    x = xl
    out.append((x, s[cur], v[cur]))
    while True:
        up = s > s[cur]
        if not up.any():
            return
        idx = np.flatnonzero(up)
        here = c[idx] + s[idx] * x
        gap = np.maximum((c[cur] + s[cur] * x) - here, 0.0)
        cross = x + gap / (s[idx] - s[cur])
        xc = cross.min()
        if xc >= xr - MERGE_TOL:
            return
        first = idx[cross <= xc]
        cur = int(first[np.argmax(s[first])])
        if xc - x <= MERGE_TOL:
            # overtaken at the segment start: replace rather than add a sliver
            out[-1] = (out[-1][0], s[cur], c[cur] + s[cur] * out[-1][0])
            continue
        x = xc
        out.append((x, s[cur], c[cur] + s[cur] * x))


def _check_window(points: PointSet, W: Window) -> tuple[int, int]:
    lo, hi = int(W[0]), int(W[1])
    if lo < 1 or hi < lo:
        raise InvalidParameterError(f"empty window {W}")
    if hi > len(points):
        raise InvalidParameterError(f"window {W} exceeds the {len(points)} available points")
    return lo, hi


def window_envelope(points: PointSet, W: Window, mode: str = "max") -> EnvelopeFunction:
    """Exact envelope of D_n(x), n in W = {lo..hi}, over x in [0, 1]."""
    lo, hi = _check_window(points, W)
    if mode not in ("max", "min"):
        raise InvalidParameterError(f"mode must be 'max' or 'min', got {mode!r}")
    vals = points.values[:hi]
    grid = merge_breakpoints(np.array([0.0, 1.0]), vals)
    rank = np.clip(np.searchsorted(grid, vals - MERGE_TOL, side="left"), 0, grid.size - 2)

    n = np.arange(lo, hi + 1, dtype=np.float64)
    sign = 1.0 if mode == "max" else -1.0
    slopes = -sign * n
    counts = np.zeros(n.size)
    by_rank = np.argsort(rank, kind="stable")
    pos = 0
    segs: list = []
    for k in range(grid.size - 1):
        # points at grid[k] are counted on (grid[k], grid[k+1]]
        while pos < by_rank.size and rank[by_rank[pos]] == k:
            i = int(by_rank[pos]) + 1
            counts[max(i - lo, 0):] += 1.0
            pos += 1
        _upper_walk(sign * counts, slopes, float(grid[k]), float(grid[k + 1]), segs)

    xs = np.array([seg[0] for seg in segs] + [1.0])
    seg_slopes = sign * np.array([seg[1] for seg in segs])
    starts = sign * np.array([seg[2] for seg in segs])
    return PiecewiseLinear(xs, seg_slopes, starts, 0.0)


def envelope_difference(upper2: EnvelopeFunction, upper0: EnvelopeFunction) -> EnvelopeFunction:
    return upper2 - upper0


def f_function(points: PointSet, scheme: WindowScheme) -> EnvelopeFunction:
    """max over A2 minus max over A0."""
    return envelope_difference(window_envelope(points, scheme.A2, "max"),
                               window_envelope(points, scheme.A0, "max"))


def g_function(points: PointSet, scheme: WindowScheme) -> EnvelopeFunction:
    """min over A2 minus min over A0."""
    return envelope_difference(window_envelope(points, scheme.A2, "min"),
                               window_envelope(points, scheme.A0, "min"))


def window_spread(points: PointSet, W: Window) -> EnvelopeFunction:
    return window_envelope(points, W, "max") - window_envelope(points, W, "min")


def jump_census(env: EnvelopeFunction, threshold: float = 1.0,
                tol: float = JUMP_TOL) -> tuple[int, int]:
    """(number of positive jumps, number of jumps of height >= threshold)."""
    j = env.jumps
    return int(np.count_nonzero(j > tol)), int(np.count_nonzero(j >= threshold - tol))


def integrate_abs(env: EnvelopeFunction) -> float:
    return env.integrate_abs()


def p_integral(points: PointSet, scheme: WindowScheme | int) -> float:
    """Integral over [0, 1] of max_{n<=N} D_n - min_{n<=N} D_n."""
    N = scheme if isinstance(scheme, int) else scheme.N
    if len(points) < N:
        raise InvalidParameterError(f"need {N} points, have {len(points)}")
    return window_spread(points, (1, N)).integrate()


def argmax_indices(env: EnvelopeFunction) -> np.ndarray:
    """Index n attaining a max/min envelope on each segment (its slope is -n)."""
    return np.rint(-env.slopes).astype(np.int64)


@dataclass(frozen=True)
class SplitTerms:
    """The four integrated terms of the range-splitting inequality on one window scheme."""

    p: float
    spread2: float
    spread0: float
    abs_f: float
    abs_g: float

    @property
    def rhs(self) -> float:
        return 0.5 * (self.spread2 + self.spread0 + self.abs_f + self.abs_g)


def split_terms(points: PointSet, scheme: WindowScheme) -> SplitTerms:
    return SplitTerms(
        p=p_integral(points, scheme),
        spread2=window_spread(points, scheme.A2).integrate(),
        spread0=window_spread(points, scheme.A0).integrate(),
        abs_f=f_function(points, scheme).integrate_abs(),
        abs_g=g_function(points, scheme).integrate_abs(),
    )
