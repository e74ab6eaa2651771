"""Piecewise-linear functions with jump discontinuities.

A function on [x_0, x_K] is stored as breakpoints ``xs``, a slope and a
start value per segment, and the value at x_0.  Segment k covers the
half-open interval (xs[k], xs[k+1]]: ``starts[k]`` is the right limit at
xs[k].  At a breakpoint the function takes its left limit, so
``f(xs[k+1]) = starts[k] + slopes[k] * (xs[k+1] - xs[k])``.  This matches
the counting function A_n(x) = #{x_i < x}, which is constant on exactly such
intervals between consecutive point values.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidParameterError

MERGE_TOL = 1e-15
JUMP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    xs: np.ndarray
    slopes: np.ndarray
    starts: np.ndarray
    origin: float = 0.0

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        slopes = np.asarray(self.slopes, dtype=np.float64)
        starts = np.asarray(self.starts, dtype=np.float64)
        if xs.ndim != 1 or xs.size < 2:
            raise InvalidParameterError("need at least two breakpoints")
        if slopes.shape != (xs.size - 1,) or starts.shape != slopes.shape:
            raise InvalidParameterError("one slope and one start value per segment")
        if np.any(np.diff(xs) <= 0):
            raise InvalidParameterError("breakpoints must be strictly increasing")
        for arr in (xs, slopes, starts):
            arr.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "origin", float(self.origin))

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, value: float = 0.0, lo: float = 0.0, hi: float = 1.0):
        return cls([lo, hi], [0.0], [value], value)

    @classmethod
    def line(cls, slope: float, intercept: float = 0.0, lo: float = 0.0, hi: float = 1.0):
        """The continuous function ``intercept + slope * x`` on [lo, hi]."""
        v = intercept + slope * lo
        return cls([lo, hi], [slope], [v], v)

    @classmethod
    def concat(cls, parts: Sequence["PiecewiseLinear"]) -> "PiecewiseLinear":
        """Join functions on adjacent domains; mismatched values at a seam become jumps."""
        if not parts:
            raise InvalidParameterError("nothing to concatenate")
        xs, slopes, starts = [parts[0].xs[:1]], [], []
        for prev, part in zip([None, *parts[:-1]], parts):
            if prev is not None and abs(part.xs[0] - prev.xs[-1]) > MERGE_TOL:
                raise InvalidParameterError(
                    f"gap between parts at {prev.xs[-1]!r} and {part.xs[0]!r}")
            xs.append(part.xs[1:])
            slopes.append(part.slopes)
            starts.append(part.starts)
        return cls(np.concatenate(xs), np.concatenate(slopes),
                   np.concatenate(starts), parts[0].origin)

    # evaluation ---------------------------------------------------------

    @property
    def lo(self) -> float:
        return float(self.xs[0])

    @property
    def hi(self) -> float:
        return float(self.xs[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.xs)

    @property
    def ends(self) -> np.ndarray:
        """Left limit at xs[k+1] of every segment."""
        return self.starts + self.slopes * self.widths

    @property
    def jumps(self) -> np.ndarray:
        """Right limit minus left limit at xs[0..K-1]; entry 0 is measured against the origin value."""
        before = np.concatenate([[self.origin], self.ends[:-1]])
        return self.starts - before

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        k = np.clip(np.searchsorted(self.xs, x, side="left") - 1, 0, self.slopes.size - 1)
        y = self.starts[k] + self.slopes[k] * (x - self.xs[k])
        return np.where(x <= self.xs[0], self.origin, y)

    def right_limit(self, x):
        x = np.asarray(x, dtype=np.float64)
        k = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, self.slopes.size - 1)
        return self.starts[k] + self.slopes[k] * (x - self.xs[k])

    def _on(self, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # slope and right-limit start of self on each cell of a refinement grid
        mid = 0.5 * (grid[:-1] + grid[1:])
        k = np.clip(np.searchsorted(self.xs, mid, side="right") - 1, 0, self.slopes.size - 1)
        return self.slopes[k], self.starts[k] + self.slopes[k] * (grid[:-1] - self.xs[k])

    # arithmetic ---------------------------------------------------------

    def _combine(self, other: "PiecewiseLinear", sign: float) -> "PiecewiseLinear":
        if abs(self.lo - other.lo) > MERGE_TOL or abs(self.hi - other.hi) > MERGE_TOL:
            raise InvalidParameterError("operands live on different domains")
        grid = merge_breakpoints(self.xs, other.xs)
        s1, v1 = self._on(grid)
        s2, v2 = other._on(grid)
        return PiecewiseLinear(grid, s1 + sign * s2, v1 + sign * v2,
                               self.origin + sign * other.origin)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __neg__(self):
        return PiecewiseLinear(self.xs, -self.slopes, -self.starts, -self.origin)

    def scaled(self, factor: float) -> "PiecewiseLinear":
        return PiecewiseLinear(self.xs, factor * self.slopes, factor * self.starts,
                               factor * self.origin)

    def simplify(self, tol: float = JUMP_TOL) -> "PiecewiseLinear":
        """Drop breakpoints where the function is continuous and the slope does not change."""
        jumps = self.jumps
        keep = [0]
        for k in range(1, self.slopes.size):
            j = keep[-1]
            if abs(jumps[k]) <= tol and abs(self.slopes[k] - self.slopes[j]) <= tol:
                continue
            keep.append(k)
        keep = np.array(keep)
        return PiecewiseLinear(np.append(self.xs[keep], self.xs[-1]), self.slopes[keep],
                               self.starts[keep], self.origin)

    # integrals ----------------------------------------------------------

    def integrate(self) -> float:
        return float(np.sum(0.5 * (self.starts + self.ends) * self.widths))

    def integrate_abs(self) -> float:
        """Exact integral of |f|, splitting segments at their zero crossings."""
        y0, y1, h = self.starts, self.ends, self.widths
        same = y0 * y1 >= 0.0
        area = np.empty_like(h)
        area[same] = 0.5 * np.abs(y0[same] + y1[same]) * h[same]
        d = ~same
        area[d] = (y0[d] ** 2 + y1[d] ** 2) / (2.0 * np.abs(y1[d] - y0[d])) * h[d]
        return float(np.sum(area))

    def max_abs(self) -> float:
        return float(max(abs(self.origin), np.max(np.abs(self.starts)), np.max(np.abs(self.ends))))

    # export -------------------------------------------------------------

    def segment_rows(self) -> Iterable[tuple[float, float, float, float, float]]:
        for k, jump in enumerate(self.jumps):
            yield (float(self.xs[k]), float(self.xs[k + 1]), float(self.slopes[k]),
                   float(self.starts[k]), float(jump))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x_left,x_right,slope,value_left,jump_at_left\n")
        for row in self.segment_rows():
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, origin: float | None = None) -> "PiecewiseLinear":
        rows = [line.split(",") for line in text.strip().splitlines()[1:]]
        data = np.array([[float(v) for v in r] for r in rows])
        xs = np.append(data[:, 0], data[-1, 1])
        if origin is None:
            origin = data[0, 3] - data[0, 4]
        return cls(xs, data[:, 2], data[:, 3], origin)


def merge_breakpoints(*arrays: np.ndarray, tol: float = MERGE_TOL) -> np.ndarray:
    """Sorted union of breakpoint arrays; points closer than ``tol`` collapse onto the first."""
    allx = np.unique(np.concatenate(arrays))
    if allx.size < 2:
        return allx
    keep = np.concatenate([[True], np.diff(allx) > tol])
    out = allx[keep]
    out[-1] = allx[-1]
    return out
