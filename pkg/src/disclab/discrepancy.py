"""Exact star discrepancy of finite point sets and of every prefix of a sequence."""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .points import PointSet

DENSE_UPTO = 4096
DEFAULT_RATIO = 1.01


def _check_n(points: PointSet, n: int) -> None:
    if not 1 <= n <= len(points):
        raise InvalidParameterError(f"n = {n} not in [1, {len(points)}]")


def count_below(points: PointSet, n: int, x: float) -> int:
    """A_n(x): how many of x_1..x_n lie strictly below x."""
    _check_n(points, n)
    return int(np.count_nonzero(points.values[:n] < x))


def disc_function(points: PointSet, n: int, x: float) -> float:
    """D_n(x) = A_n(x) - n x."""
    return count_below(points, n, x) - n * x


def _nd_sorted(s: np.ndarray) -> float:
    # n * D_n^* from an ascending array; both one-sided candidates per point
    n = s.size
    i = np.arange(1, n + 1, dtype=np.float64)
    d = max(float(np.max(i / n - s)), float(np.max(s - (i - 1) / n)))
    return n * d


def star_discrepancy(points: PointSet) -> float:
    if len(points) == 0:
        raise InvalidParameterError("star discrepancy of an empty point set")
    return _nd_sorted(points.sorted_values) / len(points)


@dataclass(frozen=True)
class DiscrepancyProfile:
    n: np.ndarray
    nd: np.ndarray
    schedule: str = "all"
    ratio: float | None = None

    @property
    def entries(self) -> list[tuple[int, float]]:
        return [(int(k), float(v)) for k, v in zip(self.n, self.nd)]

    def __len__(self):
        return int(self.n.size)

    def at(self, n: int) -> float:
        i = int(np.searchsorted(self.n, n))
        if i == self.n.size or self.n[i] != n:
            raise KeyError(n)
        return float(self.nd[i])

    def ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = self.nd / np.log(self.n)
        r[self.n < 2] = np.nan
        return r

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,n_dstar,ratio\n")
        for k, v, r in zip(self.n, self.nd, self.ratios()):
            buf.write(f"{int(k)},{v:.17g},{r:.17g}\n")
        return buf.getvalue()


def checkpoints(N: int, ratio: float, dense: int = 0) -> np.ndarray:
    """Every n <= dense, then a geometric grid with the given ratio, always ending at N."""
    if ratio <= 1.0:
        raise InvalidParameterError(f"checkpoint ratio must exceed 1, got {ratio}")
    out = list(range(1, min(dense, N) + 1))
    n = out[-1] if out else 1
    if not out:
        out.append(1)
    while n < N:
        n = min(N, max(n + 1, math.ceil(n * ratio)))
        out.append(n)
    return np.array(out, dtype=np.int64)


def _threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("DISCLAB_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def profile(points: PointSet, schedule: str = "all", ratio: float = DEFAULT_RATIO,
            dense: int = DENSE_UPTO, threads: int | None = None) -> DiscrepancyProfile:
    """n * D_n^* for the scheduled prefix lengths n.

    ``schedule="all"`` evaluates every n; ``"checkpointed"`` evaluates every
    n <= ``dense`` and a geometric grid with ``ratio`` above it.  Each value
    is exact for its prefix: the prefix is read off the global stable sort by
    masking indices, so no per-prefix sort is needed.
    """
    N = len(points)
    if N == 0:
        raise InvalidParameterError("profile of an empty point set")
    if schedule == "all":
        ns = np.arange(1, N + 1, dtype=np.int64)
        ratio_out = None
    elif schedule == "checkpointed":
        ns = checkpoints(N, ratio, dense)
        ratio_out = float(ratio)
    else:
        raise InvalidParameterError(f"unknown schedule {schedule!r}")

    # small prefixes only need the sort of the first `head` points
    head = min(N, max(dense, 1)) if schedule == "checkpointed" else N
    head_order = np.argsort(points.values[:head], kind="stable")
    head_sorted = points.values[:head][head_order]
    full_order = points.order if head < N else head_order
    full_sorted = points.values[full_order]

    def one(n: int) -> float:
        if n <= head:
            return _nd_sorted(head_sorted[head_order < n])
        return _nd_sorted(full_sorted[full_order < n])

    nthreads = _threads(threads)
    if nthreads == 1 or ns.size < 64:
        nd = [one(int(n)) for n in ns]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            nd = list(pool.map(one, (int(n) for n in ns), chunksize=16))
    return DiscrepancyProfile(ns, np.array(nd), schedule, ratio_out)


def max_ratio(prof: DiscrepancyProfile, floor_n: int = 2) -> float:
    """max of n D_n^* / log n over profile entries with n >= floor_n."""
    if floor_n < 2:
        raise InvalidParameterError(f"floor_n must be >= 2, got {floor_n}")
    keep = prof.n >= floor_n
    if not np.any(keep):
        raise InvalidParameterError(f"profile has no entry with n >= {floor_n}")
    return float(np.max(prof.nd[keep] / np.log(prof.n[keep])))
