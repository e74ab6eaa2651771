"""From the per-level integral bound chi_a to the discrepancy constant, and
finite-N checks of the resulting inequalities on concrete sequences."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .discrepancy import DEFAULT_RATIO, DENSE_UPTO, DiscrepancyProfile, profile
from .envelope import WindowScheme, p_integral
from .errors import InvalidParameterError, RangeError
from .points import PointSet
from .variational import chi_lower_bound

log = logging.getLogger(__name__)

REFERENCES = {
    "bejian": 0.06015,
    "ostromoukhov-upper": 0.222,
    "published-lower": 0.0646363,
}

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def c_of_a(a: float) -> float:
    """chi_a / (2 log a): the constant obtained from window base a."""
    if not 3.0 < a < 4.0:
        raise RangeError(f"a must lie in (3, 4), got {a}")
    return chi_lower_bound(a) / (2.0 * math.log(a))


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-8) -> tuple[float, float]:
    """Maximise a unimodal f on [lo, hi]; returns (argmax, max)."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def scan(lo: float = 3.0, hi: float = 4.0, step: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """c(a) sampled strictly inside (lo, hi)."""
    n = max(2, int(round((hi - lo) / step)))
    a = np.linspace(lo, hi, n + 1)[1:-1]
    return a, np.array([c_of_a(x) for x in a])


def is_unimodal(values: Sequence[float]) -> bool:
    """True when the discrete differences change sign at most once, from + to -."""
    s = np.sign(np.diff(values))
    s = s[s != 0]
    changes = np.flatnonzero(s[1:] != s[:-1])
    return changes.size == 0 or (changes.size == 1 and s[0] > 0)


def optimize_constant(lo: float = 3.0, hi: float = 4.0, tol: float = 1e-8) -> tuple[float, float]:
    if not (3.0 <= lo < hi <= 4.0):
        raise RangeError(f"need 3 <= lo < hi <= 4, got ({lo}, {hi})")
    if tol <= 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    # keep evaluations strictly inside the open domain of c(a)
    eps = min(1e-12, 1e-3 * (hi - lo))
    lo_in, hi_in = max(lo, 3.0 + eps), min(hi, 4.0 - eps)
    step = min(1e-3, (hi_in - lo_in) / 16)
    grid, vals = scan(lo_in, hi_in, step)
    if not is_unimodal(vals):
        k = int(np.argmax(vals))
        log.warning("c(a) scan not unimodal on (%g, %g); bracketing the scan maximum", lo, hi)
        lo_in, hi_in = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    return golden_section_max(c_of_a, lo_in, hi_in, tol)


@dataclass
class BoundReport:
    a: float
    chi_a: float
    c_of_a: float
    a_star: float
    c_star_lower: float
    references: dict = field(default_factory=lambda: dict(REFERENCES))
    scan: list[tuple[float, float]] | None = None

    def to_json(self) -> dict:
        out = {
            "a_star": self.a_star,
            "c_star_lower": self.c_star_lower,
            "chi_a_star": chi_lower_bound(self.a_star),
            "a": self.a,
            "chi_a": self.chi_a,
            "c_of_a": self.c_of_a,
            "references": self.references,
        }
        if self.scan is not None:
            out["scan"] = [list(p) for p in self.scan]
        return out


def bound_report(a: float | None = None, lo: float = 3.0, hi: float = 4.0,
                 tol: float = 1e-8, scan_step: float | None = None) -> BoundReport:
    a_star, c_star = optimize_constant(lo, hi, tol)
    a = a_star if a is None else a
    pts = None
    if scan_step:
        xs, cs = scan(lo, hi, scan_step)
        pts = [(float(x), float(c)) for x, c in zip(xs, cs)]
    return BoundReport(a, chi_lower_bound(a), c_of_a(a), a_star, c_star, scan=pts)


def range_split_inequality(values: Mapping | Sequence[float], A0: Iterable, A2: Iterable) -> tuple[float, float]:
    """(spread over A, the four-term lower bound built from A0 and A2)."""
    vals = values if isinstance(values, Mapping) else dict(enumerate(values))
    A0, A2 = list(A0), list(A2)
    if not A0 or not A2:
        raise InvalidParameterError("A0 and A2 must be non-empty")
    missing = [i for i in A0 + A2 if i not in vals]
    if missing:
        raise InvalidParameterError(f"indices {missing} are not in A")
    allv = list(vals.values())
    v0 = [vals[i] for i in A0]
    v2 = [vals[i] for i in A2]
    lhs = max(allv) - min(allv)
    rhs = 0.5 * ((max(v2) - min(v2)) + (max(v0) - min(v0))
                 + abs(max(v2) - max(v0)) + abs(min(v2) - min(v0)))
    return lhs, rhs


@dataclass(frozen=True)
class BoundCheck:
    holds: bool
    witness_n: int
    margin: float
    threshold: float
    max_nd: float


def verify_bound(points: PointSet, a: float, prof: DiscrepancyProfile | None = None) -> BoundCheck:
    """Is max_{n<=N} n D_n^* >= log N * c(a)?  A finite-N check, not the asymptotic statement."""
    N = len(points)
    if N < 2:
        raise InvalidParameterError(f"need at least 2 points, got {N}")
    threshold = math.log(N) * c_of_a(a)
    if prof is None:
        prof = profile(points, "checkpointed", DEFAULT_RATIO, DENSE_UPTO)
    k = int(np.argmax(prof.nd))
    best = float(prof.nd[k])
    return BoundCheck(best >= threshold, int(prof.n[k]), best - threshold, threshold, best)


@dataclass(frozen=True)
class ChainRow:
    t: int
    N: int
    p: float
    t_chi: float
    passed: bool


def p_chain_check(points: PointSet, a: float, t_max: int) -> list[ChainRow]:
    """P(t) against t * chi_a for t = 1..t_max."""
    if t_max < 1:
        raise InvalidParameterError(f"t_max must be >= 1, got {t_max}")
    need = WindowScheme(a, t_max).N
    if len(points) < need:
        raise InvalidParameterError(f"t_max = {t_max} needs {need} points, have {len(points)}")
    chi = chi_lower_bound(a)
    rows = []
    for t in range(1, t_max + 1):
        scheme = WindowScheme(a, t)
        P = p_integral(points, scheme)
        rows.append(ChainRow(t, scheme.N, P, t * chi, P >= t * chi - 1e-9))
    return rows
