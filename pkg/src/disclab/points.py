"""One-dimensional point sequences: generators, file ingestion and export."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import IngestionError, InvalidParameterError

KINDS = ("van-der-corput", "kronecker", "file")

# short names accepted on the command line
KIND_ALIASES = {
    "vdc": "van-der-corput",
    "van-der-corput": "van-der-corput",
    "kronecker": "kronecker",
    "file": "file",
}

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class PointSet:
    """Immutable ordered sequence x_1, ..., x_N in [0, 1).

    ``values`` keeps insertion order, which matters: prefix discrepancies
    are taken over x_1..x_n.  ``order`` is the stable argsort of ``values``.
    """

    values: np.ndarray
    kind: str = "file"
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64).ravel()
        if vals.size and not np.all(np.isfinite(vals)):
            raise InvalidParameterError("point values must be finite")
        bad = np.flatnonzero((vals < 0.0) | (vals >= 1.0))
        if bad.size:
            i = int(bad[0])
            raise InvalidParameterError(
                f"point {i + 1} = {vals[i]!r} is outside [0, 1)")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "params", dict(self.params))

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    @property
    def N(self) -> int:
        return len(self)

    @property
    def order(self) -> np.ndarray:
        return np.argsort(self.values, kind="stable")

    @property
    def sorted_values(self) -> np.ndarray:
        return self.values[self.order]

    def prefix(self, n: int) -> "PointSet":
        if not 0 <= n <= len(self):
            raise InvalidParameterError(f"prefix length {n} not in [0, {len(self)}]")
        return PointSet(self.values[:n], self.kind, self.params)

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "params": self.params,
            "count": len(self),
            "values": [float(v) for v in self.values],
        }


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    base: int | None = None
    alpha: float | None = None
    path: str | None = None

    def __post_init__(self):
        kind = KIND_ALIASES.get(self.kind)
        if kind is None:
            raise InvalidParameterError(
                f"unknown sequence kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        object.__setattr__(self, "kind", kind)
        relevant = {
            "van-der-corput": "base",
            "kronecker": "alpha",
            "file": "path",
        }[kind]
        for name in ("base", "alpha", "path"):
            value = getattr(self, name)
            if name == relevant and value is None:
                raise InvalidParameterError(f"{kind} needs {name}")
            if name != relevant and value is not None:
                raise InvalidParameterError(f"{name} is not a parameter of {kind}")
        if kind == "van-der-corput" and (int(self.base) != self.base or self.base < 2):
            raise InvalidParameterError(f"base must be an integer >= 2, got {self.base}")
        if kind == "kronecker" and not 0.0 < self.alpha < 1.0:
            raise InvalidParameterError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def params(self) -> dict[str, Any]:
        if self.kind == "van-der-corput":
            return {"base": int(self.base)}
        if self.kind == "kronecker":
            return {"alpha": float(self.alpha)}
        return {"path": str(self.path)}


def radical_inverse(n: int, base: int = 2) -> float:
    """Reflect the base-``base`` digits of ``n`` about the radix point.

    The digits are accumulated as an integer numerator over ``base**k`` so the
    result is correctly rounded (exact for base 2).
    """
    if base < 2 or int(base) != base:
        raise InvalidParameterError(f"base must be an integer >= 2, got {base}")
    if n < 1 or int(n) != n:
        raise InvalidParameterError(f"n must be a positive integer, got {n}")
    n, base = int(n), int(base)
    num, den = 0, 1
    while n:
        n, d = divmod(n, base)
        num = num * base + d
        den *= base
    return num / den


def kronecker_point(n: int, alpha: float) -> float:
    """Fractional part of n*alpha, reduced once from the product."""
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    if n < 1 or int(n) != n:
        raise InvalidParameterError(f"n must be a positive integer, got {n}")
    x = (n * alpha) % 1.0
    # the modulo can round up to exactly 1.0 for products just below an integer
    return 0.0 if x >= 1.0 else x


def van_der_corput(count: int, base: int = 2) -> np.ndarray:
    return np.array([radical_inverse(n, base) for n in range(1, count + 1)])


def kronecker(count: int, alpha: float = GOLDEN) -> np.ndarray:
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    x = np.mod(np.arange(1, count + 1, dtype=np.float64) * alpha, 1.0)
    x[x >= 1.0] = 0.0
    return x


def generate(spec: GeneratorSpec, count: int) -> PointSet:
    if count < 1 or int(count) != count:
        raise InvalidParameterError(f"count must be a positive integer, got {count}")
    if spec.kind == "van-der-corput":
        vals = van_der_corput(count, spec.base)
    elif spec.kind == "kronecker":
        vals = kronecker(count, spec.alpha)
    else:
        ps = read_points(spec.path)
        if len(ps) < count:
            raise IngestionError(f"{spec.path}: holds {len(ps)} points, {count} requested")
        vals = ps.values[:count]
    return PointSet(vals, spec.kind, spec.params)


def read_points(path) -> PointSet:
    """Read the text point format: one decimal per line, ``#`` comments allowed."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestionError(f"{path}: cannot read ({exc})") from exc
    vals = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            v = float(line)
        except ValueError:
            raise IngestionError(f"{path}:{lineno}: malformed value {line!r}") from None
        if not (0.0 <= v < 1.0):
            raise IngestionError(f"{path}:{lineno}: value {line} is outside [0, 1)")
        vals.append(v)
    return PointSet(np.array(vals, dtype=np.float64), "file", {"path": str(path)})


def format_points(points: PointSet) -> str:
    return "".join(f"{v:.17g}\n" for v in points.values)


def write_points(points: PointSet, path) -> None:
    Path(path).write_text(format_points(points), encoding="utf-8")


def dump_json(points: PointSet) -> str:
    return json.dumps(points.to_json(), indent=2)


def load_json(text: str) -> PointSet:
    try:
        obj = json.loads(text)
        values = obj["values"]
        kind = obj.get("kind", "file")
        params = obj.get("params", {})
    except (ValueError, KeyError, TypeError) as exc:
        raise IngestionError(f"malformed point JSON: {exc}") from exc
    if obj.get("count", len(values)) != len(values):
        raise IngestionError("point JSON count does not match values")
    try:
        return PointSet(np.array(values, dtype=np.float64), kind, params)
    except InvalidParameterError as exc:
        raise IngestionError(str(exc)) from exc
