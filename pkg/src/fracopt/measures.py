"""Control spaces, parameter boxes and finitely supported probability measures."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import OutOfDomain, UnboundedSpace

WEIGHT_TOL = 1e-12


def _point(p) -> tuple:
    return tuple(float(x) for x in np.atleast_1d(np.asarray(p, dtype=float)))


def truncated_upper(lower: float, upper: float, bound: float) -> float:
    """Finite stand-in for an infinite upper edge: ``bound``, or ``lower + bound`` if lower >= bound."""
    if math.isfinite(upper):
        return upper
    return bound if lower < bound else lower + bound


@dataclass(frozen=True)
class ParameterDomain:
    """A bounded box S in R^r (``lower[i] == upper[i]`` pins a coordinate)."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo, hi = _point(self.lower) if self.lower else (), _point(self.upper) if self.upper else ()
        if len(lo) != len(hi):
            raise ValueError("S: lower and upper differ in length")
        for a, b in zip(lo, hi):
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError("S must be a bounded box")
            if a > b:
                raise ValueError(f"S: lower {a} > upper {b}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def contains(self, alpha) -> bool:
        a = _point(alpha) if self.dimension else ()
        return len(a) == self.dimension and all(lo <= x <= hi for x, lo, hi in zip(a, self.lower, self.upper))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        return lo + (hi - lo) * rng.random((n, self.dimension))


@dataclass(frozen=True)
class ControlSpace:
    """The control set U: either a finite point list or a box with possibly infinite upper edges."""

    kind: str
    points: tuple = ()
    lower: tuple = ()
    upper: tuple = ()

    def __post_init__(self):
        if self.kind == "finite":
            pts = tuple(_point(p) for p in self.points)
            if not pts:
                raise ValueError("finite U needs at least one point")
            if len({len(p) for p in pts}) != 1:
                raise ValueError("finite U points differ in dimension")
            if len(set(pts)) != len(pts):
                raise ValueError("finite U points must be distinct")
            if not all(math.isfinite(x) for p in pts for x in p):
                raise ValueError("finite U points must be finite")
            object.__setattr__(self, "points", pts)
        elif self.kind == "box":
            lo, hi = _point(self.lower), _point(self.upper)
            if len(lo) != len(hi) or not lo:
                raise ValueError("U box: lower/upper must be non-empty and equal length")
            for a, b in zip(lo, hi):
                if not math.isfinite(a):
                    raise ValueError("U box lower bounds must be finite")
                if not a < b or math.isnan(b) or b == -math.inf:
                    raise ValueError(f"U box needs lower < upper, got [{a}, {b}]")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        else:
            raise ValueError(f"unknown control space kind {self.kind!r}")

    @classmethod
    def finite(cls, points: Sequence) -> "ControlSpace":
        return cls("finite", points=tuple(points))

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float]) -> "ControlSpace":
        return cls("box", lower=tuple(lower), upper=tuple(upper))

    @property
    def dimension(self) -> int:
        return len(self.points[0]) if self.kind == "finite" else len(self.lower)

    @property
    def is_bounded(self) -> bool:
        return self.kind == "finite" or all(math.isfinite(b) for b in self.upper)

    @property
    def unbounded_dims(self) -> tuple:
        if self.kind == "finite":
            return ()
        return tuple(i for i, b in enumerate(self.upper) if not math.isfinite(b))

    def contains(self, u) -> bool:
        p = _point(u)
        if len(p) != self.dimension:
            return False
        if self.kind == "finite":
            return p in self.points
        return all(lo <= x <= hi for x, lo, hi in zip(p, self.lower, self.upper))

    def truncate(self, bound: float) -> "ControlSpace":
        """Replace infinite upper edges by :func:`truncated_upper`."""
        if self.is_bounded:
            return self
        hi = tuple(truncated_upper(lo, up, bound) for lo, up in zip(self.lower, self.upper))
        return ControlSpace.box(self.lower, hi)

    def sample(self, rng: np.random.Generator, n: int, truncation: Optional[float] = None) -> np.ndarray:
        """``n`` points drawn uniformly (by index for finite spaces)."""
        if self.kind == "finite":
            idx = rng.integers(0, len(self.points), size=n)
            return np.asarray(self.points, dtype=float)[idx]
        space = self
        if not self.is_bounded:
            if truncation is None:
                raise UnboundedSpace("U has an infinite edge; give a truncation bound to sample it")
            space = self.truncate(truncation)
        lo = np.asarray(space.lower, dtype=float)
        hi = np.asarray(space.upper, dtype=float)
        return lo + (hi - lo) * rng.random((n, self.dimension))


@dataclass(frozen=True)
class MixtureMeasure:
    """A probability measure with finitely many atoms ``((point, weight), ...)``."""

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((_point(p), float(w)) for p, w in self.atoms)
        if not atoms:
            raise ValueError("a measure needs at least one atom")
        if any(w < 0 or not math.isfinite(w) for _, w in atoms):
            raise ValueError("weights must be finite and non-negative")
        if abs(math.fsum(w for _, w in atoms) - 1.0) > WEIGHT_TOL:
            raise ValueError("weights must sum to 1")
        if len({p for p, _ in atoms}) != len(atoms):
            raise ValueError("atom points must be distinct")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_atoms(cls, points, weights, space: Optional[ControlSpace] = None) -> "MixtureMeasure":
        """Build a measure, merging repeated points by adding their weights."""
        merged: dict = {}
        for p, w in zip(points, weights):
            key = _point(p)
            if space is not None and not space.contains(key):
                raise OutOfDomain(f"atom {list(key)} is outside U")
            merged[key] = merged.get(key, 0.0) + float(w)
        return cls(tuple(merged.items()))

    @property
    def is_degenerate(self) -> bool:
        return len(self.atoms) == 1

    @property
    def points(self) -> np.ndarray:
        return np.asarray([p for p, _ in self.atoms], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.asarray([w for _, w in self.atoms], dtype=float)

    def __len__(self):
        return len(self.atoms)


def degenerate(space: ControlSpace, point) -> MixtureMeasure:
    """The measure with unit mass at ``point`` (its concentration point)."""
    p = _point(point)
    if not space.contains(p):
        raise OutOfDomain(f"point {list(p)} is outside U")
    return MixtureMeasure(((p, 1.0),))


def simplex_weights(rng: np.random.Generator, k: int) -> np.ndarray:
    """Uniform point of the (k-1)-simplex from the gaps of sorted uniforms."""
    cuts = np.sort(rng.random(k - 1))
    return np.diff(np.concatenate(([0.0], cuts, [1.0])))


def random_mixture(space: ControlSpace, k: int, seed, truncation: Optional[float] = None) -> MixtureMeasure:
    """A seeded random ``k``-atom mixture on ``space`` (duplicates merged)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    pts = space.sample(rng, k, truncation)
    w = simplex_weights(rng, k)
    return MixtureMeasure.from_atoms(pts, w)
