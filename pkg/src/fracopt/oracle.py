"""Brute-force checks that never call the reduction solver.

* ``simplex_lfp_value`` optimises sum(w*a)/sum(w*b) over the probability
  simplex by enumeration and sampling, without assuming a vertex optimum.
* ``check_lemma1`` / ``check_lemma2_sup`` sample random mixtures and compare
  the ratio of integrals against the pointwise ratios at their atoms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernel
from .errors import TooLarge
from .expr import evaluate
from .functional import ProblemDefinition, sample_pairs
from .measures import ControlSpace, ParameterDomain, simplex_weights

MAX_N = 16


@dataclass(frozen=True)
class FiniteInstance:
    a: tuple
    b: tuple
    direction: str = "max"

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        if not a or len(a) != len(b):
            raise ValueError("a and b must be non-empty and of equal length")
        if not (all(x >= 1e-12 for x in b) or all(x <= -1e-12 for x in b)):
            raise ValueError("b must be of one strict sign with |b_i| >= 1e-12")
        if self.direction not in ("max", "min"):
            raise ValueError("direction must be 'max' or 'min'")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return len(self.a)

    def vertex_values(self) -> np.ndarray:
        return np.asarray(self.a) / np.asarray(self.b)


@dataclass
class BoundReport:
    instances_checked: int
    samples_per_instance: int
    max_violation: float
    violations: int
    tolerance: float
    skipped: int = 0

    @property
    def verdict(self) -> str:
        return "holds" if self.max_violation <= self.tolerance else "violated"

    def to_dict(self):
        return {
            "instances_checked": self.instances_checked,
            "samples_per_instance": self.samples_per_instance,
            "max_violation": self.max_violation,
            "violations": self.violations,
            "tolerance": self.tolerance,
            "skipped": self.skipped,
            "verdict": self.verdict,
        }


def barycentric_grid(n: int, m: int) -> np.ndarray:
    """All points of the simplex whose coordinates are multiples of 1/m."""
    rows = []
    for bars in itertools.combinations(range(m + n - 1), n - 1):
        edges = (-1,) + bars + (m + n - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(n)])
    return np.asarray(rows, dtype=float) / m


def simplex_lfp_value(inst: FiniteInstance, m: int = 50, n_random: int = 100_000, seed=0):
    """Best value of the fractional objective found over vertices, a barycentric grid (n <= 4) and random mixtures.

    Returns ``(value, weights)``.
    """
    n = inst.n
    if n > MAX_N:
        raise TooLarge(f"simplex oracle is capped at n = {MAX_N}, got {n}")
    a = np.asarray(inst.a)
    b = np.asarray(inst.b)
    s = 1.0 if inst.direction == "max" else -1.0
    best_val, best_w = None, None

    def consider(W):
        nonlocal best_val, best_w
        vals = (W @ a) / (W @ b)
        k = int(np.argmax(s * vals))
        if best_val is None or s * vals[k] > s * best_val:
            best_val, best_w = float(vals[k]), W[k].copy()

    consider(np.eye(n))
    if n <= 4 and n > 1:
        consider(barycentric_grid(n, m))
    if n > 1:
        rng = np.random.default_rng(seed)
        chunk = 20_000
        for start in range(0, n_random, chunk):
            cnt = min(chunk, n_random - start)
            cuts = np.sort(rng.random((cnt, n - 1)), axis=1)
            W = np.diff(np.concatenate([np.zeros((cnt, 1)), cuts, np.ones((cnt, 1))], axis=1), axis=1)
            consider(W)
    return best_val, best_w


def verify_vertex_optimality(inst: FiniteInstance, tol: float = 1e-9, **oracle_kw) -> bool:
    """True iff no mixture found by the oracle beats the best vertex by more than ``tol``."""
    value, _ = simplex_lfp_value(inst, **oracle_kw)
    vv = inst.vertex_values()
    if inst.direction == "max":
        return value - vv.max() <= tol
    return vv.min() - value <= tol


def random_instance(rng: np.random.Generator, n_range=(2, 8), a_range=(-10.0, 10.0), b_range=(0.1, 10.0), direction=None):
    """Instance with a_i, b_i uniform on the given ranges (the fixed acceptance distribution)."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    a = rng.uniform(*a_range, size=n)
    b = rng.uniform(*b_range, size=n)
    if direction is None:
        direction = "max" if rng.random() < 0.5 else "min"
    return FiniteInstance(tuple(a), tuple(b), direction)


def instance_problem(inst: FiniteInstance, name: str = "finite_instance") -> ProblemDefinition:
    """The finite-U problem whose control points are the unit vectors e_i of R^n.

    A = sum a_i*u_i and B = sum b_i*u_i, so C(e_i) = a_i / b_i exactly.
    """
    n = inst.n
    pts = [tuple(1.0 if j == i else 0.0 for j in range(n)) for i in range(n)]
    a_txt = " + ".join(f"({x!r})*u{i + 1}" for i, x in enumerate(inst.a))
    b_txt = " + ".join(f"({x!r})*u{i + 1}" for i, x in enumerate(inst.b))
    sign = "positive" if inst.b[0] > 0 else "negative"
    return ProblemDefinition.from_text(name, a_txt, b_txt, ParameterDomain((0.0,), (0.0,)), ControlSpace.finite(pts), sign, inst.direction)


def instance_from_problem(p: ProblemDefinition, alpha, direction: Optional[str] = None) -> FiniteInstance:
    """A, B evaluated at every point of a finite U for a fixed alpha."""
    if p.U.kind != "finite":
        raise ValueError("instance_from_problem needs a finite control space")
    a = [evaluate(p.A, p.binding(alpha, u)) for u in p.U.points]
    b = [evaluate(p.B, p.binding(alpha, u)) for u in p.U.points]
    return FiniteInstance(tuple(a), tuple(b), direction or p.direction)


def _mixture_batch(p: ProblemDefinition, alphas, n_mixtures, k_atoms, seed, truncation):
    """Atoms (n_alpha, n_mix, k) with weights; atoms beyond a mixture's size get weight 0."""
    n_alpha = len(alphas)
    k = k_atoms
    X = np.zeros((n_alpha, n_mixtures, k, p.r + p.d))
    W = np.zeros((n_alpha, n_mixtures, k))
    for i in range(n_alpha):
        for j in range(n_mixtures):
            rng = np.random.default_rng([int(seed), i, j])
            size = int(rng.integers(1, k_atoms + 1))
            X[i, j, :, : p.r] = alphas[i]
            X[i, j, :size, p.r:] = p.U.sample(rng, size, truncation)
            X[i, j, size:, p.r:] = X[i, j, 0, p.r:]
            W[i, j, :size] = simplex_weights(rng, size)
    return X, W


def _atoms_values(p, X):
    flat = X.reshape(-1, X.shape[-1])
    av, sa = kernel.eval_batch(p.program_a, flat)
    bv, sb = kernel.eval_batch(p.program_b, flat)
    shape = X.shape[:-1]
    ok = ((sa == 0) & (sb == 0) & (bv * p.sign > 0)).reshape(shape)
    return av.reshape(shape), bv.reshape(shape), ok


def _ratio_of_sums(W, av, bv):
    num = W[..., 0] * av[..., 0]
    den = W[..., 0] * bv[..., 0]
    for t in range(1, W.shape[-1]):
        num = num + W[..., t] * av[..., t]
        den = den + W[..., t] * bv[..., t]
    return num / den


def check_lemma1(
    p: ProblemDefinition,
    n_alpha: int = 100,
    n_mixtures: int = 100,
    k_atoms: int = 5,
    seed=0,
    tol: float = 1e-9,
    truncation: float = 1e3,
) -> BoundReport:
    """Every mixture's ratio of integrals must lie within the range of C over its own atoms."""
    rng = np.random.default_rng([int(seed), 2**31 - 1])
    alphas = p.S.sample(rng, n_alpha)
    X, W = _mixture_batch(p, alphas, n_mixtures, k_atoms, seed, truncation)
    av, bv, ok = _atoms_values(p, X)
    used = W > 0
    valid = np.all(ok | ~used, axis=-1)
    safe_b = np.where(ok, bv, 1.0)
    value = _ratio_of_sums(W, np.where(ok, av, 0.0), safe_b)
    c = np.where(ok, av / safe_b, np.nan)
    c_hi = np.max(np.where(used, c, -np.inf), axis=-1)
    c_lo = np.min(np.where(used, c, np.inf), axis=-1)
    excess = np.maximum(value - c_hi, c_lo - value)
    excess = np.where(valid, np.maximum(excess, 0.0), 0.0)
    return BoundReport(
        instances_checked=n_alpha,
        samples_per_instance=n_mixtures,
        max_violation=float(excess.max()) if excess.size else 0.0,
        violations=int(np.count_nonzero(excess > tol)),
        tolerance=tol,
        skipped=int(np.count_nonzero(~valid)),
    )


def sample_mixture_values(p: ProblemDefinition, n: int, k_atoms: int = 5, seed=0, truncation: float = 1e3):
    """Ratios of integrals for ``n`` random (alpha, mixture) pairs, plus the atoms used.

    Returns ``(values, atoms)`` where ``atoms`` stacks the (alpha, u) rows that
    carry positive weight. Pairs with a failing atom are dropped.
    """
    rng = np.random.default_rng([int(seed), 7])
    alphas = p.S.sample(rng, n)
    X, W = _mixture_batch(p, alphas, 1, k_atoms, seed, truncation)
    X, W = X[:, 0], W[:, 0]
    av, bv, ok = _atoms_values(p, X)
    used = W > 0
    valid = np.all(ok | ~used, axis=-1)
    values = _ratio_of_sums(W, np.where(ok, av, 0.0), np.where(ok, bv, 1.0))[valid]
    return values, X[used & ok]


def lemma2_sups(p: ProblemDefinition, direction: Optional[str] = None, n_points=2000, n_mixtures=2000, k_atoms=5, seed=0, truncation=1e3):
    """(extremum over sampled degenerate measures, extremum over sampled mixtures) in ``direction``."""
    direction = direction or p.direction
    s = 1.0 if direction == "max" else -1.0
    alphas, us = sample_pairs(p, n_points, seed, truncation)
    mix, atoms = sample_mixture_values(p, n_mixtures, k_atoms, seed, truncation)
    # every mixture atom is itself a degenerate measure
    Xd = np.vstack([np.hstack([alphas, us]), atoms])
    dv, dbv, dok = _atoms_values(p, Xd[:, None, :])
    deg = (dv / np.where(dok, dbv, 1.0))[dok]
    return float(np.max(s * deg) * s), float(np.max(s * mix) * s)


def check_lemma2_sup(p: ProblemDefinition, cfg=None, tol: float = 1e-9, **kw) -> bool:
    """Sampled degenerate measures reach at least as far as sampled mixtures (within ``tol``)."""
    direction = getattr(cfg, "direction", None) or p.direction
    if cfg is not None:
        kw.setdefault("seed", cfg.seed)
        kw.setdefault("truncation", cfg.truncation_bound)
    deg, mix = lemma2_sups(p, direction, **kw)
    if direction == "max":
        return deg + tol >= mix
    return deg - tol <= mix
