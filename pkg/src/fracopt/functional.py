"""Problem definitions and the linear-fractional integral functional over finite mixtures."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.stats import qmc

from . import kernel
from .errors import DenominatorSignViolation, DomainError, EvaluationFailure
from .expr import Node, compile_program, evaluate, parse_expression
from .measures import ControlSpace, MixtureMeasure, ParameterDomain

ZERO_TOL = 1e-12
SIGNS = {"positive": 1.0, "negative": -1.0}


def alpha_names(r: int) -> list:
    return [f"alpha{i + 1}" for i in range(r)]


def u_names(d: int) -> list:
    return [f"u{i + 1}" for i in range(d)]


@dataclass(frozen=True, eq=False)
class ProblemDefinition:
    """Integrands A, B over S x U, the declared sign of B and the default direction."""

    name: str
    A: Node
    B: Node
    S: ParameterDomain
    U: ControlSpace
    sign_B: str
    direction: str = "max"
    a_text: str = ""
    b_text: str = ""

    def __post_init__(self):
        if self.sign_B not in SIGNS:
            raise ValueError(f"sign_B must be 'positive' or 'negative', got {self.sign_B!r}")
        if self.direction not in ("max", "min"):
            raise ValueError(f"direction must be 'max' or 'min', got {self.direction!r}")
        declared = set(self.columns)
        for label, node in (("A", self.A), ("B", self.B)):
            extra = node.variables() - declared
            if extra:
                raise ValueError(f"{label} uses undeclared variables {sorted(extra)}")
        if not self.a_text:
            object.__setattr__(self, "a_text", str(self.A))
        if not self.b_text:
            object.__setattr__(self, "b_text", str(self.B))

    @classmethod
    def from_text(cls, name, A, B, S, U, sign_B="positive", direction="max") -> "ProblemDefinition":
        cols = alpha_names(S.dimension) + u_names(U.dimension)
        return cls(
            name=name,
            A=parse_expression(A, cols),
            B=parse_expression(B, cols),
            S=S,
            U=U,
            sign_B=sign_B,
            direction=direction,
            a_text=A,
            b_text=B,
        )

    @property
    def r(self) -> int:
        return self.S.dimension

    @property
    def d(self) -> int:
        return self.U.dimension

    @property
    def columns(self) -> list:
        return alpha_names(self.r) + u_names(self.d)

    @property
    def sign(self) -> float:
        return SIGNS[self.sign_B]

    @cached_property
    def program_a(self):
        return compile_program(self.A, self.columns)

    @cached_property
    def program_b(self):
        return compile_program(self.B, self.columns)

    def binding(self, alpha, u) -> dict:
        vals = [float(x) for x in np.atleast_1d(alpha)]
        vals += [float(x) for x in np.atleast_1d(u)]
        if len(vals) != len(self.columns):
            raise ValueError(f"expected {self.r} alpha and {self.d} u coordinates, got {len(vals)} values")
        return dict(zip(self.columns, vals))

    def with_integrands(self, A: str, B: str, sign_B: Optional[str] = None, name: Optional[str] = None):
        """A copy with new integrand texts (used by the metamorphic checks)."""
        return ProblemDefinition.from_text(
            name or self.name, A, B, self.S, self.U, sign_B or self.sign_B, self.direction
        )

    def __eq__(self, other):
        if not isinstance(other, ProblemDefinition):
            return NotImplemented
        return (self.name, self.A, self.B, self.S, self.U, self.sign_B, self.direction) == (
            other.name, other.A, other.B, other.S, other.U, other.sign_B, other.direction
        )

    def __hash__(self):
        return hash((self.name, self.A, self.B, self.S, self.U, self.sign_B, self.direction))


@dataclass
class SignReport:
    samples_checked: int
    violations: list = field(default_factory=list)  # (alpha, u, B value)
    failures: int = 0  # points where B could not be evaluated at all

    @property
    def verdict(self) -> str:
        return "violated" if self.violations else "consistent"

    def to_dict(self):
        return {
            "samples_checked": self.samples_checked,
            "violations": len(self.violations),
            "failures": self.failures,
            "verdict": self.verdict,
            "witnesses": [
                {"alpha": list(a), "u": list(u), "B": b} for a, u, b in self.violations[:5]
            ],
        }


def _eval_at_atoms(p: ProblemDefinition, node: Node, label: str, alpha, psi: MixtureMeasure):
    total = None
    for point, w in psi.atoms:
        try:
            v = evaluate(node, p.binding(alpha, point))
        except DomainError as exc:
            raise EvaluationFailure(f"{label} fails at alpha={list(np.atleast_1d(alpha))}, u={list(point)}: {exc}") from exc
        # start from the first term so a single atom reproduces the integrand exactly
        total = w * v if total is None else total + w * v
    return total


def integral_numerator(p: ProblemDefinition, alpha, psi: MixtureMeasure) -> float:
    """Integral of A(alpha, .) against the mixture ``psi`` (a weighted sum)."""
    return _eval_at_atoms(p, p.A, "A", alpha, psi)


def integral_denominator(p: ProblemDefinition, alpha, psi: MixtureMeasure, zero_tol: float = ZERO_TOL) -> float:
    """Integral of B(alpha, .) against ``psi``; rejects a wrong sign or |value| < zero_tol."""
    value = _eval_at_atoms(p, p.B, "B", alpha, psi)
    if not (value * p.sign > 0) or abs(value) < zero_tol:
        raise DenominatorSignViolation(
            f"denominator {value!r} contradicts declared sign {p.sign_B} at alpha={list(np.atleast_1d(alpha))}"
        )
    return value


def functional_value(p: ProblemDefinition, alpha, psi: MixtureMeasure, zero_tol: float = ZERO_TOL) -> float:
    """The ratio of the two integrals."""
    den = integral_denominator(p, alpha, psi, zero_tol)
    num = integral_numerator(p, alpha, psi)
    return num / den


def sample_pairs(p: ProblemDefinition, n: int, seed, truncation: float = 1e3) -> tuple:
    """``n`` scrambled-Halton points of S x U (U truncated if unbounded; finite U by index)."""
    dims = p.r + (1 if p.U.kind == "finite" else p.d)
    sampler = qmc.Halton(d=dims, scramble=True, seed=np.random.default_rng(seed))
    unit = sampler.random(n)
    lo = np.asarray(p.S.lower, dtype=float)
    hi = np.asarray(p.S.upper, dtype=float)
    alphas = lo + (hi - lo) * unit[:, : p.r]
    if p.U.kind == "finite":
        pts = np.asarray(p.U.points, dtype=float)
        idx = np.minimum((unit[:, p.r] * len(pts)).astype(int), len(pts) - 1)
        us = pts[idx]
    else:
        box = p.U.truncate(truncation)
        ulo = np.asarray(box.lower)
        uhi = np.asarray(box.upper)
        us = ulo + (uhi - ulo) * unit[:, p.r:]
    return alphas, us


def check_sign_constancy(
    p: ProblemDefinition, n_samples: int = 1000, seed=0, truncation: float = 1e3, zero_tol: float = ZERO_TOL
) -> SignReport:
    """Look for points of S x U where B breaks its declared sign (never raises)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    alphas, us = sample_pairs(p, n_samples, seed, truncation)
    X = np.hstack([alphas, us])
    values, status = kernel.eval_batch(p.program_b, X)
    report = SignReport(samples_checked=n_samples)
    for i in range(n_samples):
        if status[i]:
            report.failures += 1
            continue
        v = float(values[i])
        if not (v * p.sign > 0) or abs(v) < zero_tol:
            report.violations.append((tuple(alphas[i].tolist()), tuple(us[i].tolist()), v))
    return report
