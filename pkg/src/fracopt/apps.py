"""Catalog of ready-to-run problems, including an age-replacement cost-rate model.

Age replacement: an item with Weibull(shape=alpha, scale=1) lifetime is
replaced preventively at age u (cost cp) or at failure (cost cf >= cp). By the
renewal-reward theorem the long-run cost rate is

    C(alpha, u) = E[cost per cycle] / E[cycle length]
                = (cp + (cf - cp) * F(u)) / integral_0^u R(t) dt,

with F(u) = 1 - exp(-u^alpha) and R = 1 - F. Reading alpha as the lifetime
shape and u as the replacement age is one instantiation among many.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidCosts, UnknownEntry
from .functional import ProblemDefinition
from .measures import ControlSpace, ParameterDomain

QUAD_NODES = 64


@dataclass(frozen=True)
class KnownSolution:
    classification: str
    value: Optional[float] = None  # extremum, or the unattained sup/inf
    alpha: Optional[tuple] = None
    u: Optional[tuple] = None
    tol_point: Optional[float] = None  # overrides SolveConfig.tol_point when comparing
    tol_value: Optional[float] = None


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    problem: ProblemDefinition
    known_solution: Optional[KnownSolution]
    notes: str


def cycle_length_expression(nodes: int = QUAD_NODES) -> str:
    """Expression for integral_0^u1 exp(-t^alpha1) dt as a fixed Gauss-Legendre sum.

    Substituting t = u*s^2 gives 2u * integral_0^1 s*exp(-(u*s^2)^alpha) ds, which
    is smooth enough at s = 0 for alpha >= 0.5 that ``nodes`` points reach ~1e-7
    relative accuracy for alpha in [0.5, 5], u <= 10.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = (x + 1.0) / 2.0
    ws = w / 2.0 * s
    terms = [f"{float(c)!r}*exp(-((u1*{float(q)!r})^alpha1))" for c, q in zip(ws, s * s)]
    return "2*u1*(" + " + ".join(terms) + ")"


def age_replacement_problem(cp: float, cf: float, shape_range=(0.5, 5.0), u_max: float = 10.0, name: str = "age_replacement") -> ProblemDefinition:
    """Long-run cost rate of age replacement, to be minimised over (shape, age)."""
    cp, cf = float(cp), float(cf)
    if not (0 < cp <= cf) or not (math.isfinite(cp) and math.isfinite(cf)):
        raise InvalidCosts(f"need 0 < cp <= cf, got cp={cp}, cf={cf}")
    lo, hi = (float(x) for x in shape_range)
    if not (0.5 <= lo <= hi <= 5.0):
        raise ValueError(f"shape_range must lie in [0.5, 5], got {shape_range}")
    if not (u_max > 0 and math.isfinite(u_max)):
        raise ValueError("u_max must be positive and finite")
    # B(alpha, 0) = 0, so the age axis starts just above zero
    U = ControlSpace.box([u_max / 1000.0], [float(u_max)])
    A = f"{cp!r} + {cf - cp!r}*(1 - exp(-(u1^alpha1)))"
    return ProblemDefinition.from_text(name, A, cycle_length_expression(), ParameterDomain((lo,), (hi,)), U, "positive", "min")


def _entries():
    inf = math.inf
    yield CatalogEntry(
        "constant_ratio",
        ProblemDefinition.from_text(
            "constant_ratio", "2", "1", ParameterDomain((0.0,), (1.0,)), ControlSpace.box([0.0], [1.0]), "positive", "max"
        ),
        KnownSolution("ATTAINED", 2.0, (0.0,), (0.0,)),
        "C = 2 everywhere; every pair is optimal and ties go to the lexicographically smallest, (0, 0).",
    )
    yield CatalogEntry(
        "quadratic_bowl",
        ProblemDefinition.from_text(
            "quadratic_bowl",
            "-( (alpha1-1)^2 + (u1-2)^2 )",
            "1",
            ParameterDomain((-5.0,), (5.0,)),
            ControlSpace.box([-5.0], [5.0]),
            "positive",
            "max",
        ),
        KnownSolution("ATTAINED", 0.0, (1.0,), (2.0,), tol_point=1e-4, tol_value=1e-6),
        "Concave quadratic with unique maximum 0 at (1, 2). Compass search stops near the "
        "optimum to within its final step, so the point is compared at 1e-4.",
    )
    yield CatalogEntry(
        "reciprocal_sup",
        ProblemDefinition.from_text(
            "reciprocal_sup", "-1", "u1", ParameterDomain((0.0,), (1.0,)), ControlSpace.box([1.0], [inf]), "positive", "max"
        ),
        KnownSolution("EPSILON_OPTIMAL", 0.0, tol_value=1e-6),
        "C = -1/u < 0 increases to 0 as u grows, so the sup 0 is not attained; "
        "-1/u > -eps exactly when u > 1/eps.",
    )
    yield CatalogEntry(
        "linear_unbounded",
        ProblemDefinition.from_text(
            "linear_unbounded", "u1", "1", ParameterDomain((0.0,), (1.0,)), ControlSpace.box([0.0], [inf]), "positive", "max"
        ),
        KnownSolution("UNBOUNDED"),
        "C = u has no upper bound on [0, inf).",
    )
    yield CatalogEntry(
        "age_replacement_weibull",
        age_replacement_problem(1.0, 10.0, (3.0, 3.0), 3.0, name="age_replacement_weibull"),
        KnownSolution("ATTAINED", 3.94935029915019, (3.0,), (0.3824555248,), tol_point=1e-5, tol_value=1e-9),
        "Weibull shape 3 (increasing hazard), cp=1, cf=10, ages (0.003, 3]. The cost rate "
        "falls then rises, so the minimum is interior; it solves the renewal-reward first-order "
        "condition h(u)*int_0^u R = F(u) + cp/(cf-cp). Reference from a 1e5-point scan of the "
        "catalog expression refined by a second 1e5-point scan.",
    )


_CATALOG = {e.name: e for e in _entries()}


def catalog_list() -> list:
    return list(_CATALOG)


def catalog_get(name: str) -> CatalogEntry:
    try:
        return _CATALOG[name]
    except KeyError:
        raise UnknownEntry(name) from None
