"""Test-function reduction solver.

The extremum of the ratio of integrals over (alpha, Psi) is sought through the
pointwise ratio C(alpha, u) = A/B over S x U: a full-factorial grid, then a
multistart compass search, then (for U with infinite edges) a sequence of
growing truncations whose incumbents decide between an attained extremum, an
unattained but finite supremum, and divergence.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

import numpy as np

from . import kernel
from .errors import DenominatorSignViolation, DomainError, EvaluationFailure, IllPosedProblem, NotApplicable, SignViolation
from .expr import evaluate
from .functional import ProblemDefinition, check_sign_constancy
from .measures import ControlSpace

ATTAINED = "ATTAINED"
EPSILON_OPTIMAL = "EPSILON_OPTIMAL"
UNBOUNDED = "UNBOUNDED"
INDETERMINATE = "INDETERMINATE"

# successive incumbent gains must shrink at least this fast to count as converging
CONTRACTION = 0.5


@dataclass(frozen=True)
class SolveConfig:
    direction: Optional[str] = None  # None: the problem's own direction
    grid_per_dim: int = 33
    multistarts: int = 16
    refine_iters: int = 200
    tol_value: float = 1e-9
    tol_point: float = 1e-6
    epsilon: float = 1e-3
    divergence_threshold: float = 1e6
    truncation_bound: float = 1e3
    truncation_growth: float = 10.0
    growth_rounds: int = 3
    max_extra_rounds: int = 12
    max_grid_points: int = 1_000_000
    sign_samples: int = 1000
    zero_tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.direction not in (None, "max", "min"):
            raise ValueError(f"direction must be 'max' or 'min', got {self.direction!r}")
        for name in ("grid_per_dim", "multistarts", "refine_iters", "growth_rounds", "sign_samples", "max_grid_points"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.grid_per_dim < 2:
            raise ValueError("grid_per_dim must be >= 2")
        if self.max_extra_rounds < 0:
            raise ValueError("max_extra_rounds must be >= 0")
        for name in ("tol_value", "tol_point", "epsilon", "divergence_threshold", "truncation_bound", "zero_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not self.truncation_growth > 1:
            raise ValueError("truncation_growth must be > 1")

    @classmethod
    def from_dict(cls, d: dict) -> "SolveConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        kw = {}
        for k, v in d.items():
            if k == "direction" or v is None:
                kw[k] = v
            elif known[k].type == "int":
                if float(v) != int(v):
                    raise ValueError(f"{k} must be an integer")
                kw[k] = int(v)
            else:
                kw[k] = float(v)
        return cls(**kw)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EpsilonCertificate:
    epsilon: float
    alpha_eps: tuple
    u_eps: tuple
    value: float
    sup_estimate: float
    direction: str = "max"

    def holds(self) -> bool:
        if self.direction == "max":
            return self.sup_estimate - self.epsilon < self.value <= self.sup_estimate
        return self.sup_estimate <= self.value < self.sup_estimate + self.epsilon

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "alpha": list(self.alpha_eps),
            "u": list(self.u_eps),
            "value": self.value,
            "sup_estimate": self.sup_estimate,
            "direction": self.direction,
        }


@dataclass
class DivergenceWitness:
    sequence: list  # (alpha_n, u_n, value_n)
    direction: str = "max"

    def is_valid(self, threshold: float) -> bool:
        vals = [v for _, _, v in self.sequence]
        if len(vals) < 3 or abs(vals[-1]) < threshold:
            return False
        sgn = 1.0 if self.direction == "max" else -1.0
        return all(sgn * b > sgn * a and abs(b) > abs(a) for a, b in zip(vals, vals[1:]))

    def to_dict(self):
        return {
            "direction": self.direction,
            "sequence": [{"alpha": list(a), "u": list(u), "value": v} for a, u, v in self.sequence],
        }


@dataclass
class RoundResult:
    bound: Optional[float]
    alpha: tuple
    u: tuple
    value: float
    at_boundary: bool

    def to_dict(self):
        return {"bound": self.bound, "alpha": list(self.alpha), "u": list(self.u), "value": self.value, "at_boundary": self.at_boundary}


@dataclass
class SolveReport:
    classification: str
    direction: str
    best_alpha: tuple
    best_u: tuple
    best_value: float
    certificate: Optional[EpsilonCertificate] = None
    witness: Optional[DivergenceWitness] = None
    evaluations: int = 0
    skipped_sign: int = 0
    skipped_failure: int = 0
    rounds: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    sign_check: Optional[object] = None  # SignReport from the pre-solve check

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "direction": self.direction,
            "best_alpha": list(self.best_alpha),
            "best_u": list(self.best_u),
            "best_value": self.best_value,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "witness": None if self.witness is None else self.witness.to_dict(),
            "evaluations": self.evaluations,
            "skipped_sign": self.skipped_sign,
            "skipped_failure": self.skipped_failure,
            "rounds": [r.to_dict() for r in self.rounds],
            "trace": self.trace,
            "notes": list(self.notes),
        }


def test_function(p: ProblemDefinition, alpha, u, zero_tol: float = 1e-12) -> float:
    """C(alpha, u) = A(alpha, u) / B(alpha, u), with B's declared sign enforced."""
    binding = p.binding(alpha, u)
    try:
        b = evaluate(p.B, binding)
    except DomainError as exc:
        raise EvaluationFailure(f"B fails at {binding}: {exc}") from exc
    if not (b * p.sign > 0) or abs(b) < zero_tol:
        raise DenominatorSignViolation(f"B = {b!r} contradicts declared sign {p.sign_B} at {binding}")
    try:
        a = evaluate(p.A, binding)
    except DomainError as exc:
        raise EvaluationFailure(f"A fails at {binding}: {exc}") from exc
    c = a / b
    if not math.isfinite(c):
        raise EvaluationFailure(f"C overflows at {binding}")
    return c


test_function.__test__ = False  # keep pytest from collecting it


class _Evaluator:
    """Batched C evaluation with bookkeeping of skipped points."""

    def __init__(self, p: ProblemDefinition, zero_tol: float):
        self.p = p
        self.zero_tol = zero_tol
        self.evaluations = 0
        self.skipped_sign = 0
        self.skipped_failure = 0

    def __call__(self, X):
        values, status = kernel.eval_ratio(self.p.program_a, self.p.program_b, X, self.p.sign, self.zero_tol)
        self.evaluations += len(X)
        self.skipped_sign += int(np.count_nonzero(status == 3))
        self.skipped_failure += int(np.count_nonzero((status == 1) | (status == 2)))
        return values, status == 0


def _order(scores, X):
    """Indices sorted by descending score, ties by lexicographically smallest row."""
    keys = [X[:, j] for j in range(X.shape[1] - 1, -1, -1)] + [-scores]
    return np.lexsort(keys)


def _axes(p: ProblemDefinition, space: ControlSpace, per_dim: int):
    axes = []
    for lo, hi in zip(p.S.lower, p.S.upper):
        axes.append(np.array([lo]) if lo == hi else np.linspace(lo, hi, per_dim))
    if space.kind == "box":
        axes += [np.linspace(lo, hi, per_dim) for lo, hi in zip(space.lower, space.upper)]
    return axes


def _grid(p: ProblemDefinition, space: ControlSpace, cfg: SolveConfig):
    per_dim = cfg.grid_per_dim
    n_cont = sum(lo != hi for lo, hi in zip(p.S.lower, p.S.upper)) + (space.dimension if space.kind == "box" else 0)
    n_fixed = len(space.points) if space.kind == "finite" else 1
    while per_dim > 2 and n_fixed * per_dim ** n_cont > cfg.max_grid_points:
        per_dim -= 1
    axes = _axes(p, space, per_dim)
    if axes:
        mesh = np.meshgrid(*axes, indexing="ij")
        G = np.stack([m.ravel() for m in mesh], axis=1)
    else:
        G = np.zeros((1, 0))
    if space.kind == "finite":
        pts = np.asarray(space.points, dtype=float)
        G = np.hstack([np.repeat(G, len(pts), axis=0), np.tile(pts, (len(G), 1))])
    return G, axes, per_dim


def _pattern_search(ev, x0, score0, lo, hi, steps, active, s, cfg):
    x = x0.copy()
    score = score0
    steps = steps.copy()
    dims = np.flatnonzero(active)
    moves = []
    for _ in range(cfg.refine_iters):
        if np.all(steps[dims] <= 1e-3 * cfg.tol_point * np.maximum(1.0, np.abs(x[dims]))):
            break
        polls = []
        for i in dims:
            for sgn in (-1.0, 1.0):
                y = x.copy()
                y[i] = min(max(x[i] + sgn * steps[i], lo[i]), hi[i])
                if y[i] != x[i]:
                    polls.append(y)
        if not polls:
            steps *= 0.5
            continue
        P = np.asarray(polls)
        values, ok = ev(P)
        if np.any(ok):
            P, values = P[ok], values[ok]
            sc = s * values
            k = _order(sc, P)[0]
            if sc[k] > score:
                x, score = P[k].copy(), float(sc[k])
                moves.append((x.copy(), score))
                continue
        steps *= 0.5
    return x, score, moves


def _solve_space(p, space, cfg, s, ev, round_no, trace):
    """Grid + multistart compass search on one (bounded) control space."""
    G, axes, per_dim = _grid(p, space, cfg)
    values, ok = ev(G)
    n_bad = len(G) - int(np.count_nonzero(ok))
    if n_bad * 2 > len(G):
        raise IllPosedProblem(f"C could not be evaluated (or B broke its sign) at {n_bad} of {len(G)} grid points")
    Gv, sv = G[ok], s * values[ok]
    order = _order(sv, Gv)
    starts = order[: cfg.multistarts]

    r = p.r
    lo = np.concatenate([np.asarray(p.S.lower, float), np.asarray(space.lower if space.kind == "box" else np.zeros(p.d), float)])
    hi = np.concatenate([np.asarray(p.S.upper, float), np.asarray(space.upper if space.kind == "box" else np.zeros(p.d), float)])
    active = hi > lo
    if space.kind == "finite":
        active[r:] = False
    steps = np.where(active, (hi - lo) / (per_dim - 1), 0.0)

    best_x, best_score = Gv[order[0]].copy(), float(sv[order[0]])
    trace.append(_trace_entry(round_no, "grid", best_x, s * best_score, r))
    results = []
    for k in starts:
        x, score, moves = _pattern_search(ev, Gv[k], float(sv[k]), lo, hi, steps, active, s, cfg)
        results.append((x, score))
        for mx, msc in moves:
            if msc > best_score:
                best_x, best_score = mx, msc
                trace.append(_trace_entry(round_no, "search", mx, s * msc, r))
    X = np.asarray([x for x, _ in results])
    sc = np.asarray([score for _, score in results])
    k = _order(sc, X)[0]
    return X[k], float(sc[k])


def _trace_entry(round_no, phase, x, value, r):
    return {"round": round_no, "phase": phase, "alpha": x[:r].tolist(), "u": x[r:].tolist(), "value": float(value)}


def _at_boundary(space: ControlSpace, truncated: ControlSpace, u, tol_point: float) -> bool:
    for i in space.unbounded_dims:
        hi = truncated.upper[i]
        if hi - u[i] <= tol_point * max(1.0, abs(hi)):
            return True
    return False


def _witness_suffix(rounds, s):
    """Longest tail of round incumbents that is strictly monotone in direction and in |value|."""
    seq = [rounds[-1]]
    for rr in reversed(rounds[:-1]):
        nxt = seq[0]
        if s * nxt.value > s * rr.value and abs(nxt.value) > abs(rr.value):
            seq.insert(0, rr)
        else:
            break
    return seq


def _classify(rounds, cfg, s):
    """Return (classification, payload) from the per-truncation incumbents, or (None, None) to keep growing."""
    r1, r2 = rounds[-2], rounds[-1]
    v1, v2 = s * r1.value, s * r2.value
    if not r1.at_boundary and not r2.at_boundary and abs(v2 - v1) <= cfg.tol_value * max(1.0, abs(r2.value)):
        return ATTAINED, None
    scores = [s * rr.value for rr in rounds]
    gains = np.diff(scores)
    if r2.at_boundary and r1.at_boundary and np.all(gains > 0):
        if len(gains) >= 2 and all(g2 <= CONTRACTION * g1 for g1, g2 in zip(gains, gains[1:])):
            g1, g2 = gains[-2], gains[-1]
            rest = g2 * g2 / (g1 - g2)  # geometric tail of the remaining gains
            if rest < cfg.epsilon:
                return EPSILON_OPTIMAL, s * (v2 + rest)
            return None, None
        seq = _witness_suffix(rounds, s)
        if len(seq) >= 3 and abs(r2.value) >= cfg.divergence_threshold:
            return UNBOUNDED, seq
        return None, None
    return INDETERMINATE, None


def optimize(p: ProblemDefinition, cfg: SolveConfig = SolveConfig()) -> SolveReport:
    """Globally optimise C over S x U and classify the extremal problem."""
    direction = cfg.direction or p.direction
    s = 1.0 if direction == "max" else -1.0
    sign_report = check_sign_constancy(p, cfg.sign_samples, cfg.seed, cfg.truncation_bound, cfg.zero_tol)
    if sign_report.verdict != "consistent":
        raise SignViolation(sign_report)

    ev = _Evaluator(p, cfg.zero_tol)
    trace: list = []
    rounds: list = []
    r = p.r

    if p.U.is_bounded:
        x, _ = _solve_space(p, p.U, cfg, s, ev, 0, trace)
        classification, payload = ATTAINED, None
        rounds.append(RoundResult(None, tuple(x[:r].tolist()), tuple(x[r:].tolist()), 0.0, False))
    else:
        classification = payload = None
        n_max = 1 + cfg.growth_rounds + cfg.max_extra_rounds
        for k in range(n_max):
            bound = cfg.truncation_bound * cfg.truncation_growth ** k
            space = p.U.truncate(bound)
            x, score = _solve_space(p, space, cfg, s, ev, k, trace)
            u = tuple(x[r:].tolist())
            rounds.append(RoundResult(bound, tuple(x[:r].tolist()), u, s * score, _at_boundary(p.U, space, u, cfg.tol_point)))
            if k < cfg.growth_rounds:
                continue
            classification, payload = _classify(rounds, cfg, s)
            if classification is not None:
                break
        if classification is None:
            classification = INDETERMINATE

    last = rounds[-1]
    best_value = test_function(p, last.alpha, last.u, cfg.zero_tol)
    for rr in rounds:
        rr.value = test_function(p, rr.alpha, rr.u, cfg.zero_tol)
    report = SolveReport(
        classification=classification,
        direction=direction,
        best_alpha=last.alpha,
        best_u=last.u,
        best_value=best_value,
        evaluations=ev.evaluations,
        skipped_sign=ev.skipped_sign,
        skipped_failure=ev.skipped_failure,
        rounds=rounds if not p.U.is_bounded else [],
        trace=trace,
        sign_check=sign_report,
    )
    if classification == EPSILON_OPTIMAL:
        sup = float(payload)
        if s * sup < s * best_value:
            sup = best_value
        report.certificate = EpsilonCertificate(cfg.epsilon, last.alpha, last.u, best_value, sup, direction)
    elif classification == UNBOUNDED:
        report.witness = DivergenceWitness([(rr.alpha, rr.u, rr.value) for rr in payload], direction)
    elif classification == INDETERMINATE:
        report.notes.append("truncation rounds disagree: neither a stable interior extremum, a converging boundary escape, nor divergence")
    if ev.skipped_sign:
        report.notes.append(f"{ev.skipped_sign} points skipped where B broke its declared sign")
    return report


def epsilon_certificate(p: ProblemDefinition, cfg: SolveConfig = SolveConfig(), epsilon: Optional[float] = None) -> EpsilonCertificate:
    """A pair whose degenerate-measure value is within ``epsilon`` of the extremum estimate."""
    if epsilon is not None:
        cfg = replace(cfg, epsilon=float(epsilon))
    report = optimize(p, cfg)
    if report.classification == EPSILON_OPTIMAL:
        return report.certificate
    if report.classification == ATTAINED:
        return EpsilonCertificate(cfg.epsilon, report.best_alpha, report.best_u, report.best_value, report.best_value, report.direction)
    raise NotApplicable(f"no epsilon certificate for a problem classified {report.classification}")


def divergence_witness(p: ProblemDefinition, cfg: SolveConfig = SolveConfig()) -> DivergenceWitness:
    """Incumbents of growing truncations whose values diverge."""
    report = optimize(p, cfg)
    if report.classification != UNBOUNDED:
        raise NotApplicable(f"no divergence witness for a problem classified {report.classification}")
    return report.witness
