import math

import numpy as np
import pytest

from fracopt import reduction
from fracopt.errors import DenominatorSignViolation, EvaluationFailure
from fracopt.expr import evaluate
from fracopt.functional import check_sign_constancy, functional_value, integral_denominator, integral_numerator
from fracopt.measures import ControlSpace, MixtureMeasure, degenerate, random_mixture

from conftest import make_problem

BOX = ControlSpace.box([0.0], [10.0])
TWO_ATOMS = MixtureMeasure((((1.0,), 0.5), ((3.0,), 0.5)))


def test_numerator_examples():
    assert integral_numerator(make_problem("2", "1", U=BOX), (0.0,), TWO_ATOMS) == 2.0
    assert integral_numerator(make_problem("u1", "1", U=BOX), (0.0,), TWO_ATOMS) == 2.0
    p = make_problem("alpha1*u1", "1", S=((0.0,), (5.0,)), U=BOX)
    assert integral_numerator(p, (2.0,), degenerate(BOX, 3.0)) == 6.0


def test_denominator_examples():
    assert integral_denominator(make_problem("1", "1", U=BOX), (0.0,), TWO_ATOMS) == 1.0
    assert integral_denominator(make_problem("1", "u1", U=BOX), (0.0,), TWO_ATOMS) == 2.0
    with pytest.raises(DenominatorSignViolation):
        integral_denominator(make_problem("1", "u1-2", U=BOX), (0.0,), degenerate(BOX, 1.0))


def test_denominator_near_zero_rejected():
    p = make_problem("1", "u1*1e-13", U=BOX)
    with pytest.raises(DenominatorSignViolation):
        integral_denominator(p, (0.0,), degenerate(BOX, 1.0))


def test_negative_sign_accepted():
    p = make_problem("1", "-1-u1", U=BOX, sign="negative")
    assert integral_denominator(p, (0.0,), TWO_ATOMS) == -3.0


def test_functional_value_examples():
    p = make_problem("2", "1", S=((-1.0,), (1.0,)), U=BOX)
    for seed in range(5):
        assert functional_value(p, (0.3,), random_mixture(BOX, 4, seed)) == 2.0
    assert functional_value(make_problem("u1", "1", U=BOX), (0.0,), TWO_ATOMS) == 2.0
    # oracle: (0.5*1 + 0.5*9) / (0.5*1 + 0.5*3) by hand
    assert functional_value(make_problem("u1^2", "u1", U=BOX), (0.0,), TWO_ATOMS) == 2.5


def test_evaluation_failure_propagates():
    p = make_problem("log(u1-2)", "1", U=BOX)
    with pytest.raises(EvaluationFailure):
        functional_value(p, (0.0,), TWO_ATOMS)


def test_degenerate_consistency_bit_exact():
    p = make_problem("sin(alpha1*u1) - u1^2/3", "1 + exp(-u1)*alpha1^2", S=((-2.0,), (2.0,)), U=BOX)
    rng = np.random.default_rng(1)
    for _ in range(500):
        a = (float(rng.uniform(-2, 2)),)
        u = (float(rng.uniform(0, 10)),)
        env = p.binding(a, u)
        want = evaluate(p.A, env) / evaluate(p.B, env)
        got = functional_value(p, a, degenerate(BOX, u))
        assert got == want and math.copysign(1, got) == math.copysign(1, want)
        assert reduction.test_function(p, a, u) == want


def test_mixture_lies_between_atom_ratios():
    p = make_problem("alpha1*u1 - u1^2", "1 + u1 + alpha1^2", S=((-1.0,), (3.0,)), U=BOX)
    rng = np.random.default_rng(2)
    for i in range(300):
        a = (float(rng.uniform(-1, 3)),)
        m = random_mixture(BOX, int(rng.integers(1, 6)), seed=i)
        ratios = [reduction.test_function(p, a, pt) for pt, _ in m.atoms]
        v = functional_value(p, a, m)
        assert min(ratios) - 1e-9 <= v <= max(ratios) + 1e-9


def test_consistent_sign_implies_positive_denominators():
    p = make_problem("u1", "2 + sin(u1*alpha1)", S=((0.0,), (4.0,)), U=BOX)
    assert check_sign_constancy(p, 500, seed=0).verdict == "consistent"
    for i in range(200):
        assert integral_denominator(p, (i / 50.0,), random_mixture(BOX, 3, seed=i)) > 0


def test_sign_check_examples():
    rep = check_sign_constancy(make_problem("1", "1+u1^2", U=BOX), 1000, seed=0)
    assert rep.verdict == "consistent" and rep.samples_checked == 1000
    rep = check_sign_constancy(make_problem("1", "u1-5", U=BOX), 1000, seed=0)
    assert rep.verdict == "violated"
    assert rep.violations and all(u[0] < 5 + 1e-12 for _, u, _ in rep.violations)
    assert check_sign_constancy(make_problem("1", "-1", U=BOX, sign="negative"), 1000, seed=0).verdict == "consistent"


def test_sign_check_reproducible_and_unbounded():
    p = make_problem("1", "u1 - 500", U=ControlSpace.box([0.0], [math.inf]))
    r1 = check_sign_constancy(p, 200, seed=4)
    r2 = check_sign_constancy(p, 200, seed=4)
    assert r1.violations == r2.violations and r1.verdict == "violated"
    assert all(u[0] <= 1e3 for _, u, _ in r1.violations)


def test_problem_rejects_undeclared_variables():
    from fracopt.errors import UnknownVariable

    with pytest.raises(UnknownVariable):
        make_problem("u2", "1")
    with pytest.raises(ValueError):
        make_problem("1", "1", sign="zero")
