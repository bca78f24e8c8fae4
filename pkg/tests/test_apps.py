import numpy as np
import pytest

from fracopt import kernel
from fracopt.apps import age_replacement_problem, catalog_get, catalog_list, cycle_length_expression
from fracopt.errors import InvalidCosts, UnknownEntry
from fracopt.reduction import SolveConfig, optimize

CFG = SolveConfig()


def scan(p, alpha, n=100_000):
    """C(alpha, .) on a uniform grid of the (bounded) control interval."""
    u = np.linspace(p.U.lower[0], p.U.upper[0], n)
    X = np.column_stack([np.full(n, alpha), u])
    a, sa = kernel.eval_batch(p.program_a, X)
    b, sb = kernel.eval_batch(p.program_b, X)
    assert not sa.any() and not sb.any()
    return u, a / b


def test_catalog_list():
    names = catalog_list()
    assert len(names) == 5 and "quadratic_bowl" in names and "age_replacement_weibull" in names
    assert catalog_list() == names


def test_catalog_get_unknown():
    with pytest.raises(UnknownEntry):
        catalog_get("nope")


def test_catalog_examples():
    e = catalog_get("constant_ratio")
    assert (e.problem.a_text, e.problem.b_text) == ("2", "1") and e.known_solution.value == 2
    e = catalog_get("reciprocal_sup")
    assert e.known_solution.classification == "EPSILON_OPTIMAL" and e.known_solution.value == 0
    assert e.problem.U.upper == (float("inf"),)
    e = catalog_get("quadratic_bowl")
    assert (e.known_solution.alpha, e.known_solution.u, e.known_solution.value) == ((1.0,), (2.0,), 0.0)


@pytest.mark.parametrize("name", catalog_list())
def test_known_solutions_reproduced(name):
    e = catalog_get(name)
    ks = e.known_solution
    rep = optimize(e.problem, CFG)
    assert rep.classification == ks.classification
    tp = ks.tol_point or CFG.tol_point
    tv = ks.tol_value or CFG.tol_value
    if ks.alpha is not None:
        np.testing.assert_allclose(rep.best_alpha, ks.alpha, atol=tp)
    if ks.u is not None:
        np.testing.assert_allclose(rep.best_u, ks.u, atol=tp)
    if ks.value is not None:
        got = rep.certificate.sup_estimate if rep.certificate else rep.best_value
        assert abs(got - ks.value) <= tv


def test_quadrature_accuracy():
    p = age_replacement_problem(1.0, 2.0, (0.5, 5.0), 10.0)
    shapes = np.linspace(0.5, 5.0, 10)
    ages = np.geomspace(0.01, 10.0, 12)
    worst = 0.0
    n = 1_000_000
    for a in shapes:
        for u in ages:
            t = (np.arange(n) + 0.5) * (u / n)
            ref = np.exp(-(t**a)).sum() * (u / n)
            got, st = kernel.eval_batch(p.program_b, np.array([[a, u]]))
            assert st[0] == 0
            worst = max(worst, abs(got[0] - ref) / ref)
    assert worst <= 1e-4


def test_cycle_length_expression_nodes():
    assert cycle_length_expression(8).count("exp(") == 8


def test_exponential_lifetimes_replace_at_u_max():
    p = age_replacement_problem(1.0, 10.0, (1.0, 1.0), 10.0)
    u, c = scan(p, 1.0)
    assert np.all(np.diff(c) <= 1e-12)
    rep = optimize(p, CFG)
    assert abs(rep.best_u[0] - 10.0) <= 1e-4 and abs(rep.best_u[0] - u[np.argmin(c)]) <= 1e-4


@pytest.mark.parametrize("shape,u_max", [(0.5, 10.0), (2.5, 1.5), (4.0, 1.2)])
def test_equal_costs_replace_at_u_max(shape, u_max):
    # u_max is kept where the cycle length still grows at double precision
    p = age_replacement_problem(4.0, 4.0, (shape, shape), u_max)
    u, c = scan(p, shape)
    assert u[np.argmin(c)] == u_max
    assert abs(optimize(p, CFG).best_u[0] - u_max) <= 1e-4


def test_weibull_three_interior_minimum():
    p = catalog_get("age_replacement_weibull").problem
    u, c = scan(p, 3.0)
    k = int(np.argmin(c))
    assert 0 < k < len(u) - 1
    rep = optimize(p, CFG)
    assert abs(rep.best_u[0] - u[k]) <= 1e-3 and abs(rep.best_value - c[k]) <= 1e-6


@pytest.mark.parametrize("cp,cf", [(0.0, 1.0), (2.0, 1.0), (-1.0, 3.0), (1.0, float("inf"))])
def test_invalid_costs(cp, cf):
    with pytest.raises(InvalidCosts):
        age_replacement_problem(cp, cf)


def test_invalid_shape_range():
    with pytest.raises(ValueError):
        age_replacement_problem(1.0, 2.0, (0.1, 3.0))
