import math

import numpy as np
import pytest

from fracopt import oracle
from fracopt.apps import catalog_get
from fracopt.errors import TooLarge
from fracopt.measures import ControlSpace
from fracopt.oracle import FiniteInstance, simplex_lfp_value, verify_vertex_optimality

from conftest import make_problem


def test_simplex_examples():
    v, w = simplex_lfp_value(FiniteInstance((1, 5, 3), (2, 2, 2)))
    assert v == 2.5 and tuple(w) == (0, 1, 0)
    v, w = simplex_lfp_value(FiniteInstance((1, 1), (1, 2)))
    assert v == 1.0 and tuple(w) == (1, 0)
    v, w = simplex_lfp_value(FiniteInstance((3,), (4,)))
    assert v == 0.75 and tuple(w) == (1,)


def test_simplex_min_direction():
    v, _ = simplex_lfp_value(FiniteInstance((1, 5, 3), (2, 1, 4), "min"))
    assert v == 0.5


def test_barycentric_grid():
    g = oracle.barycentric_grid(3, 4)
    assert len(g) == math.comb(6, 2)
    np.testing.assert_allclose(g.sum(axis=1), 1.0)
    assert len({tuple(r) for r in g}) == len(g)


def test_too_large():
    with pytest.raises(TooLarge):
        simplex_lfp_value(FiniteInstance(tuple(range(17)), (1.0,) * 17))


def test_instance_validation():
    with pytest.raises(ValueError):
        FiniteInstance((1, 2), (1, -1))
    with pytest.raises(ValueError):
        FiniteInstance((1,), (1, 2))


def test_vertex_optimality_examples():
    assert verify_vertex_optimality(FiniteInstance((1, 5, 3), (2, 2, 2)))
    assert verify_vertex_optimality(FiniteInstance((7,), (-2,)))
    rng = np.random.default_rng(0)
    for _ in range(40):
        assert verify_vertex_optimality(oracle.random_instance(rng), n_random=5000)


def test_flat_instance_and_grid_midpoint():
    inst = FiniteInstance((0.0, 0.0), (1.0, 1.0))
    v, _ = simplex_lfp_value(inst)
    assert v == 0.0
    assert (oracle.barycentric_grid(2, 50)[:, 0] == 0.5).any()


def test_instance_problem_round_trip():
    inst = FiniteInstance((1.5, -2.0, 4.0), (0.5, 2.0, 1.0), "min")
    p = oracle.instance_problem(inst)
    back = oracle.instance_from_problem(p, (0.0,))
    assert back == inst


def test_atom_range_examples():
    rep = oracle.check_lemma1(make_problem("2", "1"), 20, 20)
    assert rep.max_violation == 0 and rep.violations == 0 and rep.verdict == "holds"
    rep = oracle.check_lemma1(catalog_get("quadratic_bowl").problem, 100, 100)
    assert rep.violations == 0 and rep.max_violation <= 1e-9


def test_atom_range_catches_a_broken_bound(monkeypatch):
    # sabotage the ratio so mixture values leave the atom range
    monkeypatch.setattr(oracle, "_ratio_of_sums", lambda W, av, bv: (W * av).sum(-1) / (W * bv).sum(-1) + 1.0)
    rep = oracle.check_lemma1(make_problem("u1", "1", U=ControlSpace.box([0.0], [1.0])), 5, 5)
    assert rep.verdict == "violated" and rep.violations == 25


def test_violation_counts_monotone_in_samples(monkeypatch):
    monkeypatch.setattr(oracle, "_ratio_of_sums", lambda W, av, bv: (W * av).sum(-1) / (W * bv).sum(-1) * 1.1)
    p = make_problem("u1 - 0.5", "1", U=ControlSpace.box([0.0], [1.0]))
    counts = [oracle.check_lemma1(p, 10, n).violations for n in (1, 10, 100, 1000)]
    assert counts == sorted(counts) and counts[-1] > 0
    ok = make_problem("u1", "1+u1", U=ControlSpace.box([0.0], [1.0]))
    monkeypatch.undo()
    assert [oracle.check_lemma1(ok, 10, n).violations for n in (10, 10_000 // 10)] == [0, 0]


def test_degenerate_sup_examples():
    assert oracle.check_lemma2_sup(catalog_get("quadratic_bowl").problem)
    deg, mix = oracle.lemma2_sups(make_problem("2", "1"))
    assert deg == mix == 2.0
    p = make_problem("-1", "u1", U=ControlSpace.box([1.0], [100.0]))
    deg, mix = oracle.lemma2_sups(p)
    assert deg >= mix and abs(deg + 0.01) < 1e-3 and abs(mix + 0.01) < 2e-3
    assert oracle.check_lemma2_sup(p)


def test_degenerate_sup_min_direction():
    p = make_problem("u1^2 + 1", "1", U=ControlSpace.box([-1.0], [1.0]), direction="min")
    deg, mix = oracle.lemma2_sups(p)
    assert deg <= mix and deg < 1.001


def test_mixture_samples_deterministic():
    p = catalog_get("age_replacement_weibull").problem
    v1, a1 = oracle.sample_mixture_values(p, 200, seed=4)
    v2, a2 = oracle.sample_mixture_values(p, 200, seed=4)
    assert np.array_equal(v1, v2) and np.array_equal(a1, a2)
