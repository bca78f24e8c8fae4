import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracopt.errors import OutOfDomain, UnboundedSpace
from fracopt.measures import ControlSpace, MixtureMeasure, ParameterDomain, degenerate, random_mixture, truncated_upper


def test_degenerate_on_box():
    m = degenerate(ControlSpace.box([0.0], [10.0]), 2.0)
    assert m.atoms == (((2.0,), 1.0),)
    assert m.is_degenerate


def test_degenerate_on_finite_space():
    space = ControlSpace.finite([(1.0, 0.0), (0.0, 1.0)])
    assert degenerate(space, (1.0, 0.0)).atoms == (((1.0, 0.0), 1.0),)


def test_degenerate_outside():
    with pytest.raises(OutOfDomain):
        degenerate(ControlSpace.box([0.0], [10.0]), 11.0)


def test_single_atom_mixture_is_degenerate():
    space = ControlSpace.box([0.0], [10.0])
    m = random_mixture(space, 1, seed=3)
    assert m.weights.tolist() == [1.0]
    assert m == degenerate(space, m.atoms[0][0])


def test_random_mixture_deterministic():
    space = ControlSpace.box([0.0, -1.0], [1.0, 1.0])
    assert random_mixture(space, 3, seed=7) == random_mixture(space, 3, seed=7)
    assert random_mixture(space, 3, seed=7) != random_mixture(space, 3, seed=8)


def test_finite_space_merges_duplicates():
    space = ControlSpace.finite([(0.0,), (1.0,)])
    for seed in range(20):
        m = random_mixture(space, 3, seed=seed)
        assert 1 <= len(m) <= 2
        assert abs(math.fsum(m.weights) - 1.0) <= 1e-12
        assert all(space.contains(p) for p, _ in m.atoms)


def test_unbounded_needs_truncation():
    space = ControlSpace.box([1.0], [math.inf])
    with pytest.raises(UnboundedSpace):
        random_mixture(space, 2, seed=0)
    m = random_mixture(space, 2, seed=0, truncation=50.0)
    assert all(1.0 <= p[0] <= 50.0 for p, _ in m.atoms)


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_weights_normalised(k, seed):
    m = random_mixture(ControlSpace.box([0.0], [1.0]), k, seed)
    assert np.all(m.weights >= 0)
    assert abs(math.fsum(m.weights) - 1.0) <= 1e-12


def test_measure_invariants_enforced():
    with pytest.raises(ValueError):
        MixtureMeasure((((0.0,), 0.5),))
    with pytest.raises(ValueError):
        MixtureMeasure((((0.0,), 0.5), ((0.0,), 0.5)))
    with pytest.raises(ValueError):
        MixtureMeasure((((0.0,), 1.5), ((1.0,), -0.5)))
    with pytest.raises(ValueError):
        MixtureMeasure(())
    merged = MixtureMeasure.from_atoms([(0.0,), (0.0,), (1.0,)], [0.25, 0.25, 0.5])
    assert merged.atoms == (((0.0,), 0.5), ((1.0,), 0.5))
    with pytest.raises(OutOfDomain):
        MixtureMeasure.from_atoms([(5.0,)], [1.0], ControlSpace.box([0.0], [1.0]))


def test_space_invariants():
    with pytest.raises(ValueError):
        ControlSpace.box([1.0], [1.0])
    with pytest.raises(ValueError):
        ControlSpace.box([-math.inf], [1.0])
    with pytest.raises(ValueError):
        ControlSpace.finite([(1.0,), (1.0,)])
    with pytest.raises(ValueError):
        ControlSpace.finite([])
    with pytest.raises(ValueError):
        ParameterDomain((0.0,), (math.inf,))
    with pytest.raises(ValueError):
        ParameterDomain((1.0,), (0.0,))
    assert ParameterDomain((1.0,), (1.0,)).contains((1.0,))


def test_truncation():
    assert truncated_upper(0.0, math.inf, 1e3) == 1e3
    assert truncated_upper(2e3, math.inf, 1e3) == 3e3
    assert truncated_upper(0.0, 5.0, 1e3) == 5.0
    space = ControlSpace.box([0.0, 0.0], [2.0, math.inf])
    assert space.unbounded_dims == (1,)
    assert space.truncate(10.0).upper == (2.0, 10.0)
