import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nucleartrace.measure_grid import Axis, ProductGrid, SampledFunction, WeightFunction, torus_grid
from nucleartrace.mixed_norm import mixed_norm
from nucleartrace.nuclear import (
    DimensionCapError, MixedNormSpace, NuclearRepresentation, VariableExponentSpace, apply, kernel,
    quadrature_matrix, quasinorm, quasinorm_terms, sorted_eigenvalues, trace_by_eigenvalues,
    trace_by_pairing,
)
from nucleartrace.variable_exponent import VariableExponent

from conftest import random_complex


def char(grid, k):
    return SampledFunction.from_callable(grid, lambda x: np.exp(2j * np.pi * k * x))


def random_rep(rng, grid, rank):
    g = [SampledFunction(grid, random_complex(rng, grid.shape)) for _ in range(rank)]
    h = [SampledFunction(grid, random_complex(rng, grid.shape)) for _ in range(rank)]
    return NuclearRepresentation(g, h)


def test_rank_one_character():
    grid = torus_grid(32)
    T = NuclearRepresentation([char(grid, 1)], [char(grid, -1)])
    assert abs(trace_by_pairing(T) - 1) < 1e-14
    et = trace_by_eigenvalues(T)
    assert abs(et.eigenvalues[0] - 1) < 1e-12
    assert np.all(np.abs(et.eigenvalues[1:]) < 1e-12)
    # T e_1 = e_1, T e_2 = 0
    np.testing.assert_allclose(apply(T, char(grid, 1)).values, char(grid, 1).values, atol=1e-13)
    np.testing.assert_allclose(apply(T, char(grid, 2)).values, 0, atol=1e-13)


def test_projection_trace_is_rank():
    grid = torus_grid(32)
    ks = [-2, 0, 3, 5]
    T = NuclearRepresentation([char(grid, k) for k in ks], [char(grid, -k) for k in ks])
    assert trace_by_pairing(T) == pytest.approx(4.0, abs=1e-13)
    ev = trace_by_eigenvalues(T).eigenvalues
    np.testing.assert_allclose(ev[:4], 1.0, atol=1e-12)


def test_apply_matches_matrix(rng):
    grid = ProductGrid((Axis.uniform(0, 2, 7), Axis.periodic_uniform(5)))
    T = random_rep(rng, grid, 3)
    f = SampledFunction(grid, random_complex(rng, grid.shape))
    M = quadrature_matrix(T)
    np.testing.assert_allclose(apply(T, f).values.ravel(), M @ f.values.ravel(), rtol=1e-12)


def test_kernel(rng):
    grid = torus_grid(6)
    T = random_rep(rng, grid, 2)
    K = kernel(T)
    assert K.grid.shape == (6, 6)
    expected = sum(np.outer(g.values, h.values) for g, h in zip(T.g, T.h))
    np.testing.assert_allclose(K.values, expected)


@given(st.integers(0, 2 ** 31), st.integers(1, 10), st.integers(2, 40))
@settings(max_examples=60, deadline=None)
def test_trace_equals_eigenvalue_sum(seed, rank, n):
    rng = np.random.default_rng(seed)
    grid = ProductGrid((Axis.uniform(0, rng.uniform(0.5, 3), n, "midpoint"),))
    T = random_rep(rng, grid, rank)
    pair = trace_by_pairing(T)
    et = trace_by_eigenvalues(T)
    scale = max(1.0, abs(pair))
    assert abs(pair - et.eigenvalue_sum) <= 1e-8 * scale
    assert abs(et.matrix_trace - pair) <= 1e-12 * scale
    # at most `rank` eigenvalues are nonzero
    assert np.all(np.abs(et.eigenvalues[min(rank, n):]) <= 1e-8 * np.abs(et.eigenvalues[0]))


def test_eigenvalues_sorted_by_modulus(rng):
    M = random_complex(rng, (12, 12))
    ev = sorted_eigenvalues(M)
    assert np.all(np.diff(np.abs(ev)) <= 1e-14)
    assert ev.sum() == pytest.approx(np.trace(M), rel=1e-12)


def test_dimension_cap(rng):
    grid = torus_grid(20, 2)
    T = random_rep(rng, grid, 1)
    with pytest.raises(DimensionCapError):
        quadrature_matrix(T, dimension_cap=399)
    assert quadrature_matrix(T, dimension_cap=400).shape == (400, 400)


def test_validation(rng):
    a, b = torus_grid(4), torus_grid(6)
    f = SampledFunction.constant(a)
    with pytest.raises(ValueError):
        NuclearRepresentation([f], [])
    with pytest.raises(ValueError):
        NuclearRepresentation([f], [f], r=1.5)
    with pytest.raises(ValueError):
        NuclearRepresentation([f, SampledFunction.constant(b)], [f, f])
    T = NuclearRepresentation([f], [SampledFunction.constant(b)])
    with pytest.raises(ValueError):
        trace_by_pairing(T)
    with pytest.raises(ValueError):
        apply(T, f)


def test_quasinorm_rank_one_l2():
    grid = torus_grid(16)
    g, h = char(grid, 2) * 3.0, char(grid, -2) * 0.5
    space = MixedNormSpace((2.0,))
    T = NuclearRepresentation([g], [h], 1.0, space, space)
    assert quasinorm(T) == pytest.approx(1.5, rel=1e-13)
    assert quasinorm(T, 0.5) == pytest.approx(1.5 ** 0.5, rel=1e-13)


def test_quasinorm_dual_space(rng):
    grid = torus_grid(8, 2)
    w = WeightFunction(grid, np.exp(rng.uniform(-1, 1, grid.shape)))
    src = MixedNormSpace((1.5, 3.0), w)
    tgt = MixedNormSpace((2.0, 2.0))
    T = random_rep(rng, grid, 3)
    T = NuclearRepresentation(T.g, T.h, 2 / 3, src, tgt)
    terms = quasinorm_terms(T)
    expected = [(mixed_norm(g, [2, 2]) * mixed_norm(h, [3.0, 1.5], w.inverse())) ** (2 / 3) for g, h in zip(T.g, T.h)]
    np.testing.assert_allclose(terms, expected, rtol=1e-12)
    assert quasinorm(T.concat(T)) == pytest.approx(2 * quasinorm(T), rel=1e-13)


def test_variable_exponent_space(rng):
    grid = torus_grid(8)
    space = VariableExponentSpace(VariableExponent(grid, rng.uniform(1, 3, 8)))
    T = NuclearRepresentation([SampledFunction.constant(grid)], [SampledFunction.constant(grid)], 1.0, space, space)
    # ||1||_{p(.)} = 1 on a unit-measure grid for every exponent
    assert quasinorm(T) == pytest.approx(1.0, rel=1e-12)
    assert space.describe()["kind"] == "variable"


def test_quasinorm_needs_descriptors(rng):
    with pytest.raises(ValueError):
        quasinorm(random_rep(rng, torus_grid(4), 1))
