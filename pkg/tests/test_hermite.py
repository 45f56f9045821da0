import math

import numpy as np
import pytest
from scipy.special import eval_hermite

from nucleartrace.hermite import (
    DecayPreconditionError, NonSummableError, build_basis, default_grid, exp_decay,
    functional_calculus_kernel, ground_projection, hermite_functions, inverse_square,
    multi_indices, nuclearity_criterion, trace_formula_check,
)
from nucleartrace.measure_grid import line_grid

HALF_CSCH_ONE = 0.42545906411966077      # 1 / (2 sinh 1)
PI2_OVER_8 = 1.23370055013616983
SUM_INV_SQ_40 = 1.22760329137610651     # sum_{j <= 40} (2j+1)^-2


@pytest.fixture(scope="module")
def basis20():
    return build_basis(1, 20)


def test_multi_indices_order():
    assert multi_indices(2, 2) == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    assert len(multi_indices(3, 4)) == math.comb(4 + 3, 3)


def test_recurrence_matches_explicit_formula():
    x = np.linspace(-6, 6, 101)
    H = hermite_functions(x, 12)
    for j in range(13):
        c = (2 ** j * math.factorial(j) * math.sqrt(math.pi)) ** -0.5
        np.testing.assert_allclose(H[j], c * eval_hermite(j, x) * np.exp(-x ** 2 / 2), atol=1e-13)


def test_basis_certified(basis20):
    assert basis20.gram_deviation < 1e-12
    assert np.max(basis20.residuals) < 1e-8
    np.testing.assert_array_equal(basis20.eigenvalues, 2 * np.arange(21) + 1)


def test_basis_two_dimensional():
    b = build_basis(2, 6)
    assert len(b) == 28
    assert b.gram_deviation < 1e-12
    assert np.max(b.residuals) < 1e-8
    assert b.eigenvalues[b.indices.index((2, 3))] == 12


def test_decay_precondition():
    with pytest.raises(DecayPreconditionError):
        build_basis(1, 20, line_grid(5.0, 128))
    with pytest.raises(ValueError):
        build_basis(2, 3, line_grid(8.0, 64))


def test_default_grid_widens():
    assert default_grid(1, 20).axes[0].extent == 24.0
    assert default_grid(1, 40).axes[0].extent > 24.0
    build_basis(1, 40, certify=False)


def test_kernel_matches_mehler(basis20):
    # sum_j rho^j phi_j(x) phi_j(y), rho = e^-2, times e^-1 (Mehler's formula)
    b = build_basis(1, 40, certify=False)
    K = functional_calculus_kernel(exp_decay(), b)
    x = b.grid.axes[0].nodes
    X, Y = np.meshgrid(x, x, indexing="ij")
    rho = math.exp(-2)
    mehler = math.exp(-1) / math.sqrt(math.pi * (1 - rho ** 2)) * np.exp(
        -((1 + rho ** 2) * (X ** 2 + Y ** 2) - 4 * rho * X * Y) / (2 * (1 - rho ** 2)))
    np.testing.assert_allclose(K.values.real, mehler, atol=1e-13)


def test_exp_trace(basis20):
    rep = trace_formula_check(exp_decay(), basis20)
    direct = sum(math.exp(-(2 * j + 1)) for j in range(21))
    assert abs(rep.matrix_trace - direct) < 1e-8
    assert abs(rep.eigenvalue_sum - direct) < 1e-14
    assert abs(rep.eigenvalue_sum - HALF_CSCH_ONE) < 1e-6
    assert abs(rep.matrix_trace - HALF_CSCH_ONE) < 1e-6
    assert rep.target == pytest.approx(HALF_CSCH_ONE, rel=1e-15)
    assert rep.residuals["truncated_vs_target"] <= rep.tail_bound + 1e-14  # roundoff


def test_exp_trace_two_dimensional():
    b = build_basis(2, 16)
    rep = trace_formula_check(exp_decay(), b)
    assert abs(rep.matrix_trace - rep.eigenvalue_sum) < 1e-8
    assert rep.target == pytest.approx(HALF_CSCH_ONE ** 2)
    assert rep.residuals["truncated_vs_target"] <= rep.tail_bound + 1e-14  # roundoff


def test_inverse_square_trace():
    b = build_basis(1, 40)
    rep = trace_formula_check(inverse_square(), b)
    assert rep.eigenvalue_sum.real == pytest.approx(SUM_INV_SQ_40, rel=1e-14)
    assert abs(rep.matrix_trace - rep.eigenvalue_sum) < 1e-8
    assert 0 < PI2_OVER_8 - rep.eigenvalue_sum.real <= rep.tail_bound
    with pytest.raises(NonSummableError):
        trace_formula_check(inverse_square(), build_basis(2, 4))


def test_ground_projection(basis20):
    rep = trace_formula_check(ground_projection(1), basis20)
    assert rep.matrix_trace == pytest.approx(1.0, abs=1e-12)
    assert np.count_nonzero(rep.eigenvalues) == 1


def test_criterion_moyal_terms(basis20):
    res = nuclearity_criterion(exp_decay(), basis20, 1.0, 2.0, 2.0, 0.0)
    # ||V_g phi||_2 = sqrt(2 pi) ||phi||_2 ||g||_2 with ||g||_2 = pi^(1/4)
    moyal = math.sqrt(2 * math.pi) * math.pi ** 0.25
    np.testing.assert_allclose(res.norms, moyal, rtol=1e-6)
    np.testing.assert_allclose(res.dual_norms, moyal, rtol=1e-6)
    exact = np.exp(-basis20.eigenvalues) * moyal ** 2
    np.testing.assert_allclose(res.terms, exact, rtol=1e-6)
    assert np.all(np.diff(res.partial_sums) >= 0)
    assert res.partial_sums[-1] - res.partial_sums[-2] < 1e-8


def test_criterion_validation(basis20):
    with pytest.raises(ValueError):
        nuclearity_criterion(exp_decay(), basis20, 1.5, 2, 2, 0)
    with pytest.raises(ValueError):
        nuclearity_criterion(exp_decay(), basis20, 1.0, 0.5, 2, 0)
