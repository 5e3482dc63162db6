"""Numerical kernel: exponentials, eigen machinery, solves, quadrature."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasemix.errors import (
    ComplexResidueError,
    QuadratureError,
    RepeatedEigenvalueError,
    SingularMatrixError,
)
from phasemix.numkernel import (
    EigenSystem,
    eigen,
    excited_decay,
    expm,
    integrate,
    lagrange_coefficient,
    spectral_coefficients,
    solve,
)

TRIANGULAR = np.array([[-2.0, 1.0], [0.0, -1.0]])


def triangular_expm(t):
    # closed form for TRIANGULAR: distinct eigenvalues -2, -1
    return np.array([
        [math.exp(-2 * t), math.exp(-t) - math.exp(-2 * t)],
        [0.0, math.exp(-t)],
    ])


def series_expm(A, t, terms=60):
    out = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, terms):
        term = term @ (A * t) / k
        out = out + term
    return out


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 4.5])
def test_expm_triangular_closed_form(t):
    np.testing.assert_allclose(expm(TRIANGULAR, t), triangular_expm(t),
                               rtol=0, atol=1e-12)


def test_expm_matches_series():
    rng = np.random.default_rng(7)
    A = rng.uniform(-1, 1, size=(4, 4))
    np.testing.assert_allclose(expm(A, 0.8), series_expm(A, 0.8),
                               rtol=1e-12, atol=1e-12)


@given(t=st.floats(0.01, 3.0), s=st.floats(0.01, 3.0))
@settings(max_examples=40, deadline=None)
def test_expm_semigroup(t, s):
    lhs = expm(TRIANGULAR, t) @ expm(TRIANGULAR, s)
    np.testing.assert_allclose(lhs, expm(TRIANGULAR, t + s),
                               rtol=1e-10, atol=1e-12)


def test_expm_derivative_at_zero():
    h = 1e-7
    approx = (expm(TRIANGULAR, h) - np.eye(2)) / h
    np.testing.assert_allclose(approx, TRIANGULAR, atol=1e-6)


def test_eigen_sorted_descending():
    es = eigen(TRIANGULAR)
    assert isinstance(es, EigenSystem)
    np.testing.assert_allclose(es.values.real, [-1.0, -2.0])
    assert es.distinct
    assert es.dominant == pytest.approx(-1.0)


def test_eigen_repeated_flagged():
    es = eigen(np.array([[-1.0, 1.0], [0.0, -1.0]]))
    assert not es.distinct


def test_lagrange_projectors_triangular():
    es = eigen(TRIANGULAR)
    # dominant eigenvalue -1: projector [[0, 1], [0, 1]]
    L1 = lagrange_coefficient(TRIANGULAR, es.values, 0)
    np.testing.assert_allclose(L1, [[0, 1], [0, 1]], atol=1e-12)
    L2 = lagrange_coefficient(TRIANGULAR, es.values, 1)
    np.testing.assert_allclose(L2, [[1, -1], [0, 0]], atol=1e-12)


def test_lagrange_partition_of_identity():
    rng = np.random.default_rng(3)
    A = -np.eye(3) * np.array([1.0, 2.5, 4.0]) + rng.uniform(0, 0.3, (3, 3))
    es = eigen(A)
    assert es.distinct
    total = sum(lagrange_coefficient(A, es.values, p) for p in range(3))
    np.testing.assert_allclose(total, np.eye(3), atol=1e-9)


def test_lagrange_reconstructs_exponential():
    es = eigen(TRIANGULAR)
    t = 0.7
    rebuilt = sum(
        math.exp(es.values[p].real * t) * lagrange_coefficient(
            TRIANGULAR, es.values, p)
        for p in range(2)
    )
    np.testing.assert_allclose(rebuilt, expm(TRIANGULAR, t), atol=1e-12)


def test_lagrange_rejects_repeated():
    A = np.array([[-1.0, 1.0], [0.0, -1.0]])
    es = eigen(A)
    with pytest.raises(RepeatedEigenvalueError):
        lagrange_coefficient(A, es.values, 0)


def test_lagrange_rejects_complex_residue():
    # rotation-heavy matrix: the dominant pair is complex, so its
    # projector is genuinely complex and must be refused
    A = np.array([[-1.0, 5.0], [-5.0, -1.0]])
    es = eigen(A)
    with pytest.raises(ComplexResidueError):
        lagrange_coefficient(A, es.values, 0)


def test_spectral_coefficients_reconstruct_entry():
    # [e^{At}]_{01} = sum_k c_k e^{phi_k t}
    coefs = spectral_coefficients(TRIANGULAR, np.array([1.0, 0.0]),
                                  np.array([0.0, 1.0]))
    t = 1.3
    rebuilt = sum(c.real * math.exp(phi.real * t) for phi, c in coefs)
    assert rebuilt == pytest.approx(expm(TRIANGULAR, t)[0, 1], abs=1e-12)


def test_excited_decay_depends_on_pairing():
    # row sums from state 0 decay like e^{-t} even though its own exit
    # rate is 2; the diagonal entry keeps the full rate
    hit = excited_decay(TRIANGULAR, np.array([1.0, 0.0]), np.ones(2))
    assert hit is not None and hit[0] == pytest.approx(-1.0, abs=1e-12)
    hit = excited_decay(TRIANGULAR, np.array([1.0, 0.0]),
                        np.array([1.0, 0.0]))
    assert hit is not None and hit[0] == pytest.approx(-2.0, abs=1e-12)
    assert hit[1].real == pytest.approx(1.0, abs=1e-12)


def test_excited_decay_none_when_unreachable():
    # [e^{At}]_{10} = 0 for a triangular matrix
    assert excited_decay(TRIANGULAR, np.array([0.0, 1.0]),
                         np.array([1.0, 0.0])) is None


def test_excited_decay_oscillatory_raises():
    A = np.array([[-1.0, 5.0], [-5.0, -1.0]])
    with pytest.raises(ComplexResidueError):
        excited_decay(A, np.ones(2), np.ones(2))


def test_solve_example():
    A = np.array([[-2.0, 1.0], [0.0, -1.0]])
    x = solve(A, np.ones(2))
    np.testing.assert_allclose(x, [-1.0, -1.0], atol=1e-14)


def test_solve_singular_raises():
    with pytest.raises(SingularMatrixError):
        solve(np.zeros((2, 2)), np.ones(2))


def test_integrate_polynomial_exact():
    # Simpson is exact on cubics
    val = integrate(lambda x: x ** 3 - 2 * x, 0.0, 2.0)
    assert val == pytest.approx(0.0, abs=1e-12)


def test_integrate_exponential():
    val = integrate(math.exp, 0.0, 1.0, tol=1e-11)
    assert val == pytest.approx(math.e - 1.0, abs=1e-10)


def test_integrate_oscillatory():
    val = integrate(lambda x: math.sin(10 * x), 0.0, math.pi, tol=1e-10)
    exact = (1 - math.cos(10 * math.pi)) / 10
    assert val == pytest.approx(exact, abs=1e-9)


def test_integrate_depth_exhaustion_reports_best():
    # |x|^0.1 has unbounded derivative at 0; a tiny depth cap must fail
    with pytest.raises(QuadratureError) as err:
        integrate(lambda x: abs(x) ** 0.1, -1.0, 1.0, tol=1e-14, max_depth=3)
    exact = 2 / 1.1
    assert err.value.best == pytest.approx(exact, rel=0.05)


@given(a=st.floats(-2.0, 2.0), b=st.floats(-2.0, 2.0))
@settings(max_examples=30, deadline=None)
def test_integrate_linearity(a, b):
    lo, hi = sorted((a, b))
    if hi - lo < 1e-6:
        return
    val = integrate(lambda x: 3.0 * x + 1.0, lo, hi)
    exact = 1.5 * (hi ** 2 - lo ** 2) + (hi - lo)
    assert val == pytest.approx(exact, abs=1e-9)
