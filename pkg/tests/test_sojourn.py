"""Residual lifetimes and expected state occupation times."""

import numpy as np
import pytest

from phasemix import build_mixture
from phasemix.errors import OutOfSupportError
from phasemix.mixture import conditional_transition, information_state
from phasemix.numkernel import integrate
from phasemix.sojourn import (
    OccupationQuery,
    expected_occupation,
    residual_lifetime,
)

# residual lifetime of the married state over age, frozen from an
# independent run of the two resolvent solves
RESIDUAL_AT_0 = 13.693201831630857
RESIDUAL_AT_30 = 21.783927583584184


def test_residual_scalar(scalar_half):
    info = information_state(scalar_half, 0, 0.0)
    # half weight on rate 1/2 (mean 2), half on rate 1 (mean 1)
    assert residual_lifetime(scalar_half, info) == pytest.approx(1.5, rel=1e-12)


def test_residual_u_bend(marital):
    r0 = residual_lifetime(marital, information_state(marital, 1, 0.0))
    r1 = residual_lifetime(marital, information_state(marital, 1, 1.01))
    r30 = residual_lifetime(marital, information_state(marital, 1, 30.0))
    assert r0 == pytest.approx(RESIDUAL_AT_0, rel=1e-12)
    assert r30 == pytest.approx(RESIDUAL_AT_30, rel=1e-12)
    # non-monotone: a dip below the newlywed value before climbing
    assert r1 < r0 < r30


def test_residual_flat_when_homogeneous(marital_homogeneous):
    vals = [residual_lifetime(marital_homogeneous,
                              information_state(marital_homogeneous, 1, a))
            for a in (0.0, 1.0, 10.0, 30.0)]
    assert max(vals) - min(vals) < 1e-10


def test_occupation_matches_quadrature(marital):
    info = information_state(marital, 1, 4.0)
    for target in (1, 2, 4):  # married, separated, dead
        q = OccupationQuery(info=info, target=target, until=12.0)
        got = expected_occupation(marital, q)
        want = integrate(
            lambda s: conditional_transition(marital, info, s - 4.0)[target],
            4.0, 12.0, tol=1e-10)
        assert got == pytest.approx(want, abs=1e-6)


def test_occupation_window_conservation(marital):
    # time in all states over a window is the window length
    info = information_state(marital, 1, 4.0)
    total = sum(
        expected_occupation(marital, OccupationQuery(info=info, target=k,
                                                     until=9.0))
        for k in range(marital.n_transient + marital.n_absorbing)
    )
    assert total == pytest.approx(5.0, abs=1e-8)


def test_occupation_infinite_transient_sums_to_residual(marital):
    info = information_state(marital, 1, 4.0)
    total = sum(
        expected_occupation(
            marital, OccupationQuery(info=info, target=k, until=np.inf))
        for k in range(marital.n_transient)
    )
    assert total == pytest.approx(residual_lifetime(marital, info), abs=1e-8)


def test_occupation_absorbing_infinite_rejected(marital):
    info = information_state(marital, 1, 4.0)
    with pytest.raises(OutOfSupportError):
        expected_occupation(
            marital, OccupationQuery(info=info, target=4, until=np.inf))


def test_occupation_query_validates(marital):
    info = information_state(marital, 1, 4.0)
    with pytest.raises(OutOfSupportError):
        OccupationQuery(info=info, target=1, until=3.0)  # window ends early
    with pytest.raises(OutOfSupportError):
        OccupationQuery(info=info, target=-1, until=9.0)
    with pytest.raises(OutOfSupportError):
        expected_occupation(
            marital, OccupationQuery(info=info, target=9, until=9.0))


def test_occupation_zero_window(marital):
    info = information_state(marital, 1, 4.0)
    q = OccupationQuery(info=info, target=1, until=4.0)
    assert expected_occupation(marital, q) == 0.0


def test_zero_speed_state_finite_window_works():
    # a frozen state makes the scaled block singular; the finite-window
    # integrals must still work while the infinite ones refuse
    T = np.array([[-1.0, 0.5], [0.2, -0.7]])
    model = build_mixture(T, speed=[1.5, 0.0], initial=[0.6, 0.4],
                          scaled_weight=0.5, require_absorbing=False)
    info = information_state(model, 0, 0.0, regime="initial")
    q = OccupationQuery(info=info, target=1, until=5.0)
    val = expected_occupation(model, q)
    want = integrate(
        lambda s: conditional_transition(model, info, s)[1], 0.0, 5.0,
        tol=1e-10)
    assert val == pytest.approx(want, abs=1e-6)
    with pytest.raises(OutOfSupportError):
        residual_lifetime(model, info)


def test_residual_decreases_with_weight_when_scaled_faster():
    # doubling the speed shortens life, so more scaled weight means a
    # shorter residual
    T = np.array([[-0.4, 0.2], [0.1, -0.5]])
    model = build_mixture(T, speed=2.0, initial=[0.5, 0.5],
                          scaled_weight=0.5)
    lo = information_state(model, 0, 0.0, regime="initial")
    fast = build_mixture(T, speed=2.0, initial=[0.5, 0.5], scaled_weight=0.9)
    hi = information_state(fast, 0, 0.0, regime="initial")
    assert residual_lifetime(fast, hi) < residual_lifetime(model, lo)
