"""Expected residual lifetime and occupation times.

Occupation integrals are computed through augmented-matrix exponentials
(the block trick that turns time integrals of exp(A u) into one larger
exponential), which stays exact when a rate block is singular, e.g.
zero-speed states in the scaled regime. Infinite horizons use the
closed-form resolvent instead and therefore require invertible blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfSupportError, SingularMatrixError
from .markov import Generator
from .mixture import InformationState, MixtureModel
from .numkernel import expm, solve

__all__ = [
    "OccupationQuery",
    "residual_lifetime",
    "expected_occupation",
]


def _integral_exponential(A: np.ndarray, nu: float) -> np.ndarray:
    """int_0^nu exp(A u) du, valid for singular A."""
    m = A.shape[0]
    M = np.zeros((2 * m, 2 * m))
    M[:m, :m] = A
    M[:m, m:] = np.eye(m)
    return expm(M, nu)[:m, m:]


def _double_integral_exponential(A: np.ndarray, nu: float) -> np.ndarray:
    """int_0^nu int_0^u exp(A v) dv du, valid for singular A."""
    m = A.shape[0]
    M = np.zeros((3 * m, 3 * m))
    M[:m, :m] = A
    M[:m, m:2 * m] = np.eye(m)
    M[m:2 * m, 2 * m:] = np.eye(m)
    return expm(M, nu)[:m, 2 * m:]


def residual_lifetime(model: MixtureModel, info: InformationState) -> float:
    """Expected remaining time to absorption given the information state.

    Posterior mixture of the two regimes' mean absorption times from the
    occupied state. Needs both rate blocks invertible; a zero-speed
    state makes the scaled-regime expectation infinite.
    """
    i, w = info.state, info.weight
    ones = np.ones(model.n_transient)
    try:
        x_base = solve(model.gen.sub_generator, ones)
        x_scaled = x_base if w == 0.0 else solve(
            model.scaled_gen.sub_generator, ones)
    except SingularMatrixError as exc:
        raise OutOfSupportError(
            "expected residual lifetime is not finite: a regime's rate "
            f"block is singular ({exc})"
        ) from exc
    return float(-(w * x_scaled[i] + (1.0 - w) * x_base[i]))


@dataclass(frozen=True)
class OccupationQuery:
    """Ask for the expected time spent in target during (info.age, until].

    until may be math.inf; the window always starts at the information
    time. target indexes the full state list, transient then absorbing.
    """

    info: InformationState
    target: int
    until: float

    def __post_init__(self):
        if self.target < 0:
            raise OutOfSupportError(f"target state {self.target} is negative")
        if not (self.until >= self.info.age):
            raise OutOfSupportError(
                f"window end {self.until} is before the information age {self.info.age}"
            )


def _occupation_transient(gen: Generator, start: int, target: int,
                          nu: float) -> float:
    if math.isinf(nu):
        col = np.zeros(gen.n_transient)
        col[target] = 1.0
        try:
            x = solve(gen.sub_generator, col)
        except SingularMatrixError as exc:
            raise OutOfSupportError(
                "infinite-horizon occupation is not finite: the rate block "
                f"is singular ({exc})"
            ) from exc
        return float(-x[start])
    return float(_integral_exponential(gen.sub_generator, nu)[start, target])


def _occupation_absorbing(gen: Generator, start: int, cause: int,
                          nu: float) -> float:
    block = _double_integral_exponential(gen.sub_generator, nu)
    return float((block @ gen.exit_rates[:, cause])[start])


def expected_occupation(model: MixtureModel, query: OccupationQuery) -> float:
    """Expected time spent in one state over the queried window.

    For a transient target this integrates the conditional transition
    probability over the window; for an absorbing target it counts the
    time already spent absorbed there. Absorbing targets over an
    infinite window have infinite expectation and are rejected.
    """
    m, p = model.n_transient, model.n_absorbing
    if query.target >= m + p:
        raise OutOfSupportError(
            f"target state {query.target} out of range for {m + p} states"
        )
    nu = query.until - query.info.age
    i, w = query.info.state, query.info.weight
    if query.target < m:
        val_base = _occupation_transient(model.gen, i, query.target, nu) \
            if w < 1.0 else 0.0
        val_scaled = _occupation_transient(model.scaled_gen, i, query.target, nu) \
            if w > 0.0 else 0.0
    else:
        if math.isinf(nu):
            raise OutOfSupportError(
                "occupation of an absorbing state over an infinite window "
                "is infinite"
            )
        cause = query.target - m
        val_base = _occupation_absorbing(model.gen, i, cause, nu) \
            if w < 1.0 else 0.0
        val_scaled = _occupation_absorbing(model.scaled_gen, i, cause, nu) \
            if w > 0.0 else 0.0
    return w * val_scaled + (1.0 - w) * val_base
