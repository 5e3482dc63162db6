"""Cause-specific quantities when several absorbing states compete.

Every function takes the mixture model plus either an information state
(hazard-style conditioning on a current transient state) or info=None,
which reads as the population view: initial distribution, prior regime
weights, clock started at zero. Causes are zero-based column indices of
the exit-rate block.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DegenerateInformationError,
    OutOfSupportError,
    SingularMatrixError,
    UnreachableStateError,
)
from .hazard import SURVIVAL_FLOOR
from .numkernel import excited_decay, spectral_coefficients
from .mixture import InformationState, MixtureModel
from .numkernel import expm, solve
from .sojourn import _integral_exponential

__all__ = [
    "sub_distribution",
    "sub_density",
    "sub_survival",
    "overall_survival",
    "absorption_probability",
    "ultimate_absorption",
    "cause_forward_intensity",
    "cause_instantaneous_intensity",
    "longrun_cause_intensity",
    "conditional_on_cause",
    "future_cause_share",
    "cause_residual_lifetime",
]


def _check_cause(model: MixtureModel, cause: int) -> None:
    if not 0 <= cause < model.n_absorbing:
        raise OutOfSupportError(
            f"cause {cause} out of range for {model.n_absorbing} absorbing states"
        )


def _left_parts(model: MixtureModel,
                info: InformationState | None) -> tuple[np.ndarray, np.ndarray]:
    """Branch mass vectors over transient states: (scaled, base)."""
    if info is None:
        return (model.initial * model.scaled_weight,
                model.initial * (1.0 - model.scaled_weight))
    e = np.zeros(model.n_transient)
    e[info.state] = 1.0
    return info.weight * e, (1.0 - info.weight) * e


def _require_positive_speed(model: MixtureModel, what: str) -> None:
    if np.any(model.speed <= 0):
        idx = np.argwhere(model.speed <= 0).ravel().tolist()
        raise SingularMatrixError(
            f"{what} needs strictly positive speed multipliers, "
            f"but states {idx} have speed zero"
        )


def sub_distribution(model: MixtureModel, info: InformationState | None,
                     duration: float, cause: int) -> float:
    """P(absorbed into the cause within the duration | information)."""
    _check_cause(model, cause)
    if duration < 0:
        raise OutOfSupportError(f"duration must be nonnegative, got {duration}")
    lw_scaled, lw_base = _left_parts(model, info)
    val = 0.0
    if lw_scaled.any():
        block = _integral_exponential(model.scaled_gen.sub_generator, duration)
        val += float(lw_scaled @ block @ model.scaled_gen.exit_rates[:, cause])
    if lw_base.any():
        block = _integral_exponential(model.gen.sub_generator, duration)
        val += float(lw_base @ block @ model.gen.exit_rates[:, cause])
    return val


def sub_density(model: MixtureModel, info: InformationState | None,
                duration: float, cause: int) -> float:
    """Defective density of absorption into the cause at the duration."""
    _check_cause(model, cause)
    if duration < 0:
        raise OutOfSupportError(f"duration must be nonnegative, got {duration}")
    lw_scaled, lw_base = _left_parts(model, info)
    val = 0.0
    if lw_scaled.any():
        val += float(lw_scaled @ expm(model.scaled_gen.sub_generator, duration)
                     @ model.scaled_gen.exit_rates[:, cause])
    if lw_base.any():
        val += float(lw_base @ expm(model.gen.sub_generator, duration)
                     @ model.gen.exit_rates[:, cause])
    return val


def overall_survival(model: MixtureModel, info: InformationState | None,
                     duration: float) -> float:
    """P(still unabsorbed a duration past the information time)."""
    if duration < 0:
        raise OutOfSupportError(f"duration must be nonnegative, got {duration}")
    lw_scaled, lw_base = _left_parts(model, info)
    ones = np.ones(model.n_transient)
    val = 0.0
    if lw_scaled.any():
        val += float(lw_scaled @ expm(model.scaled_gen.sub_generator, duration) @ ones)
    if lw_base.any():
        val += float(lw_base @ expm(model.gen.sub_generator, duration) @ ones)
    return val


def absorption_probability(model: MixtureModel, info: InformationState | None = None,
                           cause: int | None = None):
    """Probability of eventual absorption into each cause.

    The two regimes share every jump probability (speeds rescale whole
    rows), so cause probabilities are regime-free; strictly positive
    speeds are required for that identity to hold.
    """
    _require_positive_speed(model, "absorption probabilities")
    lw_scaled, lw_base = _left_parts(model, info)
    left = lw_scaled + lw_base
    probs = -left @ solve(model.gen.sub_generator, model.gen.exit_rates)
    probs = np.maximum(probs, 0.0)
    if cause is None:
        return probs
    _check_cause(model, cause)
    return float(probs[cause])


def ultimate_absorption(model: MixtureModel,
                        info: InformationState | None = None) -> np.ndarray:
    """Vector of eventual-cause probabilities (see absorption_probability)."""
    return absorption_probability(model, info=info, cause=None)


def sub_survival(model: MixtureModel, info: InformationState | None,
                 duration: float, cause: int) -> float:
    """P(eventually absorbed into the cause, but not within the duration)."""
    return (absorption_probability(model, info, cause)
            - sub_distribution(model, info, duration, cause))


def cause_forward_intensity(model: MixtureModel, info: InformationState | None,
                            duration: float, cause: int) -> float:
    """Cause-specific hazard a duration past the information time."""
    den = overall_survival(model, info, duration)
    if den < SURVIVAL_FLOOR:
        raise DegenerateInformationError(
            f"survival at duration {duration} underflowed ({den!r})"
        )
    return sub_density(model, info, duration, cause) / den


def cause_instantaneous_intensity(model: MixtureModel,
                                  info: InformationState | None,
                                  cause: int) -> float:
    """Cause-specific hazard at the information time itself."""
    _check_cause(model, cause)
    lw_scaled, lw_base = _left_parts(model, info)
    num = float(lw_scaled @ model.scaled_gen.exit_rates[:, cause]
                + lw_base @ model.gen.exit_rates[:, cause])
    den = float(lw_scaled.sum() + lw_base.sum())
    if den < SURVIVAL_FLOOR:
        raise DegenerateInformationError("no surviving mass at the information time")
    return num / den


def longrun_cause_intensity(model: MixtureModel, info: InformationState | None,
                            cause: int) -> float:
    """Limit of the cause-specific forward intensity at long durations.

    The slower-decaying regime dominates; within it the limit is the
    ratio of the dominant-mode coefficient feeding this cause's exit
    rates to the coefficient of the survival itself.
    """
    _check_cause(model, cause)
    lw_scaled, lw_base = _left_parts(model, info)
    ones = np.ones(model.n_transient)
    branches = []
    if lw_scaled.any():
        branches.append((model.scaled_gen, lw_scaled))
    if lw_base.any():
        branches.append((model.gen, lw_base))
    hits = []
    for gen, left in branches:
        hit = excited_decay(gen.sub_generator, left, ones)
        if hit is not None:
            hits.append((hit[0], hit[1], gen, left))
    if not hits:
        raise DegenerateInformationError(
            "no surviving mass in either regime; the limit is undefined"
        )
    phi_star = max(h[0] for h in hits)
    tie_tol = 1e-9 * max(1.0, abs(phi_star))
    num = 0.0
    den = 0.0
    for phi, c_surv, gen, left in hits:
        if phi_star - phi > tie_tol:
            continue
        exit_col = gen.exit_rates[:, cause]
        coefs = spectral_coefficients(gen.sub_generator, left, exit_col)
        c_exit = 0.0
        for lam, c in coefs:
            if abs(lam - complex(phi)) <= 1e-9 * max(1.0, abs(phi)):
                c_exit = c.real
                break
        num += c_exit
        den += c_surv.real
    if abs(den) < 1e-300:
        raise DegenerateInformationError("dominant survival coefficient vanishes")
    return num / den


def conditional_on_cause(model: MixtureModel, info: InformationState | None,
                         duration: float, cause: int) -> float:
    """Distribution function of the absorption time given the eventual
    cause: the sub-distribution renormalized by the cause probability."""
    p = absorption_probability(model, info, cause)
    if p <= 0.0:
        raise UnreachableStateError(
            f"cause {cause} has probability zero from this information state"
        )
    return sub_distribution(model, info, duration, cause) / p


def future_cause_share(model: MixtureModel, info: InformationState | None,
                       duration: float, cause: int) -> float:
    """P(eventual cause is this one | still unabsorbed after the duration)."""
    den = overall_survival(model, info, duration)
    if den < SURVIVAL_FLOOR:
        raise DegenerateInformationError(
            f"survival at duration {duration} underflowed ({den!r})"
        )
    return sub_survival(model, info, duration, cause) / den


def cause_residual_lifetime(model: MixtureModel, info: InformationState | None,
                            cause: int) -> float:
    """Expected remaining time restricted to the event that absorption
    eventually happens by this cause: E[(tau - t) 1{cause}]."""
    _check_cause(model, cause)
    _require_positive_speed(model, "cause-restricted residual lifetimes")
    lw_scaled, lw_base = _left_parts(model, info)
    x = solve(model.gen.sub_generator, model.gen.exit_rates[:, cause])
    val = 0.0
    if lw_scaled.any():
        val += float(lw_scaled @ solve(model.scaled_gen.sub_generator, x))
    if lw_base.any():
        val += float(lw_base @ solve(model.gen.sub_generator, x))
    return val
