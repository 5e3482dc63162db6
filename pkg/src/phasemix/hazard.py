"""Mortality-style intensities of the mixture absorption time.

Three views of the same hazard: the forward intensity (density over
survival a given duration past the information time), the instantaneous
intensity (its duration-zero value, a plain mixture of exit rates), and
the baseline intensity (no conditioning beyond being alive, the
population hazard). Long-run limits come from the dominant spectral
mode of whichever regime decays slower, with exact handling of
degenerate posterior weights and tied spectra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInformationError, OutOfSupportError
from .gph import GPHDistribution
from .mixture import InformationState, MixtureModel, posterior_limit
from .numkernel import excited_decay

__all__ = [
    "forward_intensity",
    "instantaneous_intensity",
    "baseline_intensity",
    "survival_from_intensity",
    "longrun_forward_intensity",
    "longrun_instantaneous_intensity",
    "longrun_baseline_intensity",
    "IntensityCurve",
    "sample_intensity",
]

# Below this the survival ratio is genuinely meaningless in float64.
SURVIVAL_FLOOR = 1e-300


def forward_intensity(model: MixtureModel, info: InformationState,
                      duration: float) -> float:
    """Hazard rate a given duration past the information time.

    Ratio of the conditional density to the conditional survival. Raises
    DegenerateInformationError once the survival underflows below the
    normal float range, where the ratio can no longer be formed.
    """
    law = GPHDistribution(model)
    den = law.conditional_survival(info, duration)
    if den < SURVIVAL_FLOOR:
        raise DegenerateInformationError(
            f"conditional survival at duration {duration} underflowed "
            f"({den!r}); the hazard ratio is not representable this deep "
            "in the tail, use longrun_forward_intensity instead"
        )
    return law.conditional_density(info, duration) / den


def instantaneous_intensity(model: MixtureModel, info: InformationState) -> float:
    """Hazard rate at the information time itself.

    Closed form: the posterior mixture of the two regimes' total exit
    rates at the occupied state.
    """
    i, w = info.state, info.weight
    base_rate = float(model.gen.total_exit_rates[i])
    scaled_rate = float(model.scaled_gen.total_exit_rates[i])
    return (1.0 - w) * base_rate + w * scaled_rate


def baseline_intensity(model: MixtureModel, t: float) -> float:
    """Population hazard at age t, no state information mixed in."""
    law = GPHDistribution(model)
    den = law.survival(t)
    if den < SURVIVAL_FLOOR:
        raise DegenerateInformationError(
            f"survival at age {t} underflowed ({den!r})"
        )
    return law.density(t) / den


def survival_from_intensity(model: MixtureModel, info: InformationState,
                            duration: float, tol: float = 1e-9) -> float:
    """Conditional survival recovered as exp(-integrated forward intensity).

    A consistency oracle for the closed-form conditional survival; the
    integral runs over durations 0..duration via adaptive quadrature.
    """
    from .numkernel import integrate

    if duration < 0:
        raise OutOfSupportError(f"duration must be nonnegative, got {duration}")
    if duration == 0:
        return 1.0
    total = integrate(lambda u: forward_intensity(model, info, u),
                      0.0, duration, tol=tol)
    return float(np.exp(-total))


def _mixture_decay(model: MixtureModel, left_scaled: np.ndarray,
                   left_base: np.ndarray) -> float:
    """Decay rate of the mixed survival with the given branch masses."""
    ones = np.ones(model.n_transient)
    candidates = []
    if float(np.abs(left_scaled).sum()) > 0.0:
        hit = excited_decay(model.scaled_gen.sub_generator, left_scaled, ones)
        if hit is not None:
            candidates.append(hit[0])
    if float(np.abs(left_base).sum()) > 0.0:
        hit = excited_decay(model.gen.sub_generator, left_base, ones)
        if hit is not None:
            candidates.append(hit[0])
    if not candidates:
        raise DegenerateInformationError(
            "no surviving mass in either regime; the hazard limit is undefined"
        )
    return max(candidates)


def longrun_forward_intensity(model: MixtureModel, info: InformationState) -> float:
    """Limit of the forward intensity as the duration grows.

    Whichever regime's survival decays slower dominates the tail, so the
    limit is the magnitude of that regime's dominant excited eigenvalue;
    a posterior weight of exactly zero or one silences the other branch,
    and a spectral tie gives the common magnitude. Independent of the
    information time given the occupied state.
    """
    m = model.n_transient
    i, w = info.state, info.weight
    e_i = np.zeros(m)
    e_i[i] = 1.0
    return -_mixture_decay(model, w * e_i, (1.0 - w) * e_i)


def longrun_instantaneous_intensity(model: MixtureModel, state: int,
                                    initial_state: int | None = None) -> float:
    """Limit of the instantaneous intensity at a fixed state as the
    information age grows: exit rates mixed by the limiting posterior."""
    limit_weight = posterior_limit(model, state=state, initial_state=initial_state)
    base_rate = float(model.gen.total_exit_rates[state])
    scaled_rate = float(model.scaled_gen.total_exit_rates[state])
    return (1.0 - limit_weight) * base_rate + limit_weight * scaled_rate


def longrun_baseline_intensity(model: MixtureModel) -> float:
    """Limit of the population hazard as age grows."""
    lw_scaled = model.initial * model.scaled_weight
    lw_base = model.initial * (1.0 - model.scaled_weight)
    return -_mixture_decay(model, lw_scaled, lw_base)


@dataclass(frozen=True)
class IntensityCurve:
    """An intensity sampled on a grid.

    kind is one of forward, instantaneous, baseline; anchor_age is the
    information age for forward curves and None otherwise; abscissa
    holds durations (forward) or ages (the other kinds).
    """

    kind: str
    anchor_age: float | None
    abscissa: np.ndarray
    values: np.ndarray


def sample_intensity(model: MixtureModel, kind: str, grid,
                     info: InformationState | None = None,
                     state: int | None = None,
                     regime: str = "current") -> IntensityCurve:
    """Evaluate one intensity kind over a grid.

    forward needs an information state and reads the grid as durations;
    instantaneous needs a state and reads the grid as ages, refreshing
    the posterior weight at each age under the given information regime;
    baseline reads the grid as ages and needs neither.
    """
    from .mixture import information_state

    xs = np.asarray(grid, dtype=float)
    if kind == "forward":
        if info is None:
            raise OutOfSupportError("forward intensity needs an information state")
        vals = np.array([forward_intensity(model, info, d) for d in xs])
        return IntensityCurve("forward", info.age, xs, vals)
    if kind == "instantaneous":
        if state is None:
            raise OutOfSupportError("instantaneous intensity needs a state")
        vals = np.array([
            instantaneous_intensity(
                model, information_state(model, state, t, regime=regime))
            for t in xs
        ])
        return IntensityCurve("instantaneous", None, xs, vals)
    if kind == "baseline":
        vals = np.array([baseline_intensity(model, t) for t in xs])
        return IntensityCurve("baseline", None, xs, vals)
    raise OutOfSupportError(f"unknown intensity kind {kind!r}")
