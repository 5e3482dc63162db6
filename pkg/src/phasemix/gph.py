"""Absorption-time distributions of two-speed mixtures.

The absorption time of a mixture model follows a generalized phase-type
law: a two-component mixture of classical phase-type laws sharing one
jump skeleton but running at different speeds. This module exposes that
law directly (survival, density, conditional versions given an
information state, Laplace transform, raw moments), conversions to and
closure operations on classical phase-type form, and the Erlang family
used both as an exact special case and as a universal approximator of
laws on the positive half-line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.stats import poisson

from .errors import (
    ModelValidationError,
    OutOfSupportError,
    SingularMatrixError,
)
from .markov import Generator, block_exponential
from .mixture import InformationState, MixtureModel
from .numkernel import expm, solve

__all__ = [
    "GPHDistribution",
    "ClassicalPH",
    "ErlangMixtureApproximation",
    "mix",
    "convolve",
    "erlang_mixture",
    "erlang_cdf",
    "erlang_survival",
    "erlang_density",
    "dense_approximation",
]


def _require_positive_speed(model: MixtureModel, what: str) -> None:
    if np.any(model.speed <= 0):
        idx = np.argwhere(model.speed <= 0).ravel().tolist()
        raise SingularMatrixError(
            f"{what} needs an invertible scaled rate block, but speed "
            f"multipliers at states {idx} are zero"
        )


@dataclass(frozen=True)
class ClassicalPH:
    """Classical phase-type law (initial row vector, sub-generator).

    initial may sum to less than one; the deficit is an atom at zero.
    """

    initial: np.ndarray
    sub_generator: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.initial, dtype=float)
        T = np.asarray(self.sub_generator, dtype=float)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise ModelValidationError(f"sub-generator must be square, got {T.shape}")
        if pi.shape != (T.shape[0],):
            raise ModelValidationError(
                f"initial vector length {pi.shape} does not match order {T.shape[0]}"
            )
        if np.any(pi < -1e-12):
            raise ModelValidationError("initial vector has negative mass")
        if pi.sum() > 1.0 + 1e-9:
            raise ModelValidationError("initial vector sums past one")
        object.__setattr__(self, "initial", np.maximum(pi, 0.0))
        object.__setattr__(self, "sub_generator", T)

    @property
    def order(self) -> int:
        return self.sub_generator.shape[0]

    @property
    def exit_rates(self) -> np.ndarray:
        return np.maximum(-self.sub_generator @ np.ones(self.order), 0.0)

    @property
    def atom_at_zero(self) -> float:
        return max(0.0, 1.0 - float(self.initial.sum()))

    def survival(self, t: float) -> float:
        if t < 0:
            raise OutOfSupportError(f"time must be nonnegative, got {t}")
        return float(self.initial @ expm(self.sub_generator, t) @ np.ones(self.order))

    def density(self, t: float) -> float:
        if t < 0:
            raise OutOfSupportError(f"time must be nonnegative, got {t}")
        return float(self.initial @ expm(self.sub_generator, t) @ self.exit_rates)

    def moment(self, n: int) -> float:
        """Raw moment E[tau^n] = (-1)^n n! initial T^-n ones."""
        if n < 1:
            raise OutOfSupportError(f"moment order must be >= 1, got {n}")
        return _moment_from_solves(self.initial, self.sub_generator, n)

    def laplace_transform(self, theta: float) -> float:
        if theta < 0:
            raise OutOfSupportError(f"transform argument must be >= 0, got {theta}")
        A = theta * np.eye(self.order) - self.sub_generator
        x = solve(A, self.exit_rates)
        return float(self.initial @ x) + self.atom_at_zero


def _moment_from_solves(initial: np.ndarray, A: np.ndarray, n: int) -> float:
    x = np.ones(A.shape[0])
    for _ in range(n):
        x = solve(A, x)
    sign = 1.0 if n % 2 == 0 else -1.0
    return sign * math.factorial(n) * float(initial @ x)


class GPHDistribution:
    """Absorption-time law of a two-speed mixture model.

    With several absorbing states the law is the time to absorption into
    any of them; cause-specific quantities live in the competing module.
    """

    def __init__(self, model: MixtureModel):
        self.model = model

    @property
    def _parts(self) -> tuple[np.ndarray, np.ndarray]:
        pi = self.model.initial
        w = self.model.scaled_weight
        return pi * w, pi * (1.0 - w)

    def survival(self, t: float) -> float:
        """P(absorption happens after t)."""
        if t < 0:
            raise OutOfSupportError(f"time must be nonnegative, got {t}")
        lw_scaled, lw_base = self._parts
        ones = np.ones(self.model.n_transient)
        P_s, _ = block_exponential(self.model.scaled_gen, t)
        P_b, _ = block_exponential(self.model.gen, t)
        return float(lw_scaled @ P_s @ ones + lw_base @ P_b @ ones)

    def density(self, t: float) -> float:
        if t < 0:
            raise OutOfSupportError(f"time must be nonnegative, got {t}")
        lw_scaled, lw_base = self._parts
        P_s, _ = block_exponential(self.model.scaled_gen, t)
        P_b, _ = block_exponential(self.model.gen, t)
        return float(lw_scaled @ P_s @ self.model.scaled_gen.total_exit_rates
                     + lw_base @ P_b @ self.model.gen.total_exit_rates)

    def conditional_survival(self, info: InformationState, duration: float) -> float:
        """P(absorption after info.age + duration | information state)."""
        if duration < 0:
            raise OutOfSupportError(f"duration must be nonnegative, got {duration}")
        i, w = info.state, info.weight
        ones = np.ones(self.model.n_transient)
        P_s, _ = block_exponential(self.model.scaled_gen, duration)
        P_b, _ = block_exponential(self.model.gen, duration)
        return float(w * (P_s[i] @ ones) + (1.0 - w) * (P_b[i] @ ones))

    def conditional_density(self, info: InformationState, duration: float) -> float:
        if duration < 0:
            raise OutOfSupportError(f"duration must be nonnegative, got {duration}")
        i, w = info.state, info.weight
        P_s, _ = block_exponential(self.model.scaled_gen, duration)
        P_b, _ = block_exponential(self.model.gen, duration)
        return float(w * (P_s[i] @ self.model.scaled_gen.total_exit_rates)
                     + (1.0 - w) * (P_b[i] @ self.model.gen.total_exit_rates))

    def laplace_transform(self, theta: float) -> float:
        """E[exp(-theta * tau)] via two resolvent solves.

        Requires strictly positive speed multipliers so the scaled
        resolvent exists down to theta = 0.
        """
        if theta < 0:
            raise OutOfSupportError(f"transform argument must be >= 0, got {theta}")
        _require_positive_speed(self.model, "the Laplace transform")
        m = self.model.n_transient
        lw_scaled, lw_base = self._parts
        ident = np.eye(m)
        G = self.model.scaled_gen.sub_generator
        T = self.model.gen.sub_generator
        x_s = solve(theta * ident - G, self.model.scaled_gen.total_exit_rates)
        x_b = solve(theta * ident - T, self.model.gen.total_exit_rates)
        atom = max(0.0, 1.0 - float(self.model.initial.sum()))
        return float(lw_scaled @ x_s + lw_base @ x_b) + atom

    def moment(self, n: int) -> float:
        """Raw moment E[tau^n], exact via n linear solves per regime."""
        if n < 1:
            raise OutOfSupportError(f"moment order must be >= 1, got {n}")
        _require_positive_speed(self.model, "moments")
        lw_scaled, lw_base = self._parts
        return (_moment_from_solves(lw_scaled, self.model.scaled_gen.sub_generator, n)
                + _moment_from_solves(lw_base, self.model.gen.sub_generator, n))

    def to_classical(self) -> ClassicalPH:
        """Equivalent classical phase-type representation of double order.

        The state space is doubled: one copy runs at scaled rates, one at
        base rates, with no transitions between copies; the initial mass
        of each copy carries the regime weights.
        """
        lw_scaled, lw_base = self._parts
        Ts = self.model.scaled_gen.sub_generator
        Tb = self.model.gen.sub_generator
        return ClassicalPH(
            initial=np.concatenate([lw_scaled, lw_base]),
            sub_generator=scipy.linalg.block_diag(Ts, Tb),
        )

    def scale(self, factor: float) -> "GPHDistribution":
        """Law of factor * tau: every rate divided by the factor."""
        if factor <= 0:
            raise OutOfSupportError(f"scale factor must be positive, got {factor}")
        gen = Generator(
            sub_generator=self.model.gen.sub_generator / factor,
            exit_rates=self.model.gen.exit_rates / factor,
            absorption_certain=self.model.gen.absorption_certain,
        )
        return GPHDistribution(MixtureModel(
            gen=gen,
            speed=self.model.speed.copy(),
            initial=self.model.initial.copy(),
            scaled_weight=self.model.scaled_weight.copy(),
        ))


def mix(laws: list[GPHDistribution], weights) -> GPHDistribution:
    """Finite mixture of absorption-time laws, again of the same family.

    The component models are placed on a direct sum of their state
    spaces; the mixing weights scale each component's initial mass.
    """
    if not laws:
        raise ModelValidationError("mix needs at least one component")
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(laws),):
        raise ModelValidationError(
            f"need {len(laws)} weights, got shape {w.shape}"
        )
    if np.any(w <= 0):
        raise ModelValidationError("mixture weights must be positive")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ModelValidationError(f"mixture weights sum to {w.sum()}, expected 1")
    subs = [law.model.gen.sub_generator for law in laws]
    exits = [law.model.gen.exit_rates for law in laws]
    gen = Generator(
        sub_generator=scipy.linalg.block_diag(*subs),
        exit_rates=scipy.linalg.block_diag(*exits),
        absorption_certain=all(law.model.gen.absorption_certain for law in laws),
    )
    return GPHDistribution(MixtureModel(
        gen=gen,
        speed=np.concatenate([law.model.speed for law in laws]),
        initial=np.concatenate([wk * law.model.initial for wk, law in zip(w, laws)]),
        scaled_weight=np.concatenate([law.model.scaled_weight for law in laws]),
    ))


def convolve(first, second) -> ClassicalPH:
    """Law of the sum of two independent absorption times.

    Both arguments may be GPHDistribution or ClassicalPH; the result is
    classical phase-type on the concatenated state space, with the exit
    rates of the first law feeding the initial vector of the second.
    """
    a = first.to_classical() if isinstance(first, GPHDistribution) else first
    b = second.to_classical() if isinstance(second, GPHDistribution) else second
    if not isinstance(a, ClassicalPH) or not isinstance(b, ClassicalPH):
        raise OutOfSupportError("convolve expects GPHDistribution or ClassicalPH")
    ka, kb = a.order, b.order
    top = np.hstack([a.sub_generator, np.outer(a.exit_rates, b.initial)])
    bottom = np.hstack([np.zeros((kb, ka)), b.sub_generator])
    initial = np.concatenate([a.initial, a.atom_at_zero * b.initial])
    return ClassicalPH(initial=initial, sub_generator=np.vstack([top, bottom]))


def erlang_cdf(t: float, shape: int, rate: float) -> float:
    """Erlang distribution function via the Poisson tail identity."""
    if t <= 0:
        return 0.0
    return float(poisson.sf(shape - 1, rate * t))


def erlang_survival(t: float, shape: int, rate: float) -> float:
    if t <= 0:
        return 1.0
    return float(poisson.cdf(shape - 1, rate * t))


def erlang_density(t: float, shape: int, rate: float) -> float:
    if t < 0:
        return 0.0
    return float(rate ** shape * t ** (shape - 1)
                 * math.exp(-rate * t) / math.factorial(shape - 1))


def erlang_mixture(alpha: float, shape: int, rate_scaled: float,
                   rate_base: float) -> GPHDistribution:
    """Two-speed mixture of Erlang laws with a common shape.

    With probability alpha the holding rates are rate_scaled, otherwise
    rate_base; the survival function is the alpha-mixture of the two
    Erlang survival functions, which the tests pin against the Poisson
    closed form.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ModelValidationError(f"alpha must lie in [0, 1], got {alpha}")
    if shape < 1:
        raise ModelValidationError(f"shape must be >= 1, got {shape}")
    if rate_scaled <= 0 or rate_base <= 0:
        raise ModelValidationError("rates must be positive")
    m = shape
    T = rate_base * (np.eye(m, k=1) - np.eye(m))
    D = np.zeros((m, 1))
    D[m - 1, 0] = rate_base
    gen = Generator(sub_generator=T, exit_rates=D)
    initial = np.zeros(m)
    initial[0] = 1.0
    return GPHDistribution(MixtureModel(
        gen=gen,
        speed=np.full(m, rate_scaled / rate_base),
        initial=initial,
        scaled_weight=np.full(m, float(alpha)),
    ))


@dataclass(frozen=True)
class ErlangMixtureApproximation:
    """Dense Erlang-mixture approximation of a law on the half-line.

    Component j (1-based shape) has weight F(j/n) - F((j-1)/n) and rate
    n; mass beyond the horizon n is left out, so the approximation is
    defective by truncation_mass.
    """

    rate: float
    weights: np.ndarray

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def truncation_mass(self) -> float:
        return max(0.0, 1.0 - float(self.weights.sum()))

    def cdf(self, t: float) -> float:
        if t <= 0:
            return 0.0
        shapes = np.arange(1, self.n_components + 1)
        return float(self.weights @ poisson.sf(shapes - 1, self.rate * t))

    def survival(self, t: float) -> float:
        return 1.0 - self.cdf(t)


def dense_approximation(target_cdf, n: int) -> ErlangMixtureApproximation:
    """Erlang-mixture approximation of order n of an arbitrary cdf.

    Samples the target at j/n for j = 0..n^2 and turns the increments
    into weights of Erlang(j, n) components. The samples must be a
    nondecreasing sequence in [0, 1].
    """
    if n < 1:
        raise OutOfSupportError(f"resolution n must be >= 1, got {n}")
    grid = np.arange(n * n + 1) / n
    samples = np.array([float(target_cdf(x)) for x in grid])
    if np.any(samples < -1e-12) or np.any(samples > 1.0 + 1e-12):
        raise ModelValidationError("target cdf samples must lie in [0, 1]")
    if np.any(np.diff(samples) < -1e-12):
        k = int(np.argmax(np.diff(samples) < -1e-12))
        raise ModelValidationError(
            f"target cdf is not monotone between {grid[k]} and {grid[k + 1]}"
        )
    weights = np.maximum(np.diff(samples), 0.0)
    return ErlangMixtureApproximation(rate=float(n), weights=weights)
