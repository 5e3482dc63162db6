"""Two-speed Markov mixture models and their posterior regime weights.

A mixture model pairs one absorbing chain (the base regime) with a
row-scaled copy of itself (the scaled regime, each state's rates
multiplied by a nonnegative per-state speed). An individual is assigned
to the scaled regime at time zero with a state-dependent probability and
keeps that regime forever; observers learn about the hidden regime from
whatever they see of the trajectory. This module computes the exact
posterior probability of the scaled regime under four information
regimes (none, current state only, endpoints, full path), the mixed
transition law, its long-run limits, and the complete-data rate
estimator used to recover generators from observed paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInformationError,
    ModelValidationError,
    OutOfSupportError,
    UnreachableStateError,
)
from .markov import Generator, block_exponential, validate_generator
from .numkernel import excited_decay, solve

__all__ = [
    "MixtureModel",
    "InformationState",
    "PathRecord",
    "GeneratorEstimate",
    "REGIMES",
    "parse_path_line",
    "format_path_line",
    "path_likelihood",
    "log_path_likelihood",
    "posterior_full",
    "posterior_endpoints",
    "posterior_current",
    "posterior_limit",
    "mixture_transition",
    "conditional_transition",
    "conditional_transition_parts",
    "information_state",
    "estimate_generator",
]

REGIMES = ("initial", "current", "endpoints", "full")

# Relative gap below which the two dominant eigenvalues count as tied.
EIGEN_TIE_RTOL = 1e-9

_ZERO_MASS = 1e-300


def _check_probability_vector(v, m: int, name: str) -> np.ndarray:
    out = np.asarray(v, dtype=float)
    if out.shape != (m,):
        raise ModelValidationError(f"{name} must have length {m}, got shape {out.shape}")
    if np.any(out < -1e-12) or np.any(out > 1.0 + 1e-12):
        raise ModelValidationError(f"{name} entries must lie in [0, 1]")
    return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class MixtureModel:
    """Two-regime mixture of an absorbing chain with a row-scaled copy.

    gen : base-regime generator
    speed : (m,) nonnegative per-state rate multipliers of the scaled regime
    initial : (m,) initial distribution over transient states; may sum to
        less than one (the deficit is mass absorbed immediately)
    scaled_weight : (m,) probability of starting in the scaled regime
        given the starting state
    """

    gen: Generator
    speed: np.ndarray
    initial: np.ndarray
    scaled_weight: np.ndarray

    def __post_init__(self):
        m = self.gen.n_transient
        speed = np.asarray(self.speed, dtype=float)
        if speed.shape != (m,):
            raise ModelValidationError(
                f"speed must have length {m}, got shape {speed.shape}"
            )
        if np.any(speed < 0):
            raise ModelValidationError("speed multipliers must be nonnegative")
        initial = np.asarray(self.initial, dtype=float)
        if initial.shape != (m,):
            raise ModelValidationError(
                f"initial must have length {m}, got shape {initial.shape}"
            )
        if np.any(initial < -1e-12):
            raise ModelValidationError("initial distribution has negative mass")
        total = float(initial.sum())
        if total > 1.0 + 1e-9:
            raise ModelValidationError(f"initial distribution sums to {total} > 1")
        weight = _check_probability_vector(self.scaled_weight, m, "scaled_weight")
        object.__setattr__(self, "speed", speed)
        object.__setattr__(self, "initial", np.maximum(initial, 0.0))
        object.__setattr__(self, "scaled_weight", weight)
        object.__setattr__(self, "_scaled_gen", self.gen.scaled(speed))

    @property
    def n_transient(self) -> int:
        return self.gen.n_transient

    @property
    def n_absorbing(self) -> int:
        return self.gen.n_absorbing

    @property
    def scaled_gen(self) -> Generator:
        return self._scaled_gen

    @property
    def speed_matrix(self) -> np.ndarray:
        return np.diag(self.speed)

    @property
    def defective(self) -> bool:
        """True when some initial mass is already absorbed at time zero."""
        return float(self.initial.sum()) < 1.0 - 1e-9

    def augmented_weight(self) -> np.ndarray:
        """Scaled-regime weights extended by zeros over absorbing states.

        The weight attached to an absorbing start is unidentifiable (the
        trajectory is constant under either regime) and is fixed at zero.
        """
        return np.concatenate([self.scaled_weight, np.zeros(self.n_absorbing)])


def build_mixture(T, D=None, speed=None, initial=None, scaled_weight=None,
                  require_absorbing: bool = True) -> MixtureModel:
    """Validate raw arrays into a MixtureModel.

    speed and scaled_weight accept scalars, broadcast to every state.
    """
    gen = validate_generator(T, D, require_absorbing=require_absorbing)
    m = gen.n_transient
    if speed is None:
        speed = 1.0
    if scaled_weight is None:
        scaled_weight = 0.0
    speed_v = np.broadcast_to(np.asarray(speed, dtype=float), (m,)).copy() \
        if np.ndim(speed) == 0 else np.asarray(speed, dtype=float)
    weight_v = np.broadcast_to(np.asarray(scaled_weight, dtype=float), (m,)).copy() \
        if np.ndim(scaled_weight) == 0 else np.asarray(scaled_weight, dtype=float)
    if initial is None:
        initial = np.full(m, 1.0 / m)
    return MixtureModel(gen=gen, speed=speed_v, initial=np.asarray(initial, float),
                        scaled_weight=weight_v)


@dataclass(frozen=True)
class InformationState:
    """What an observer knows at a moment: the occupied transient state,
    the age, and the per-state posterior weights of the scaled regime
    under the observer's information regime.

    scaled_weights[j] is the posterior probability of the scaled regime
    given the observer's information and current state j; formulas
    conditioning on this information read entry [state].
    """

    state: int
    age: float
    scaled_weights: np.ndarray
    regime: str = "current"

    def __post_init__(self):
        if self.age < 0:
            raise OutOfSupportError(f"age must be nonnegative, got {self.age}")
        if self.regime not in REGIMES:
            raise OutOfSupportError(
                f"unknown information regime {self.regime!r}, expected one of {REGIMES}"
            )
        w = np.asarray(self.scaled_weights, dtype=float)
        if self.state < 0 or self.state >= w.shape[0]:
            raise OutOfSupportError(
                f"state {self.state} out of range for {w.shape[0]} weights"
            )
        object.__setattr__(self, "scaled_weights", w)

    @property
    def weight(self) -> float:
        """Posterior scaled-regime probability at the occupied state."""
        return float(self.scaled_weights[self.state])


@dataclass(frozen=True)
class PathRecord:
    """A fully observed trajectory: visited transient states with their
    holding times, then optionally the absorbing state entered.

    The last visit may have duration zero (a jump observed exactly at the
    censoring instant); interior visits must have positive duration. A
    missing terminal means the path is censored in its last state.
    State indices are zero-based here; the text line format is one-based.
    """

    visits: tuple[tuple[int, float], ...]
    terminal: int | None = None

    def __post_init__(self):
        if not self.visits:
            raise ModelValidationError("a path record needs at least one visit")
        visits = tuple((int(s), float(d)) for s, d in self.visits)
        for k, (s, d) in enumerate(visits):
            if s < 0:
                raise ModelValidationError(f"visit {k} has negative state index {s}")
            if d < 0 or (d == 0 and k < len(visits) - 1):
                raise ModelValidationError(
                    f"visit {k} has invalid duration {d} (interior visits "
                    "need positive duration)"
                )
        if self.terminal is not None and self.terminal < 0:
            raise ModelValidationError(
                f"terminal state index {self.terminal} is negative"
            )
        object.__setattr__(self, "visits", visits)
        object.__setattr__(
            self, "terminal", None if self.terminal is None else int(self.terminal)
        )

    @property
    def start(self) -> int:
        return self.visits[0][0]

    @property
    def absorbed(self) -> bool:
        return self.terminal is not None

    @property
    def total_time(self) -> float:
        return float(sum(d for _, d in self.visits))

    def occupancy(self, n_states: int) -> np.ndarray:
        out = np.zeros(n_states)
        for s, d in self.visits:
            if s >= n_states:
                raise OutOfSupportError(f"state {s} out of range for {n_states} states")
            out[s] += d
        return out

    def transition_counts(self, n_states: int) -> np.ndarray:
        out = np.zeros((n_states, n_states), dtype=np.int64)
        seq = [s for s, _ in self.visits]
        if self.terminal is not None:
            seq.append(self.terminal)
        for a, b in zip(seq, seq[1:]):
            if max(a, b) >= n_states:
                raise OutOfSupportError(
                    f"state {max(a, b)} out of range for {n_states} states"
                )
            out[a, b] += 1
        return out


def format_path_line(record: PathRecord) -> str:
    """Render a record as `state:duration,...[,terminal]` with one-based
    states and shortest round-trip float formatting."""
    parts = [f"{s + 1}:{d!r}" for s, d in record.visits]
    if record.terminal is not None:
        parts.append(str(record.terminal + 1))
    return ",".join(parts)


def parse_path_line(line: str) -> PathRecord:
    """Parse the line format produced by format_path_line."""
    tokens = [tok.strip() for tok in line.strip().split(",") if tok.strip()]
    if not tokens:
        raise ModelValidationError("empty path line")
    visits: list[tuple[int, float]] = []
    terminal: int | None = None
    for k, tok in enumerate(tokens):
        if ":" in tok:
            if terminal is not None:
                raise ModelValidationError(
                    f"visit token {tok!r} appears after the terminal state"
                )
            raw_state, _, raw_dur = tok.partition(":")
            try:
                state = int(raw_state)
                dur = float(raw_dur)
            except ValueError as exc:
                raise ModelValidationError(f"malformed visit token {tok!r}") from exc
            if state < 1:
                raise ModelValidationError(f"state index {state} must be >= 1")
            visits.append((state - 1, dur))
        else:
            if k != len(tokens) - 1:
                raise ModelValidationError(
                    f"terminal token {tok!r} must be the last token"
                )
            try:
                term = int(tok)
            except ValueError as exc:
                raise ModelValidationError(f"malformed terminal token {tok!r}") from exc
            if term < 1:
                raise ModelValidationError(f"state index {term} must be >= 1")
            terminal = term - 1
    return PathRecord(visits=tuple(visits), terminal=terminal)


def _check_record_states(gen: Generator, record: PathRecord) -> None:
    m, p = gen.n_transient, gen.n_absorbing
    for s, _ in record.visits:
        if s >= m:
            raise OutOfSupportError(
                f"visited state {s} is not transient (model has {m} transient states)"
            )
    if record.terminal is not None and not (m <= record.terminal < m + p):
        raise OutOfSupportError(
            f"terminal state {record.terminal} is not an absorbing index "
            f"(expected {m}..{m + p - 1})"
        )


def log_path_likelihood(gen: Generator, record: PathRecord) -> float:
    """Log-likelihood of a fully observed path under one generator.

    Each visit contributes the holding-time survival exp(diagonal * d);
    each observed jump contributes log of the jump rate. Returns -inf for
    paths the generator cannot produce.
    """
    _check_record_states(gen, record)
    Q = gen.full_generator
    lp = 0.0
    for s, d in record.visits:
        lp += Q[s, s] * d
    seq = [s for s, _ in record.visits]
    if record.terminal is not None:
        seq.append(record.terminal)
    for a, b in zip(seq, seq[1:]):
        rate = Q[a, b]
        if rate <= 0.0:
            return -math.inf
        lp += math.log(rate)
    return lp


def path_likelihood(gen: Generator, record: PathRecord) -> float:
    """Likelihood of a fully observed path under one generator."""
    return math.exp(log_path_likelihood(gen, record))


def posterior_full(model: MixtureModel, record: PathRecord) -> float:
    """Posterior probability of the scaled regime given a complete path.

    Bayes over the two regime likelihoods with the starting state's prior
    weight, evaluated in the log domain so long paths cannot underflow.
    """
    i0 = record.start
    if i0 >= model.n_transient:
        raise OutOfSupportError(f"start state {i0} is not transient")
    w = float(model.scaled_weight[i0])
    log_scaled = log_path_likelihood(model.scaled_gen, record)
    log_base = log_path_likelihood(model.gen, record)
    if w <= 0.0:
        if math.isinf(log_base) and math.isinf(log_scaled):
            raise UnreachableStateError("path has zero likelihood under both regimes")
        return 0.0
    if w >= 1.0:
        if math.isinf(log_base) and math.isinf(log_scaled):
            raise UnreachableStateError("path has zero likelihood under both regimes")
        return 1.0
    a = math.log(w) + log_scaled
    b = math.log1p(-w) + log_base
    if math.isinf(a) and math.isinf(b):
        raise UnreachableStateError("path has zero likelihood under both regimes")
    if a >= b:
        return 1.0 / (1.0 + math.exp(b - a))
    return math.exp(a - b) / (1.0 + math.exp(a - b))


def _posterior_components(model: MixtureModel, left: np.ndarray,
                          t: float) -> tuple[np.ndarray, np.ndarray]:
    """Joint masses (scaled and total) of being in each transient state at
    age t, starting from the distribution `left` over transient states."""
    if t < 0:
        raise OutOfSupportError(f"age must be nonnegative, got {t}")
    P_scaled, _ = block_exponential(model.scaled_gen, t)
    P_base, _ = block_exponential(model.gen, t)
    w = model.scaled_weight
    num = (left * w) @ P_scaled
    den = num + (left * (1.0 - w)) @ P_base
    return num, den


def posterior_endpoints(model: MixtureModel, initial_state: int, t: float) -> np.ndarray:
    """Posterior scaled-regime weights given the start state and the state
    occupied at age t, for every transient current state.

    Entries for states unreachable at age t from the given start are zero.
    """
    m = model.n_transient
    if not 0 <= initial_state < m:
        raise OutOfSupportError(f"initial state {initial_state} is not transient")
    left = np.zeros(m)
    left[initial_state] = 1.0
    num, den = _posterior_components(model, left, t)
    out = np.zeros(m)
    mask = den > _ZERO_MASS
    out[mask] = num[mask] / den[mask]
    return np.clip(out, 0.0, 1.0)


def posterior_current(model: MixtureModel, t: float) -> np.ndarray:
    """Posterior scaled-regime weights given only the state occupied at
    age t, the start state marginalized over the model's initial
    distribution. Unreachable states get weight zero."""
    num, den = _posterior_components(model, model.initial, t)
    out = np.zeros(model.n_transient)
    mask = den > _ZERO_MASS
    out[mask] = num[mask] / den[mask]
    return np.clip(out, 0.0, 1.0)


def posterior_limit(model: MixtureModel, state: int | None = None,
                    initial_state: int | None = None) -> float:
    """Long-run limit of the posterior scaled-regime weight.

    For a transient `state` each regime's conditional occupation decays
    at its slowest excited spectral mode, the mode actually reachable
    from the start and visible at `state`. The slower branch takes all
    the posterior mass and a tie resolves to the ratio of the two mode
    coefficients. With `initial_state` given the endpoint posterior is
    limited; otherwise the current-state posterior (initial distribution
    mixed in) is limited. With state=None the limit is taken over
    absorbed individuals instead, which reduces to a resolvent ratio
    that needs no spectral information.

    Raises UnreachableStateError when the conditioning event has
    vanishing probability for all large ages, and RepeatedEigenvalueError
    when a needed spectrum is not simple.
    """
    m = model.n_transient
    if initial_state is not None:
        if not 0 <= initial_state < m:
            raise OutOfSupportError(f"initial state {initial_state} is not transient")
        left = np.zeros(m)
        left[initial_state] = 1.0
    else:
        left = model.initial

    T = model.gen.sub_generator
    w = model.scaled_weight

    if state is None:
        # Absorbed individuals: resolvent ratio, exact Bayes when
        # absorption is certain under both regimes.
        delta = model.gen.total_exit_rates
        x = solve(T, delta)
        den = float(left @ x)
        if abs(den) < _ZERO_MASS:
            raise UnreachableStateError("no initial mass reaches absorption")
        return float(np.clip((left * w) @ x / den, 0.0, 1.0))

    if not 0 <= state < m:
        raise OutOfSupportError(f"state {state} is not transient")

    e_state = np.zeros(m)
    e_state[state] = 1.0
    left_scaled = left * w
    left_base = left * (1.0 - w)
    hit_scaled = None
    if float(np.abs(left_scaled).sum()) > 0.0:
        hit_scaled = excited_decay(model.scaled_gen.sub_generator,
                                   left_scaled, e_state)
    hit_base = None
    if float(np.abs(left_base).sum()) > 0.0:
        hit_base = excited_decay(T, left_base, e_state)

    if hit_scaled is None and hit_base is None:
        raise UnreachableStateError(
            f"state {state} is unreachable from this start in both regimes"
        )
    if hit_base is None:
        return 1.0
    if hit_scaled is None:
        return 0.0

    phi_scaled, coef_scaled = hit_scaled
    phi_base, coef_base = hit_base
    gap = phi_scaled - phi_base
    scale = max(1.0, abs(phi_scaled), abs(phi_base))
    if abs(gap) <= EIGEN_TIE_RTOL * scale:
        den = coef_scaled.real + coef_base.real
        if abs(den) < _ZERO_MASS:
            raise UnreachableStateError(
                f"state {state} carries no surviving mode mass from this start"
            )
        return float(np.clip(coef_scaled.real / den, 0.0, 1.0))
    return 1.0 if gap > 0 else 0.0


def mixture_transition(model: MixtureModel, t: float) -> np.ndarray:
    """Unconditional transition matrix of the mixture at horizon t.

    Row i mixes the scaled and base transition rows with the start
    state's regime weight; absorbing rows are identical under both
    regimes so their weight is immaterial.
    """
    if t < 0:
        raise OutOfSupportError(f"time must be nonnegative, got {t}")
    from .markov import transition_matrix

    P_scaled = transition_matrix(model.scaled_gen, t)
    P_base = transition_matrix(model.gen, t)
    w = model.augmented_weight()[:, None]
    return w * P_scaled + (1.0 - w) * P_base


def conditional_transition_parts(model: MixtureModel, state: int,
                                 duration: float) -> tuple[np.ndarray, np.ndarray]:
    """Rows of the scaled and base transition matrices from one transient
    state over the given additional duration, over all m+p states."""
    if not 0 <= state < model.n_transient:
        raise OutOfSupportError(f"state {state} is not transient")
    if duration < 0:
        raise OutOfSupportError(f"duration must be nonnegative, got {duration}")
    from .markov import transition_matrix

    row_scaled = transition_matrix(model.scaled_gen, duration)[state]
    row_base = transition_matrix(model.gen, duration)[state]
    return row_scaled, row_base


def conditional_transition(model: MixtureModel, info: InformationState,
                           duration: float) -> np.ndarray:
    """State distribution a further `duration` after the information
    time, given the information state. Length m+p; the trailing p
    entries are absorption probabilities by then."""
    row_scaled, row_base = conditional_transition_parts(model, info.state, duration)
    w = info.weight
    return w * row_scaled + (1.0 - w) * row_base


def information_state(model: MixtureModel, state: int, age: float,
                      regime: str = "current", initial_state: int | None = None,
                      record: PathRecord | None = None) -> InformationState:
    """Construct the information state for an observer.

    regime selects how the scaled-regime weights are formed:
      initial    prior weights, no trajectory evidence
      current    Bayes update on occupying `state` at `age`
      endpoints  Bayes update on start `initial_state` and `state` at `age`
      full       Bayes update on a complete PathRecord

    current and endpoints raise UnreachableStateError when the model
    gives the conditioning event probability zero.
    """
    m = model.n_transient
    if not 0 <= state < m:
        raise OutOfSupportError(f"state {state} is not transient")
    if age < 0:
        raise OutOfSupportError(f"age must be nonnegative, got {age}")
    if regime == "initial":
        weights = model.scaled_weight.copy()
    elif regime == "current":
        num, den = _posterior_components(model, model.initial, age)
        if den[state] <= _ZERO_MASS:
            raise UnreachableStateError(
                f"state {state} at age {age} has probability zero under the model"
            )
        weights = np.zeros(m)
        mask = den > _ZERO_MASS
        weights[mask] = np.clip(num[mask] / den[mask], 0.0, 1.0)
    elif regime == "endpoints":
        if initial_state is None:
            raise DegenerateInformationError(
                "endpoints information needs initial_state"
            )
        weights = posterior_endpoints(model, initial_state, age)
        left = np.zeros(m)
        left[initial_state] = 1.0
        _, den = _posterior_components(model, left, age)
        if den[state] <= _ZERO_MASS:
            raise UnreachableStateError(
                f"state {state} at age {age} is unreachable from state {initial_state}"
            )
    elif regime == "full":
        if record is None:
            raise DegenerateInformationError("full information needs a PathRecord")
        last_state = record.visits[-1][0]
        if record.absorbed or last_state != state:
            raise DegenerateInformationError(
                f"path record ends in state {last_state} "
                f"{'(absorbed)' if record.absorbed else ''} but the information "
                f"state is {state}"
            )
        if abs(record.total_time - age) > 1e-9 * max(1.0, age):
            raise DegenerateInformationError(
                f"path record spans {record.total_time}, information age is {age}"
            )
        weights = np.full(m, posterior_full(model, record))
    else:
        raise OutOfSupportError(
            f"unknown information regime {regime!r}, expected one of {REGIMES}"
        )
    return InformationState(state=state, age=float(age), scaled_weights=weights,
                            regime=regime)


@dataclass(frozen=True)
class GeneratorEstimate:
    """Complete-data maximum-likelihood rate estimates.

    rates[i, j] = transitions i->j / time spent in i, diagonal set to the
    negative row sum; rows of never-occupied states are NaN and their
    indices listed in missing. std_errors[i, j] = sqrt(count) / exposure.
    """

    rates: np.ndarray
    std_errors: np.ndarray
    transition_counts: np.ndarray
    exposure: np.ndarray
    missing: tuple[int, ...] = field(default=())

    @property
    def n_states(self) -> int:
        return self.rates.shape[0]


def estimate_generator(records, n_states: int) -> GeneratorEstimate:
    """Estimate transition rates from fully observed paths.

    Pools holding times and jump counts over all records; q_ij is
    estimated by count / exposure. States with zero exposure (including
    absorbing states, which accumulate none) are reported in missing and
    get NaN rows rather than a silent zero.
    """
    if n_states < 1:
        raise OutOfSupportError("n_states must be positive")
    exposure = np.zeros(n_states)
    counts = np.zeros((n_states, n_states), dtype=np.int64)
    n_records = 0
    for rec in records:
        n_records += 1
        exposure += rec.occupancy(n_states)
        counts += rec.transition_counts(n_states)
    if n_records == 0:
        raise OutOfSupportError("no path records supplied")
    rates = np.full((n_states, n_states), np.nan)
    errors = np.full((n_states, n_states), np.nan)
    visited = exposure > 0
    for i in np.argwhere(visited).ravel():
        rates[i] = counts[i] / exposure[i]
        errors[i] = np.sqrt(counts[i]) / exposure[i]
        rates[i, i] = -(counts[i].sum() - counts[i, i]) / exposure[i]
        errors[i, i] = np.nan
    missing = tuple(int(i) for i in np.argwhere(~visited).ravel())
    return GeneratorEstimate(rates=rates, std_errors=errors,
                             transition_counts=counts, exposure=exposure,
                             missing=missing)
