"""Absorbing continuous-time Markov chains.

A chain with m transient and p absorbing states is stored as the pair
(sub_generator, exit_rates): the m x m rate block among transient states
and the m x p block of rates into each absorbing state. The full
generator has zero rows for absorbing states. Validation enforces sign
structure and zero row sums, and by default certifies that absorption is
reached from every transient state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelValidationError, OutOfSupportError
from .numkernel import expm

__all__ = [
    "Generator",
    "validate_generator",
    "transition_matrix",
    "block_exponential",
    "classical_ph_survival",
    "classical_ph_density",
]

ROW_SUM_RTOL = 1e-9


@dataclass(frozen=True)
class Generator:
    """Validated absorbing-chain generator.

    sub_generator : (m, m) rates among transient states, negative diagonal
    exit_rates : (m, p) rates from transient into each absorbing state
    """

    sub_generator: np.ndarray
    exit_rates: np.ndarray
    absorption_certain: bool = field(default=True, compare=False)

    @property
    def n_transient(self) -> int:
        return self.sub_generator.shape[0]

    @property
    def n_absorbing(self) -> int:
        return self.exit_rates.shape[1]

    @property
    def total_exit_rates(self) -> np.ndarray:
        """Total exit rate of each transient state into absorption."""
        return self.exit_rates @ np.ones(self.n_absorbing)

    @property
    def full_generator(self) -> np.ndarray:
        """(m+p, m+p) generator with zero rows for absorbing states."""
        m, p = self.n_transient, self.n_absorbing
        Q = np.zeros((m + p, m + p))
        Q[:m, :m] = self.sub_generator
        Q[:m, m:] = self.exit_rates
        return Q

    def scaled(self, speed) -> "Generator":
        """Generator with every row i multiplied by speed[i] >= 0.

        A scalar speed applies to every row.
        """
        s = np.asarray(speed, dtype=float)
        if s.ndim == 0:
            s = np.full(self.n_transient, float(s))
        if s.shape != (self.n_transient,):
            raise OutOfSupportError(
                f"speed vector must have length {self.n_transient}, got {s.shape}"
            )
        if np.any(s < 0):
            raise ModelValidationError("speed multipliers must be nonnegative")
        certain = self.absorption_certain and bool(np.all(s > 0))
        return Generator(
            sub_generator=s[:, None] * self.sub_generator,
            exit_rates=s[:, None] * self.exit_rates,
            absorption_certain=certain,
        )


def _can_absorb(T: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Boolean vector: which transient states reach absorption eventually."""
    m = T.shape[0]
    reach = D.sum(axis=1) > 0
    adj = T > 0
    changed = True
    while changed:
        changed = False
        for i in range(m):
            if not reach[i] and np.any(adj[i] & reach):
                reach[i] = True
                changed = True
    return reach


def validate_generator(T, D=None, rtol: float = ROW_SUM_RTOL,
                       repair: bool = False,
                       require_absorbing: bool = True) -> Generator:
    """Validate (and optionally repair) an absorbing-chain generator.

    Parameters
    ----------
    T : (m, m) array_like
        Rates among transient states. Off-diagonal entries must be
        nonnegative and the diagonal nonpositive.
    D : (m, p) array_like, optional
        Rates into each of p absorbing states, entrywise nonnegative.
        When omitted a single absorbing state is assumed and its column
        is inferred as -T @ 1, which must come out nonnegative.
    rtol : float
        Row sums of [T D] must vanish within rtol relative to the
        largest rate magnitude in the row (absolute floor rtol).
    repair : bool
        If True, reset each diagonal entry to minus the off-diagonal row
        sum instead of rejecting a row-sum violation.
    require_absorbing : bool
        If True (default) every transient state must reach an absorbing
        state with probability one; otherwise the resulting Generator is
        marked absorption_certain=False.

    Raises
    ------
    ModelValidationError on sign violations, row-sum violations (unless
    repaired), or unreachable absorption when required.
    """
    Tm = np.array(T, dtype=float)
    if Tm.ndim != 2 or Tm.shape[0] != Tm.shape[1]:
        raise ModelValidationError(
            f"transient rate block must be square, got shape {Tm.shape}"
        )
    m = Tm.shape[0]
    if m == 0:
        raise ModelValidationError("generator needs at least one transient state")

    if D is None:
        Dm = np.maximum(-Tm @ np.ones(m), 0.0)[:, None]
        inferred_exit = -Tm @ np.ones(m)
        if np.any(inferred_exit < -rtol * max(1.0, float(np.abs(Tm).max()))):
            raise ModelValidationError(
                "inferred exit rates -T @ Ones are negative; pass D explicitly"
            )
    else:
        Dm = np.array(D, dtype=float)
        if Dm.ndim == 1:
            Dm = Dm[:, None]
        if Dm.shape[0] != m:
            raise ModelValidationError(
                f"exit block has {Dm.shape[0]} rows, expected {m}"
            )

    off = Tm - np.diag(np.diag(Tm))
    if np.any(off < 0):
        i, j = np.argwhere(off < 0)[0]
        raise ModelValidationError(
            f"off-diagonal rate T[{i},{j}] = {Tm[i, j]} is negative"
        )
    if np.any(np.diag(Tm) > 0):
        i = int(np.argmax(np.diag(Tm) > 0))
        raise ModelValidationError(f"diagonal entry T[{i},{i}] = {Tm[i, i]} is positive")
    if np.any(Dm < 0):
        i, j = np.argwhere(Dm < 0)[0]
        raise ModelValidationError(f"exit rate D[{i},{j}] = {Dm[i, j]} is negative")

    row_sums = Tm @ np.ones(m) + Dm @ np.ones(Dm.shape[1])
    scale = np.maximum(1.0, np.abs(Tm).max(axis=1) + Dm.max(axis=1, initial=0.0))
    bad = np.abs(row_sums) > rtol * scale
    if np.any(bad):
        if repair:
            Tm = Tm.copy()
            for i in np.argwhere(bad).ravel():
                Tm[i, i] = -(off[i].sum() + Dm[i].sum())
        else:
            i = int(np.argwhere(bad).ravel()[0])
            raise ModelValidationError(
                f"row {i} of [T D] sums to {row_sums[i]:.3e}, expected 0 "
                f"(tolerance {rtol:g} relative; pass repair=True to fix diagonals)"
            )

    reach = _can_absorb(Tm, Dm)
    certain = bool(np.all(reach))
    if require_absorbing and not certain:
        stuck = np.argwhere(~reach).ravel().tolist()
        raise ModelValidationError(
            f"transient states {stuck} cannot reach any absorbing state; "
            "pass require_absorbing=False to allow a defective chain"
        )
    return Generator(sub_generator=Tm, exit_rates=Dm, absorption_certain=certain)


def transition_matrix(gen: Generator, t: float) -> np.ndarray:
    """Full (m+p, m+p) transition probability matrix at horizon t >= 0."""
    if t < 0:
        raise OutOfSupportError(f"time must be nonnegative, got {t}")
    return expm(gen.full_generator, t)


def block_exponential(gen: Generator, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Transient and absorption blocks of the transition matrix.

    Returns (P_tt, P_ta): P_tt[i, j] is the probability of being in
    transient state j at time t from i, and P_ta[i, k] the probability of
    having been absorbed into absorbing state k by time t. Computed from
    the full-generator exponential, so it stays valid when the transient
    block is singular (states with zero total rate).
    """
    P = transition_matrix(gen, t)
    m = gen.n_transient
    return P[:m, :m], P[:m, m:]


def _check_initial(pi, m: int, allow_defective: bool) -> np.ndarray:
    v = np.asarray(pi, dtype=float)
    if v.shape != (m,):
        raise ModelValidationError(
            f"initial distribution must have length {m}, got shape {v.shape}"
        )
    if np.any(v < -1e-12):
        raise ModelValidationError("initial distribution has negative mass")
    total = float(v.sum())
    if total > 1.0 + 1e-9:
        raise ModelValidationError(f"initial distribution sums to {total} > 1")
    if not allow_defective and total < 1.0 - 1e-9:
        raise ModelValidationError(
            f"initial distribution sums to {total} < 1; mass on absorbing "
            "states is rejected by default (pass allow_defective=True)"
        )
    return v


def classical_ph_survival(pi, T, t: float, allow_defective: bool = False) -> float:
    """Survival function of a classical phase-type law at time t.

    pi is the initial distribution over the m transient states and T the
    sub-generator; the law is the absorption time of the chain. A
    defective pi (mass already absorbed at time zero) is rejected unless
    allow_defective=True, in which case the survival starts below one.
    """
    gen = validate_generator(T)
    v = _check_initial(pi, gen.n_transient, allow_defective)
    if t < 0:
        raise OutOfSupportError(f"time must be nonnegative, got {t}")
    P_tt, _ = block_exponential(gen, t)
    return float(v @ P_tt @ np.ones(gen.n_transient))


def classical_ph_density(pi, T, t: float, allow_defective: bool = False) -> float:
    """Density of a classical phase-type law at time t > 0."""
    gen = validate_generator(T)
    v = _check_initial(pi, gen.n_transient, allow_defective)
    if t < 0:
        raise OutOfSupportError(f"time must be nonnegative, got {t}")
    P_tt, _ = block_exponential(gen, t)
    return float(v @ P_tt @ gen.total_exit_rates)
