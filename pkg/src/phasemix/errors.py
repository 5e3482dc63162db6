"""Exception types shared across the package.

Everything raised deliberately by this library derives from PhasemixError,
so callers can catch one type at the boundary. Numerical failures carry
enough context to diagnose the offending input (condition numbers, residuals,
the best estimate reached, sample counts).
"""

from __future__ import annotations


class PhasemixError(Exception):
    """Base class for all errors raised by phasemix."""


class ModelValidationError(PhasemixError):
    """A generator, transition matrix, or model component failed validation."""


class SingularMatrixError(PhasemixError):
    """A linear solve hit a singular or numerically unusable matrix."""

    def __init__(self, message: str, cond: float | None = None,
                 residual: float | None = None):
        super().__init__(message)
        self.cond = cond
        self.residual = residual


class RepeatedEigenvalueError(PhasemixError):
    """An operation requiring a simple spectrum met repeated eigenvalues."""


class ComplexResidueError(PhasemixError):
    """A quantity that must be real came back with a non-negligible
    imaginary part."""

    def __init__(self, message: str, imag_norm: float):
        super().__init__(message)
        self.imag_norm = imag_norm


class QuadratureError(PhasemixError):
    """Adaptive quadrature failed to reach tolerance.

    The best estimate reached is attached as .best so a caller who can
    tolerate the larger error may still use it.
    """

    def __init__(self, message: str, best: float):
        super().__init__(message)
        self.best = best


class DegenerateInformationError(PhasemixError):
    """An information state is incompatible with the requested operation,
    e.g. conditioning on an absorbing state for a transient-only quantity."""


class UnreachableStateError(PhasemixError):
    """The conditioning event has probability zero under the model."""


class OutOfSupportError(PhasemixError):
    """An argument lies outside the supported domain (negative time,
    state index out of range, cause index out of range)."""


class InsufficientSampleError(PhasemixError):
    """An empirical estimator was asked for more precision than the sample
    supports. Carries the observed and required counts."""

    def __init__(self, message: str, count: int, needed: int):
        super().__init__(message)
        self.count = count
        self.needed = needed
