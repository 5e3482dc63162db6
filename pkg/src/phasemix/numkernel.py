"""Dense linear-algebra and quadrature primitives.

Small dense matrices dominate this package (state spaces of a handful of
states, evaluated at many time points), so everything here is written for
clarity and tight error reporting rather than scale. Matrix exponentials
delegate to scipy's Pade implementation; linear solves go through LAPACK
with an explicit residual check; eigendecompositions are wrapped in a
container that records whether the spectrum is simple, since several
closed-form limits in this package are only valid for distinct eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ComplexResidueError,
    OutOfSupportError,
    QuadratureError,
    RepeatedEigenvalueError,
    SingularMatrixError,
)

__all__ = [
    "EigenSystem",
    "expm",
    "solve",
    "eigen",
    "lagrange_coefficient",
    "spectral_coefficients",
    "excited_decay",
    "integrate",
]

# Relative scale below which two eigenvalues count as repeated.
EIGEN_DISTINCT_RTOL = 1e-8

# Imaginary mass tolerated when a provably real matrix is realified.
IMAG_RESIDUE_TOL = 1e-8

# Spectral coefficients below this fraction of the largest one count as
# unexcited when hunting for an effective decay rate.
COEF_RTOL = 1e-12

_SOLVE_RESIDUAL_RTOL = 1e-8


def _as_square(A, name: str = "A") -> np.ndarray:
    M = np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise OutOfSupportError(f"{name} must be a square matrix, got shape {M.shape}")
    return M


def expm(A, t: float = 1.0) -> np.ndarray:
    """Matrix exponential exp(A*t) of a square real matrix."""
    M = _as_square(A)
    if M.shape[0] == 0:
        return np.zeros((0, 0))
    return scipy.linalg.expm(M * float(t))


def solve(A, B) -> np.ndarray:
    """Solve A @ X = B for X with an explicit residual check.

    Parameters
    ----------
    A : (n, n) array_like
    B : (n,) or (n, k) array_like

    Returns
    -------
    X with the same trailing shape as B.

    Raises
    ------
    SingularMatrixError
        If LAPACK reports a singular factorization, or if the computed
        solution fails ||A X - B|| <= 1e-8 * max(1, ||B||). The error
        carries the condition number estimate and the residual.
    """
    M = _as_square(A)
    b = np.asarray(B, dtype=float)
    squeeze = b.ndim == 1
    rhs = b[:, None] if squeeze else b
    if rhs.shape[0] != M.shape[0]:
        raise OutOfSupportError(
            f"rhs has {rhs.shape[0]} rows, matrix is {M.shape[0]}x{M.shape[1]}"
        )
    try:
        X = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(
            f"singular linear system: {exc}", cond=float("inf")
        ) from exc
    residual = float(np.linalg.norm(M @ X - rhs))
    scale = max(1.0, float(np.linalg.norm(rhs)))
    if not np.isfinite(residual) or residual > _SOLVE_RESIDUAL_RTOL * scale:
        cond = float(np.linalg.cond(M))
        raise SingularMatrixError(
            f"linear solve residual {residual:.3e} exceeds "
            f"{_SOLVE_RESIDUAL_RTOL:.0e} * max(1, ||B||) = {_SOLVE_RESIDUAL_RTOL * scale:.3e} "
            f"(cond ~ {cond:.3e})",
            cond=cond,
            residual=residual,
        )
    return X[:, 0] if squeeze else X


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition with a simplicity flag.

    values are sorted by descending real part (ties broken by descending
    imaginary part) so values[0] is the dominant eigenvalue. distinct is
    True when every pair differs by more than 1e-8 relative to the larger
    magnitude involved, the threshold the closed-form limit formulas need.
    """

    values: np.ndarray
    vectors: np.ndarray
    distinct: bool

    @property
    def dominant(self) -> complex:
        return complex(self.values[0])


def _spectrum_is_distinct(values: np.ndarray) -> bool:
    n = len(values)
    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(values[i] - values[j])
            scale = max(1.0, abs(values[i]), abs(values[j]))
            if gap <= EIGEN_DISTINCT_RTOL * scale:
                return False
    return True


def eigen(A) -> EigenSystem:
    """Eigenvalues and right eigenvectors, dominant first."""
    M = _as_square(A)
    values, vectors = np.linalg.eig(M)
    order = np.lexsort((-values.imag, -values.real))
    values = values[order]
    vectors = vectors[:, order]
    return EigenSystem(values=values, vectors=vectors,
                       distinct=_spectrum_is_distinct(values))


def lagrange_coefficient(A, eigenvalues, p: int) -> np.ndarray:
    """Matrix Lagrange basis coefficient L_p(A).

    For a matrix with simple spectrum {phi_1, ..., phi_n},

        L_p(A) = prod_{j != p} (A - phi_j I) / (phi_p - phi_j)

    is the spectral projector onto the phi_p eigenspace, and
    exp(A t) = sum_p exp(phi_p t) L_p(A). When phi_p is real and the
    spectrum is closed under conjugation the product is a real matrix;
    the complex arithmetic residue is checked against 1e-8 and stripped.

    Raises
    ------
    RepeatedEigenvalueError
        If some phi_j coincides with phi_p at the distinctness tolerance.
    ComplexResidueError
        If the imaginary residue of the result exceeds 1e-8.
    """
    M = _as_square(A).astype(complex)
    phis = np.asarray(eigenvalues, dtype=complex)
    n = len(phis)
    if not 0 <= p < n:
        raise OutOfSupportError(f"eigenvalue index {p} out of range for {n} values")
    ident = np.eye(M.shape[0], dtype=complex)
    out = ident.copy()
    for j in range(n):
        if j == p:
            continue
        gap = phis[p] - phis[j]
        scale = max(1.0, abs(phis[p]), abs(phis[j]))
        if abs(gap) <= EIGEN_DISTINCT_RTOL * scale:
            raise RepeatedEigenvalueError(
                f"eigenvalues {phis[p]} and {phis[j]} are not distinct at "
                f"relative tolerance {EIGEN_DISTINCT_RTOL:.0e}"
            )
        out = out @ (M - phis[j] * ident) / gap
    imag_norm = float(np.max(np.abs(out.imag))) if out.size else 0.0
    if imag_norm > IMAG_RESIDUE_TOL:
        raise ComplexResidueError(
            f"Lagrange coefficient has imaginary residue {imag_norm:.3e} "
            f"(eigenvalue {phis[p]} is complex or spectrum is not conjugate-closed)",
            imag_norm=imag_norm,
        )
    return out.real


def spectral_coefficients(A, left, right) -> list[tuple[complex, complex]]:
    """Pairs (eigenvalue, left' L_k right) for every spectral projector
    L_k of A, dominant eigenvalue first. Needs a simple spectrum."""
    M = _as_square(A)
    es = eigen(M)
    if not es.distinct:
        raise RepeatedEigenvalueError(
            "spectral tail analysis needs distinct eigenvalues"
        )
    Mc = M.astype(complex)
    n = Mc.shape[0]
    ident = np.eye(n, dtype=complex)
    out = []
    lv = np.asarray(left, dtype=complex)
    rv = np.asarray(right, dtype=complex)
    for k in range(n):
        proj = ident.copy()
        for j in range(n):
            if j == k:
                continue
            proj = proj @ (Mc - es.values[j] * ident) / (es.values[k] - es.values[j])
        out.append((complex(es.values[k]), complex(lv @ proj @ rv)))
    return out


def excited_decay(A, left, right,
                  coef_rtol: float = COEF_RTOL) -> tuple[float, complex] | None:
    """Dominant eigenvalue of A actually excited by (left, right).

    Returns (real eigenvalue, coefficient) of the slowest mode whose
    coefficient does not vanish relative to the largest one, or None when
    every coefficient vanishes. Raises ComplexResidueError if the leading
    excited mode oscillates.
    """
    coefs = spectral_coefficients(A, left, right)
    scale = max((abs(c) for _, c in coefs), default=0.0)
    if scale == 0.0:
        return None
    for phi, c in coefs:
        if abs(c) > coef_rtol * scale:
            if abs(phi.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(phi)):
                raise ComplexResidueError(
                    f"leading excited mode {phi} is oscillatory; "
                    "no real decay rate exists for this pairing",
                    imag_norm=abs(phi.imag),
                )
            return float(phi.real), c
    return None


def _simpson(f, a: float, fa: float, b: float, fb: float) -> tuple[float, float, float]:
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def integrate(f, a: float, b: float, tol: float = 1e-9,
              max_depth: int = 48) -> float:
    """Adaptive Simpson quadrature of f on [a, b].

    Subintervals are accepted when the two-panel refinement moves the
    estimate by at most 15 * local tolerance, and the standard
    Richardson correction delta/15 is added on acceptance. If any
    subinterval still disagrees at max_depth the total so far is attached
    to the QuadratureError as .best.
    """
    a = float(a)
    b = float(b)
    if b < a:
        raise OutOfSupportError(f"integration bounds reversed: [{a}, {b}]")
    if a == b:
        return 0.0
    fa = float(f(a))
    fb = float(f(b))
    m, fm, whole = _simpson(f, a, fa, b, fb)
    failed = False

    def recurse(a, fa, m, fm, b, fb, whole, tol, depth):
        nonlocal failed
        lm, flm, left = _simpson(f, a, fa, m, fm)
        rm, frm, right = _simpson(f, m, fm, b, fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol or depth <= 0:
            if abs(delta) > 15.0 * tol:
                failed = True
            return left + right + delta / 15.0
        half = 0.5 * tol
        return (recurse(a, fa, lm, flm, m, fm, left, half, depth - 1)
                + recurse(m, fm, rm, frm, b, fb, right, half, depth - 1))

    total = recurse(a, fa, m, fm, b, fb, whole, tol, max_depth)
    if failed:
        raise QuadratureError(
            f"adaptive quadrature on [{a}, {b}] did not converge to tol={tol:g} "
            f"within depth {max_depth}; best estimate {total!r}",
            best=total,
        )
    return total
