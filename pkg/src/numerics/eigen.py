"""Eigensolvers for the small Hermitian matrices met in observability studies.

``jacobi_eigh`` is the primary solver (cyclic Jacobi sweeps; complex
Hermitian input goes through its real-symmetric embedding).
``inverse_iteration_min`` is an independent second implementation for the
smallest eigenvalue. ``jacobi_singular_values`` is the one-sided variant for
Gram matrices given through a square-root factor. ``pencil_threshold``
bounds a Rayleigh quotient pencil by bisection on positive definiteness.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from ..utils.error_handlers import ConditioningError, NumericalFailureError

MACHINE_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) with matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int
    off_norm: float

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def min_eigenvector(self) -> np.ndarray:
        return self.eigenvectors[:, 0]


def _as_hermitian(matrix: np.ndarray) -> np.ndarray:
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return 0.5 * (a + a.conj().T)


def _real_embedding(a: np.ndarray) -> np.ndarray:
    re, im = a.real, a.imag
    return np.block([[re, -im], [im, re]])


def _off_norm(a: np.ndarray) -> float:
    return float(np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0)))


def _jacobi_real(a: np.ndarray, tol: float, max_sweeps: int):
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return np.diag(a).copy(), v, 0, 0.0

    floor = MACHINE_EPS * max(np.linalg.norm(a), np.finfo(float).tiny)

    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                threshold = max(tol * np.sqrt(abs(a[p, p] * a[q, q])), floor)
                if abs(apq) <= threshold:
                    continue
                rotated = True

                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(1.0 + theta * theta))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q

        if not rotated:
            return np.diag(a).copy(), v, sweep, _off_norm(a)

    return None, v, max_sweeps, _off_norm(a)


def jacobi_eigh(
    matrix: np.ndarray, tol: float = 1.0e-12, max_sweeps: int = 50
) -> EigenDecomposition:
    """
    Diagonalize a Hermitian matrix with cyclic Jacobi sweeps.

    A rotation is applied while |a_pq| exceeds tol * sqrt(|a_pp a_qq|)
    (floored at machine precision times the Frobenius norm), which keeps small
    eigenvalues of positive semidefinite Gramians accurate.

    Args:
        matrix: Hermitian (or real symmetric) matrix
        tol: Relative off-diagonal tolerance
        max_sweeps: Maximum number of full cyclic sweeps

    Returns:
        EigenDecomposition sorted ascending

    Raises:
        NumericalFailureError: If the sweeps do not converge
    """
    a = _as_hermitian(matrix)
    n = a.shape[0]
    is_complex = np.iscomplexobj(a) and np.any(a.imag != 0.0)

    work = _real_embedding(a) if is_complex else a.real
    values, vectors, sweeps, off = _jacobi_real(work, tol, max_sweeps)

    if values is None:
        rayleigh = np.einsum("ij,ij->j", vectors, work @ vectors)
        residual = float(np.linalg.norm(work @ vectors - vectors * rayleigh[None, :]))
        raise NumericalFailureError(
            f"Jacobi eigensolver did not converge in {max_sweeps} sweeps",
            diagnostics={
                "size": int(n),
                "sweeps": int(sweeps),
                "off_diagonal_norm": off,
                "residual": residual,
            },
        )

    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]

    if is_complex:
        # the embedding doubles every eigenvalue; keep one of each pair
        values = values[::2]
        top, bottom = vectors[:n, ::2], vectors[n:, ::2]
        vectors = top + 1j * bottom
        norms = np.linalg.norm(vectors, axis=0)
        vectors = vectors / np.where(norms > 0.0, norms, 1.0)

    return EigenDecomposition(
        eigenvalues=values, eigenvectors=vectors, sweeps=sweeps, off_norm=off
    )


def gershgorin_lower_bound(matrix: np.ndarray) -> float:
    """Lower bound on the spectrum of a Hermitian matrix."""
    a = _as_hermitian(matrix)
    radii = np.sum(np.abs(a), axis=1) - np.abs(np.diag(a))
    return float(np.min(np.diag(a).real - radii))


def inverse_iteration_min(
    matrix: np.ndarray,
    shift: Optional[float] = None,
    max_iterations: int = 50000,
    rtol: float = 1.0e-13,
    seed: int = 12345,
) -> float:
    """
    Smallest eigenvalue by shifted inverse iteration.

    The shift defaults to a point strictly below the Gershgorin disc union,
    so iteration converges to the bottom of the spectrum. Iteration stops once
    the residual ||Ax - rho x|| is below rtol * ||A||_F, which bounds the
    distance from rho to the spectrum by the same amount.

    Raises:
        NumericalFailureError: If the residual does not fall below the tolerance
    """
    a = _as_hermitian(matrix)
    n = a.shape[0]
    scale = max(float(np.linalg.norm(a)), np.finfo(float).tiny)
    if n == 1:
        return float(a[0, 0].real)

    if shift is None:
        shift = gershgorin_lower_bound(a) - 1.0e-8 * scale

    factor = scipy.linalg.lu_factor(a - shift * np.eye(n))
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n).astype(a.dtype)
    x /= np.linalg.norm(x)

    rho = float(np.real(np.vdot(x, a @ x)))
    residual = float(np.linalg.norm(a @ x - rho * x))
    for _ in range(max_iterations):
        y = scipy.linalg.lu_solve(factor, x)
        x = y / np.linalg.norm(y)
        ax = a @ x
        rho = float(np.real(np.vdot(x, ax)))
        residual = float(np.linalg.norm(ax - rho * x))
        if residual <= rtol * scale:
            return rho

    raise NumericalFailureError(
        f"inverse iteration did not settle in {max_iterations} iterations",
        diagnostics={
            "size": int(n),
            "shift": float(shift),
            "rayleigh_quotient": rho,
            "residual": residual,
        },
    )


def jacobi_singular_values(
    matrix: np.ndarray, tol: Optional[float] = None, max_sweeps: int = 50
) -> np.ndarray:
    """
    Singular values of a tall matrix by one-sided (Hestenes) Jacobi rotations.

    Columns are rotated pairwise until every pair is orthogonal to within tol
    (relative to the column norms, default rows * machine epsilon); the
    singular values are then the column norms. Small singular values come
    out with relative accuracy, so sigma_min**2 resolves eigenvalues of B^H B
    far below machine precision times its norm.

    Returns:
        Singular values in ascending order

    Raises:
        NumericalFailureError: If the sweeps do not converge
    """
    b = np.array(matrix, dtype=complex if np.iscomplexobj(matrix) else float)
    if b.ndim != 2 or b.shape[0] < b.shape[1]:
        raise ValueError(f"expected a tall matrix, got shape {b.shape}")
    n = b.shape[1]
    if tol is None:
        tol = b.shape[0] * MACHINE_EPS

    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = float(np.real(np.vdot(b[:, p], b[:, p])))
                beta = float(np.real(np.vdot(b[:, q], b[:, q])))
                gamma = np.vdot(b[:, p], b[:, q])
                magnitude = abs(gamma)
                if magnitude <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True

                col_q = b[:, q] * np.conj(gamma / magnitude)
                zeta = (beta - alpha) / (2.0 * magnitude)
                t = (1.0 if zeta >= 0.0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                col_p = b[:, p].copy()
                b[:, p] = c * col_p - s * col_q
                b[:, q] = s * col_p + c * col_q

        if not rotated:
            return np.sort(np.linalg.norm(b, axis=0))

    raise NumericalFailureError(
        f"one-sided Jacobi did not converge in {max_sweeps} sweeps",
        diagnostics={"shape": list(b.shape), "sweeps": max_sweeps},
    )


def _is_positive_definite(matrix: np.ndarray) -> bool:
    try:
        scipy.linalg.cholesky(matrix, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        return False
    return True


def pencil_threshold(
    a_diag: np.ndarray,
    m: np.ndarray,
    congruence_tol: float = 1.0e-12,
    rtol: float = 1.0e-10,
    max_expansions: int = 200,
) -> float:
    """
    Largest value of v*Av / v*Mv over vectors with v*Av > 0, for A = diag(a_diag).

    This is the top of the pencil (A, M) restricted to the cone where A is
    positive, equivalently the smallest mu >= 0 with mu*M - A positive
    semidefinite. It is located by bracketing and bisection, each step a
    Cholesky test of mu*M - A. Returns 0 when A has no positive direction.

    Raises:
        ConditioningError: If M restricted to the positive modes is numerically
            singular or no bracket can be found
    """
    a_diag = np.asarray(a_diag, dtype=float)
    m = np.asarray(m, dtype=float)
    positive = a_diag > 0.0
    if not positive.any():
        return 0.0

    m_pp = m[np.ix_(positive, positive)]
    m_eigs = np.linalg.eigvalsh(m_pp)
    if m_eigs[0] <= congruence_tol * max(m_eigs[-1], np.finfo(float).tiny):
        raise ConditioningError(
            "interval Gram matrix is numerically singular on the on-shell modes",
            diagnostics={
                "positive_modes": int(positive.sum()),
                "min_eigenvalue": float(m_eigs[0]),
                "max_eigenvalue": float(m_eigs[-1]),
            },
        )

    shifted = -np.diag(a_diag)
    hi = float(np.max(a_diag[positive]) / m_eigs[0])
    for _ in range(max_expansions):
        if _is_positive_definite(hi * m + shifted):
            break
        hi *= 2.0
    else:
        raise ConditioningError(
            "could not bracket the pencil threshold",
            diagnostics={"upper_bound": hi},
        )

    lo = 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _is_positive_definite(mid * m + shifted):
            hi = mid
        else:
            lo = mid
    return hi
