"""Dense complex matrix kernel: inverses, spectra, expm, principal logm.

Matrices are plain ``numpy.ndarray``s (real or complex, square).  LU-based
inversion/determinants and the eigensolver sit on LAPACK via numpy/scipy;
the matrix exponential (Pade-13 scaling and squaring) and principal
logarithm (eigendecomposition path with an inverse-scaling-and-squaring
fallback) are implemented here because their branch and accuracy contracts
are load-bearing for the Floquet factorization.

Eigenvalues are always reported sorted by descending modulus, then
ascending argument, so downstream reports are deterministic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "NumericalError",
    "SingularMatrixError",
    "ConvergenceError",
    "RealificationError",
    "Spectrum",
    "norm1",
    "inv",
    "solve",
    "det",
    "eig",
    "expm",
    "logm_principal",
    "logm_real_doubled",
]


class NumericalError(RuntimeError):
    """A numeric kernel or operator assembly failed its contract."""


class SingularMatrixError(NumericalError):
    """Matrix singular to working tolerance."""


class ConvergenceError(NumericalError):
    """An iteration exhausted its budget without meeting its tolerance."""


class RealificationError(NumericalError):
    """A logarithm expected to be real carries a non-negligible imaginary part."""


def norm1(M) -> float:
    """Matrix 1-norm (max absolute column sum)."""
    M = np.atleast_2d(np.asarray(M))
    return float(np.abs(M).sum(axis=0).max())


def _square(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


_PIVOT_RTOL = 1e-14


def _lu_raw(M):
    with warnings.catch_warnings():
        # singularity is handled by the callers, not by scipy's warning
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        return scipy.linalg.lu_factor(M, check_finite=False)


def _lu(M):
    lu, piv = _lu_raw(M)
    diag = np.abs(np.diag(lu))
    if diag.min() <= _PIVOT_RTOL * max(norm1(M), 1e-300):
        raise SingularMatrixError(
            f"matrix singular to tolerance (min pivot {diag.min():.3e})"
        )
    return lu, piv


def inv(M):
    """Inverse by LU with partial pivoting.

    Raises
    ------
    SingularMatrixError
        If some pivot falls below ``1e-14 * norm1(M)``.
    """
    M = _square(M)
    lu, piv = _lu(M)
    return scipy.linalg.lu_solve((lu, piv), np.eye(M.shape[0], dtype=M.dtype), check_finite=False)


def solve(M, B):
    """Solve ``M @ X = B`` with the same pivot-tolerance policy as ``inv``."""
    M = _square(M)
    B = np.asarray(B)
    if np.iscomplexobj(B) and not np.iscomplexobj(M):
        M = M.astype(complex)
    lu, piv = _lu(M)
    return scipy.linalg.lu_solve((lu, piv), B, check_finite=False)


def det(M):
    """Determinant from the pivoted LU factorization."""
    M = _square(M)
    lu, piv = _lu_raw(M)
    d = np.prod(np.diag(lu))
    swaps = int(np.sum(piv != np.arange(len(piv))))
    sign = -1.0 if swaps % 2 else 1.0
    return complex(sign * d) if np.iscomplexobj(M) else float((sign * d).real)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (with multiplicity) plus right eigenvectors.

    ``condition_estimate`` is the 2-norm condition number of the eigenvector
    matrix; very large or infinite values signal a (numerically) defective
    matrix whose eigendecomposition should not be trusted.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    condition_estimate: float


def _sort_spectral(values, vectors=None):
    order = np.lexsort((np.angle(values), -np.abs(values)))
    if vectors is None:
        return values[order], None
    return values[order], vectors[:, order]


def eig(M) -> Spectrum:
    """Full spectrum of a square matrix.

    Eigenvalues are sorted by (descending modulus, ascending argument);
    eigenvectors are unit columns aligned with the eigenvalue order.
    """
    M = _square(M)
    try:
        values, vectors = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - pathological input
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc
    values = values.astype(complex)
    values, vectors = _sort_spectral(values, vectors)
    try:
        cond = float(np.linalg.cond(vectors))
    except np.linalg.LinAlgError:  # pragma: no cover
        cond = np.inf
    if not np.isfinite(cond):
        cond = np.inf
    return Spectrum(values, vectors, cond)


# Pade-13 coefficients for expm (scaling so that norm1(M / 2^s) <= theta13).
_PADE13_B = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.4


def expm(M):
    """Matrix exponential by scaling and squaring with a Pade-13 core."""
    M = _square(M)
    dtype = complex if np.iscomplexobj(M) else float
    A = M.astype(dtype)
    n = A.shape[0]
    ident = np.eye(n, dtype=dtype)

    nrm = norm1(A)
    if nrm == 0.0:
        return ident.copy()
    s = max(0, int(np.ceil(np.log2(nrm / _THETA13)))) if nrm > _THETA13 else 0
    A = A / (2.0**s)

    b = _PADE13_B
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def _principal_log_scalar(z):
    z = complex(z)
    if z == 0:
        raise SingularMatrixError("logarithm of a singular matrix (zero eigenvalue)")
    if z.imag == 0.0:
        z = complex(z.real, 0.0)  # normalize -0.0j so arg(-1) is +pi, not -pi
    return complex(np.log(z))


def _db_sqrt(M, max_iter=60, rtol=1e-15):
    """Principal square root by the Denman-Beavers iteration."""
    Y = M.astype(complex)
    Z = np.eye(M.shape[0], dtype=complex)
    for _ in range(max_iter):
        Y_next = 0.5 * (Y + inv(Z))
        Z_next = 0.5 * (Z + inv(Y))
        delta = norm1(Y_next - Y)
        Y, Z = Y_next, Z_next
        if delta <= rtol * max(norm1(Y), 1.0):
            return Y
    raise ConvergenceError("square-root iteration did not converge")


def _log_pade7(G):
    # Gauss-Legendre 7-point evaluation of log(I + G); valid for norm1(G) <= ~0.3.
    nodes, weights = np.polynomial.legendre.leggauss(7)
    nodes = (nodes + 1.0) / 2.0
    weights = weights / 2.0
    n = G.shape[0]
    ident = np.eye(n, dtype=complex)
    L = np.zeros((n, n), dtype=complex)
    for x, w in zip(nodes, weights):
        L += w * (G @ inv(ident + x * G))
    return L


_EIG_COND_SWITCH = 1e8
_ISS_TARGET = 0.3


def logm_principal(M):
    """Principal matrix logarithm: ``expm(L) = M`` with eigenvalue
    imaginary parts in ``(-pi, pi]``.

    A diagonalization path is used while the eigenvector matrix is well
    conditioned (condition number at most 1e8); otherwise the log is built
    by inverse scaling and squaring: repeated Denman-Beavers principal
    square roots until ``norm1(root - I) <= 0.3``, a Pade-7 evaluation of
    ``log(I + X)``, then multiplication by ``2^s``.

    Raises
    ------
    SingularMatrixError
        If ``M`` is singular to tolerance (the log does not exist).
    ConvergenceError
        If the square-root iteration stalls (e.g. defective matrices with
        eigenvalues on the closed negative real axis).
    """
    M = _square(M)
    spec = eig(M)
    if np.min(np.abs(spec.eigenvalues)) <= 1e-14 * max(norm1(M), 1.0):
        raise SingularMatrixError("logarithm of a singular matrix")

    if spec.condition_estimate <= _EIG_COND_SWITCH and spec.eigenvectors is not None:
        logvals = np.array([_principal_log_scalar(z) for z in spec.eigenvalues])
        V = spec.eigenvectors
        return V @ np.diag(logvals) @ inv(V)

    X = M.astype(complex)
    s = 0
    ident = np.eye(M.shape[0], dtype=complex)
    while norm1(X - ident) > _ISS_TARGET:
        if s >= 60:
            raise ConvergenceError("inverse scaling-and-squaring exhausted its budget")
        X = _db_sqrt(X)
        s += 1
    return (2.0**s) * _log_pade7(X - ident)


_REALIFY_ATOL = 1e-9


def logm_real_doubled(M):
    """Real logarithm of the square: real ``L`` with ``expm(L) = M @ M``.

    Computes the principal log of ``M^2`` and strips an imaginary residue
    below 1e-9; a larger residue (which occurs when ``M`` has a purely
    imaginary eigenvalue pair, so ``M^2`` has negative real eigenvalues)
    is reported as a defect.
    """
    M = _square(M)
    if np.iscomplexobj(M) and np.abs(M.imag).max() > 0.0:
        raise ValueError("logm_real_doubled expects a real matrix")
    M = M.real.astype(float)
    L = logm_principal(M @ M)
    residue = float(np.abs(L.imag).max()) if np.iscomplexobj(L) else 0.0
    if residue > _REALIFY_ATOL * max(1.0, norm1(L)):
        raise RealificationError(
            f"principal log of the squared matrix is not real "
            f"(imaginary residue {residue:.3e}); the spectrum of the input "
            f"pairs on the imaginary axis"
        )
    return np.ascontiguousarray(L.real)
