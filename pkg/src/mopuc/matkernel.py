"""Dense complex p x p matrix kernel.

Matrices are plain ``numpy`` complex arrays of shape ``(p, p)``; every routine
also accepts a stack of shape ``(..., p, p)`` and works on the trailing two
axes, which is how the circle-grid diagnostics evaluate thousands of small
matrices at once.

The Hermitian eigensolver is a cyclic complex Jacobi iteration and the inverse
is Gauss-Jordan elimination with partial pivoting. Both are vectorised over
the leading (batch) axes.
"""
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NotHermitian,
    NotPSD,
    SingularMatrix,
)

HERMITIAN_TOL = 1e-10
PSD_CLAMP = 1e-12
PIVOT_TOL = 1e-14
JACOBI_TOL = 1e-14


def as_cmat(A):
    """Coerce to a complex128 array with square, finite trailing axes."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2] or A.shape[-1] < 1:
        raise DimensionMismatch(f"expected (..., p, p) with p >= 1, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def _same_dim(A, B):
    if A.shape[-1] != B.shape[-1]:
        raise DimensionMismatch(f"dimension mismatch: {A.shape[-1]} vs {B.shape[-1]}")


def identity(p):
    return np.eye(p, dtype=np.complex128)


def herm_transpose(A):
    return np.conj(np.swapaxes(np.asarray(A), -1, -2))


def mul(A, B):
    A, B = as_cmat(A), as_cmat(B)
    _same_dim(A, B)
    return A @ B


def add(A, B):
    A, B = as_cmat(A), as_cmat(B)
    _same_dim(A, B)
    return A + B


def sub(A, B):
    A, B = as_cmat(A), as_cmat(B)
    _same_dim(A, B)
    return A - B


def scale(c, A):
    return complex(c) * as_cmat(A)


def trace(A):
    return np.trace(np.asarray(A), axis1=-2, axis2=-1)


def _fro(A):
    return np.sqrt(np.sum(np.abs(A) ** 2, axis=(-2, -1)))


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues (ascending) and unitary eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        V = self.eigenvectors
        return (V * self.eigenvalues[..., None, :]) @ herm_transpose(V)


def _jacobi(h):
    """Cyclic Jacobi on a stack (B, p, p) of exactly Hermitian matrices.

    Returns (eigenvalues, eigenvectors), unsorted.
    """
    h = h.copy()
    nb, p, _ = h.shape
    v = np.broadcast_to(identity(p), h.shape).copy()
    if p == 1:
        return h[:, :, 0].real.copy(), v

    fro = _fro(h)
    thr = JACOBI_TOL * fro
    # entries this small are left alone; dividing by subnormals overflows
    negligible = np.maximum(1e-30 * fro, 1e-290)
    thr = np.maximum(thr, p * negligible)
    offmask = ~np.eye(p, dtype=bool)
    max_sweeps = 30 * p * p
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(h[:, offmask]) ** 2, axis=-1))
        if np.all(off <= thr):
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                w = h[:, i, j]
                aw = np.abs(w)
                nz = aw > negligible
                safe = np.where(nz, aw, 1.0)
                phase = np.where(nz, w / safe, 1.0)
                theta = (h[:, j, j].real - h[:, i, i].real) / (2.0 * safe)
                sgn = np.where(theta >= 0.0, 1.0, -1.0)
                t = sgn / (np.abs(theta) + np.hypot(theta, 1.0))
                c = np.where(nz, 1.0 / np.sqrt(1.0 + t * t), 1.0)
                s = np.where(nz, t * c, 0.0)
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]] on the (i, j) plane
                gii, gij = c, s
                gji, gjj = -s * np.conj(phase), c * np.conj(phase)

                ci, cj = h[:, :, i].copy(), h[:, :, j].copy()
                h[:, :, i] = ci * gii[:, None] + cj * gji[:, None]
                h[:, :, j] = ci * gij[:, None] + cj * gjj[:, None]
                ri, rj = h[:, i, :].copy(), h[:, j, :].copy()
                h[:, i, :] = np.conj(gii)[:, None] * ri + np.conj(gji)[:, None] * rj
                h[:, j, :] = np.conj(gij)[:, None] * ri + np.conj(gjj)[:, None] * rj
                h[:, i, j] = 0.0
                h[:, j, i] = 0.0

                vi, vj = v[:, :, i].copy(), v[:, :, j].copy()
                v[:, :, i] = vi * gii[:, None] + vj * gji[:, None]
                v[:, :, j] = vi * gij[:, None] + vj * gjj[:, None]
    else:
        off = np.sqrt(np.sum(np.abs(h[:, offmask]) ** 2, axis=-1))
        if np.any(off > thr):
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    return np.diagonal(h, axis1=-2, axis2=-1).real.copy(), v


def _eig_sorted(h):
    """Sorted decomposition of an exactly Hermitian stack of any batch shape."""
    batch, p = h.shape[:-2], h.shape[-1]
    lam, v = _jacobi(h.reshape(-1, p, p))
    order = np.argsort(lam, axis=-1, kind="stable")
    lam = np.take_along_axis(lam, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return lam.reshape(batch + (p,)), v.reshape(batch + (p, p))


def herm_eig(A):
    """Eigen-decomposition of a Hermitian matrix (or stack).

    The input is symmetrised as ``(A + A*)/2`` after checking that the
    anti-Hermitian part is below ``1e-10 * (1 + ||A||_2)``.
    """
    A = as_cmat(A)
    h = 0.5 * (A + herm_transpose(A))
    lam, v = _eig_sorted(h)
    d = A - herm_transpose(A)
    if np.any(d != 0):
        # i*d is Hermitian, so its spectral norm is its largest |eigenvalue|
        dnorm = np.max(np.abs(_eig_sorted(1j * d)[0]), axis=-1)
        anorm = np.max(np.abs(lam), axis=-1)
        if np.any(dnorm > HERMITIAN_TOL * (1.0 + anorm)):
            raise NotHermitian(f"matrix is not Hermitian (||A - A*||_2 = {np.max(dnorm):.3e})")
    return SpectralDecomp(lam, v)


def herm_norm(A):
    """Spectral norm of a Hermitian matrix: the largest |eigenvalue|."""
    A = np.asarray(A, dtype=np.complex128)
    lam, _ = _eig_sorted(0.5 * (A + herm_transpose(A)))
    return np.max(np.abs(lam), axis=-1)


def psd_sqrt(A):
    """Hermitian PSD square root; tiny negative eigenvalues are clamped to 0."""
    dec = herm_eig(A)
    lam = dec.eigenvalues
    scale_ = 1.0 + np.max(np.abs(lam), axis=-1)
    if np.any(lam[..., 0] < -PSD_CLAMP * scale_):
        raise NotPSD(f"matrix is not PSD (lambda_min = {np.min(lam[..., 0]):.3e})")
    root = np.sqrt(np.clip(lam, 0.0, None))
    V = dec.eigenvectors
    B = (V * root[..., None, :]) @ herm_transpose(V)
    return 0.5 * (B + herm_transpose(B))


def singular_values(A):
    """Singular values in descending order, as sqrt(lambda(A A*))."""
    A = as_cmat(A)
    lam, _ = _eig_sorted(A @ herm_transpose(A))
    return np.sqrt(np.clip(lam, 0.0, None))[..., ::-1]


def spectral_norm(A):
    return singular_values(A)[..., 0]


def is_unitary(A, tol=1e-10):
    A = as_cmat(A)
    p = A.shape[-1]
    return bool(np.all(spectral_norm(A @ herm_transpose(A) - identity(p)) <= tol))


def inverse(A):
    """Gauss-Jordan inverse with partial pivoting.

    Raises SingularMatrix when a pivot falls below ``1e-14 * ||A||_2``.
    """
    A = as_cmat(A)
    batch, p = A.shape[:-2], A.shape[-1]
    a = A.reshape(-1, p, p).copy()
    inv = np.broadcast_to(identity(p), a.shape).copy()
    norm = spectral_norm(a)
    idx = np.arange(a.shape[0])
    for col in range(p):
        piv = col + np.argmax(np.abs(a[:, col:, col]), axis=1)
        for m in (a, inv):
            top, other = m[idx, col].copy(), m[idx, piv].copy()
            m[idx, col], m[idx, piv] = other, top
        pivot = a[:, col, col].copy()
        if np.any((np.abs(pivot) < PIVOT_TOL * norm) | (pivot == 0)):
            raise SingularMatrix("matrix is numerically singular")
        a[:, col, :] /= pivot[:, None]
        inv[:, col, :] /= pivot[:, None]
        factor = a[:, :, col].copy()
        factor[:, col] = 0.0
        a -= factor[:, :, None] * a[:, None, col, :]
        inv -= factor[:, :, None] * inv[:, None, col, :]
    return inv.reshape(batch + (p, p))

