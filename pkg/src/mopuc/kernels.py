"""Christoffel-Darboux kernels and pointwise identities of an OPUC system.

All checks evaluate the stored coefficient polynomials directly, so they
test the left family, the right family, reversal and normalisation
against each other. Residuals are reported relative to the size of the
terms involved, ``||lhs - rhs|| / (1 + magnitude)``, because the
polynomials of ill-conditioned measures take large values and rounding
scales with them.
"""
import numpy as np

from .errors import EmptyGrid
from .matkernel import herm_transpose, identity, inverse, psd_sqrt, spectral_norm
from .measure import circle_grid

DEFAULT_CIRCLE_POINTS = 256
CD_GRID_SIZE = 16
INTERIOR_RADIUS = 0.9


def circle_points(grid=None):
    """Points on |z| = 1 from ``None`` (default size), a count, or explicit points."""
    if grid is None:
        grid = DEFAULT_CIRCLE_POINTS
    if np.isscalar(grid) and not np.iscomplexobj(grid):
        if int(grid) < 1:
            raise EmptyGrid("circle grid must contain at least one point")
        theta, _ = circle_grid(int(grid))
        return np.exp(1j * theta)
    z = np.atleast_1d(np.asarray(grid, dtype=complex))
    if z.size == 0:
        raise EmptyGrid("circle grid must contain at least one point")
    return z


def default_cd_grid():
    """(z, xi) pairs: a 16 x 16 tensor of circle points plus 16 interior pairs.

    Interior pairs are deterministic with moduli in [0.3, 0.9].
    """
    c = circle_points(CD_GRID_SIZE)
    z, xi = np.meshgrid(c, c, indexing="ij")
    k = np.arange(CD_GRID_SIZE)
    rz = 0.3 + 0.6 * ((k * 7) % CD_GRID_SIZE) / (CD_GRID_SIZE - 1)
    rx = 0.3 + 0.6 * ((k * 11 + 3) % CD_GRID_SIZE) / (CD_GRID_SIZE - 1)
    zi = rz * np.exp(1j * (0.37 + 2.1 * k))
    xii = rx * np.exp(1j * (1.91 - 1.3 * k))
    return np.concatenate([z.ravel(), zi]), np.concatenate([xi.ravel(), xii])


def _stack(polys, z):
    return np.stack([P(z) for P in polys])


def cd_kernel_left(sys, n, z, xi):
    """sum_{k=0}^n [phi_k^L(z)]^* phi_k^L(xi); ``z`` and ``xi`` broadcast."""
    z, xi = np.broadcast_arrays(np.asarray(z, complex), np.asarray(xi, complex))
    A = _stack(sys.phiL[: n + 1], z)
    B = _stack(sys.phiL[: n + 1], xi)
    return np.sum(herm_transpose(A) @ B, axis=0)


def cd_kernel_right(sys, n, z, xi):
    """sum_{k=0}^n phi_k^R(xi) [phi_k^R(z)]^*."""
    z, xi = np.broadcast_arrays(np.asarray(z, complex), np.asarray(xi, complex))
    A = _stack(sys.phiR[: n + 1], z)
    B = _stack(sys.phiR[: n + 1], xi)
    return np.sum(B @ herm_transpose(A), axis=0)


def _cd_residuals(sys, n, z, xi):
    A = _stack(sys.phiL[: n + 1], z)
    B = _stack(sys.phiL[: n + 1], xi)
    C = _stack(sys.phiR[: n + 1], z)
    D = _stack(sys.phiR[: n + 1], xi)
    nA, nB = spectral_norm(A), spectral_norm(B)
    nC, nD = spectral_norm(C), spectral_norm(D)
    w = (xi * np.conj(z))[:, None, None]

    revR = sys.phiR[n].reverse(n)
    rz, rx = revR(z), revR(xi)
    K = np.sum(herm_transpose(A) @ B, axis=0)
    lhs = (1.0 - w) * K
    rhs = herm_transpose(rz) @ rx - w * (herm_transpose(A[n]) @ B[n])
    mag = (
        np.sum(nA * nB, axis=0)
        + spectral_norm(rz) * spectral_norm(rx)
        + nA[n] * nB[n]
    )
    left = spectral_norm(lhs - rhs) / (1.0 + mag)

    revL = sys.phiL[n].reverse(n)
    lz, lx = revL(z), revL(xi)
    Kd = np.sum(D @ herm_transpose(C), axis=0)
    lhs = (1.0 - w) * Kd
    rhs = lx @ herm_transpose(lz) - w * (D[n] @ herm_transpose(C[n]))
    mag = (
        np.sum(nC * nD, axis=0)
        + spectral_norm(lz) * spectral_norm(lx)
        + nC[n] * nD[n]
    )
    right = spectral_norm(lhs - rhs) / (1.0 + mag)
    return left, right


def verify_cd(sys, n, grid=None):
    """Largest relative residual of the CD formula and its dual.

        (1 - xi conj(z)) sum_k [phi_k^L(z)]^* phi_k^L(xi)
            = [rev phi_n^R(z)]^* rev phi_n^R(xi) - xi conj(z) [phi_n^L(z)]^* phi_n^L(xi)
        (1 - xi conj(z)) sum_k phi_k^R(xi) [phi_k^R(z)]^*
            = rev phi_n^L(xi) [rev phi_n^L(z)]^* - xi conj(z) phi_n^R(xi) [phi_n^R(z)]^*

    ``grid`` is a pair of equally shaped point arrays (default
    :func:`default_cd_grid`). Both sides are summed directly.
    """
    z, xi = default_cd_grid() if grid is None else grid
    z = np.atleast_1d(np.asarray(z, complex)).ravel()
    xi = np.atleast_1d(np.asarray(xi, complex)).ravel()
    if z.size == 0 or z.shape != xi.shape:
        raise EmptyGrid("CD grid needs equally many z and xi points")
    left, right = _cd_residuals(sys, n, z, xi)
    return float(max(np.max(left), np.max(right)))


def circle_identity_residual(sys, n, grid=None):
    """max ||phi_n^R rev(phi_n^R) - rev(phi_n^L) phi_n^L||_2 / (1 + scale) on |z| = 1."""
    z = circle_points(grid)
    R, L = sys.phiR[n](z), sys.phiL[n](z)
    revR, revL = sys.phiR[n].reverse(n)(z), sys.phiL[n].reverse(n)(z)
    a, b = R @ revR, revL @ L
    scale = spectral_norm(R) * spectral_norm(revR) + spectral_norm(revL) * spectral_norm(L)
    return float(np.max(spectral_norm(a - b) / (1.0 + scale)))


def ratio_unitarity(sys, n, grid=None):
    """Deviation of R = rev(phi_n^R) (phi_n^L)^{-1} from a unitary on |z| = 1.

    Returns the larger of max ||R R^* - I||_2 and
    max ||R - (phi_n^R)^{-1} rev(phi_n^L)||_2.
    """
    z = circle_points(grid)
    R = sys.phiR[n].reverse(n)(z) @ inverse(sys.phiL[n](z))
    R2 = inverse(sys.phiR[n](z)) @ sys.phiL[n].reverse(n)(z)
    dev = spectral_norm(R @ herm_transpose(R) - identity(sys.p))
    alt = spectral_norm(R - R2)
    return float(max(np.max(dev), np.max(alt)))


def ratio_factor(sys, n):
    """(I - H_n H_n^*)^{1/2}, the factor in front of phi_n^L in the recurrence."""
    H = sys.reflection(n)
    return psd_sqrt(identity(sys.p) - H @ herm_transpose(H))
