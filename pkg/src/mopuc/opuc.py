"""Left/right orthonormal matrix polynomials and their reflection coefficients.

Two constructions are provided:

* :func:`build_system` runs the Szego recursion. It starts from
  ``phi_0 = mu_0^{-1/2}``, takes each reflection coefficient from
  ``H_{n+1} = -<z phi_n^L, reversed(phi_n^R)>_L`` and raises the degree with
  :func:`mopuc.recurrence.szego_step`. This is the canonical constructor.
  The inner products come either from a moment table or, for measures,
  from orthonormal values on quadrature nodes (:func:`arnoldi_reflections`).
* :func:`gram_schmidt_left` / :func:`gram_schmidt_right` orthonormalise
  ``1, z, z^2, ...`` through a Cholesky factorisation of the block-Toeplitz
  Gram matrix and fix the unitary freedom by making leading coefficients
  Hermitian positive definite. They serve as an independent check.

Only unitarily invariant quantities (singular values of H_n, [phi]^* phi)
are comparable between the two.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DegenerateMeasure,
    IncompatiblePair,
    QuadratureUnderResolved,
    ReflectionTooLarge,
)
from .matkernel import herm_eig, herm_transpose, identity, inverse, psd_sqrt, spectral_norm
from .measure import MatMeasure, MomentTable, compute_moments, inner_left, quadrature_rule
from .mpoly import MatPoly, matrices_from_json, matrix_to_json

RECURRENCE = "RecurrenceNormalized"
HPD = "HPDNormalized"
REFLECTION_MARGIN = 1e-8
GRAM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OPUCSystem:
    """phiL[n], phiR[n] for n = 0..N and H[n] = H_{n+1} for n = 0..N-1."""

    p: int
    phiL: tuple
    phiR: tuple
    H: np.ndarray
    normalization: str = RECURRENCE

    def __post_init__(self):
        object.__setattr__(self, "phiL", tuple(self.phiL))
        object.__setattr__(self, "phiR", tuple(self.phiR))
        H = np.asarray(self.H, dtype=complex).reshape(-1, self.p, self.p)
        object.__setattr__(self, "H", H)
        if not (len(self.phiL) == len(self.phiR) == len(H) + 1):
            raise ValueError("need N + 1 polynomials per side and N reflection coefficients")

    @property
    def N(self):
        return len(self.H)

    def reflection(self, n):
        """H_n in 1-based numbering."""
        return self.H[n - 1]

    def hn_norms(self):
        return spectral_norm(self.H) if self.N else np.zeros(0)

    def to_json(self):
        return {
            "p": self.p,
            "N": self.N,
            "normalization": self.normalization,
            "H": [matrix_to_json(h) for h in self.H],
            "phiL": [P.to_json() for P in self.phiL],
            "phiR": [P.to_json() for P in self.phiR],
        }

    @classmethod
    def from_json(cls, d):
        p = int(d["p"])
        H = matrices_from_json(d["H"]) if d["H"] else np.zeros((0, p, p), complex)
        return cls(
            p,
            [MatPoly.from_json(x) for x in d["phiL"]],
            [MatPoly.from_json(x) for x in d["phiR"]],
            H,
            d.get("normalization", RECURRENCE),
        )


def gram_min_eig(T, n, side="left"):
    k = (n + 1) * T.p
    return float(np.linalg.eigvalsh(T.block_toeplitz(n, side)[:k, :k])[0])


def check_gram(T, N, degrees=None):
    """Raise DegenerateMeasure at the first degree whose Gram section has
    lambda_min <= 1e-12 * ||mu_0||_2."""
    mu0 = spectral_norm(T[0])
    for n in range(N + 1) if degrees is None else degrees:
        for side in ("left", "right"):
            lam = gram_min_eig(T, n, side)
            if not lam > GRAM_TOL * mu0:
                raise DegenerateMeasure(
                    f"Gram section of degree {n} is numerically singular "
                    f"(lambda_min = {lam:.3e}); the measure has too few support points",
                    degree=n,
                )


def _hpd_polar_left(P):
    """U P with unitary U such that the leading coefficient becomes HPD."""
    lead = P.leading
    S = psd_sqrt(herm_transpose(lead) @ lead)
    W = lead @ inverse(S)
    return P.left_mul(herm_transpose(W))


def _hpd_polar_right(P):
    lead = P.leading
    S = psd_sqrt(lead @ herm_transpose(lead))
    W = inverse(S) @ lead
    return P.right_mul(herm_transpose(W))


def gram_schmidt_left(T, N):
    """Left orthonormal polynomials of degree 0..N with HPD leading coefficients."""
    check_gram(T, N)
    p = T.p
    L = np.linalg.cholesky(T.block_toeplitz(N, "left"))
    C = solve_triangular(L, np.eye(L.shape[0]), lower=True)
    polys = []
    for n in range(N + 1):
        rows = C[n * p:(n + 1) * p, :(n + 1) * p]
        coeffs = rows.reshape(p, n + 1, p).transpose(1, 0, 2)
        polys.append(_hpd_polar_left(MatPoly(coeffs)))
    return polys


def gram_schmidt_right(T, N):
    """Right orthonormal polynomials of degree 0..N with HPD leading coefficients."""
    check_gram(T, N)
    p = T.p
    L = np.linalg.cholesky(T.block_toeplitz(N, "right"))
    C = herm_transpose(solve_triangular(L, np.eye(L.shape[0]), lower=True))
    polys = []
    for n in range(N + 1):
        cols = C[:(n + 1) * p, n * p:(n + 1) * p]
        polys.append(_hpd_polar_right(MatPoly(cols.reshape(n + 1, p, p))))
    return polys


def reflection_from_coeffs(phiL, phiR, tol=1e-9):
    """H_n = (L_{n,n}^*)^{-1} K_{n,0} from a degree-n left/right pair.

    Also checks L_{n,0}^* L_{n,n} = K_{n,n} K_{n,0}^*, which holds for any
    pair coming from the same measure, whatever the unitary normalisation.
    """
    if phiL.deg != phiR.deg or phiL.deg < 1:
        raise ValueError("need a left/right pair of equal degree n >= 1")
    Lnn, Ln0 = phiL.leading, phiL.constant_term
    Knn, Kn0 = phiR.leading, phiR.constant_term
    lhs = herm_transpose(Ln0) @ Lnn
    rhs = Knn @ herm_transpose(Kn0)
    scale = 1.0 + spectral_norm(lhs) + spectral_norm(rhs)
    if spectral_norm(lhs - rhs) > tol * scale:
        raise IncompatiblePair(
            f"L_n0^* L_nn != K_nn K_n0^* (residual {spectral_norm(lhs - rhs):.3e})"
        )
    H = inverse(herm_transpose(Lnn)) @ Kn0
    H_alt = Ln0 @ inverse(herm_transpose(Knn))
    if spectral_norm(H - H_alt) > tol * (1.0 + spectral_norm(H)):
        raise IncompatiblePair("the two forms of the reflection coefficient disagree")
    return H


def reflection_from_moments(phiL, phiR, T):
    """H_{n+1} = -<z phi_n^L, reversed(phi_n^R)>_L."""
    n = phiL.deg
    return -inner_left(phiL.mul_z(), phiR.reverse(n), T)


def orthonormality_residual(polys, T, side="left"):
    """max_{m,n} || <phi_m, phi_n> - delta_{mn} I ||_2 over the given family."""
    p, N = T.p, len(polys) - 1
    C = np.zeros(((N + 1) * p, (N + 1) * p), complex)
    for n, P in enumerate(polys):
        c = P.padded(N).coeffs.astype(complex)
        if side == "left":
            C[n * p:(n + 1) * p] = c.transpose(1, 0, 2).reshape(p, -1)
        else:
            C[:, n * p:(n + 1) * p] = c.reshape(-1, p)
    if side == "left":
        R = C @ T.block_toeplitz(N, "left") @ herm_transpose(C)
    else:
        R = herm_transpose(C) @ T.block_toeplitz(N, "right") @ C
    R = R - np.eye(R.shape[0])
    blocks = R.reshape(N + 1, p, N + 1, p).transpose(0, 2, 1, 3)
    return float(np.max(spectral_norm(blocks)))


def _table(source, M):
    if isinstance(source, MomentTable):
        return source
    if isinstance(source, MatMeasure):
        return compute_moments(source, M)
    raise TypeError("expected a MatMeasure or MomentTable")


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Nodes z_i on the circle with PSD weights W_i = B_i B_i^*.

    Quadrature nodes of the absolutely continuous part and the atoms both
    appear as nodes. A polynomial P is represented by the stack of values
    P(z_i) B_i, in which the left inner product is sum_i X_i Y_i^*.
    """

    z: np.ndarray
    B: np.ndarray

    @classmethod
    def from_measure(cls, measure, quad_points=None):
        q = measure.quad_points if quad_points is None else quad_points
        theta, w = quadrature_rule(measure.breakpoints(), q)
        W = measure.density(theta) * w[:, None, None]
        keep = np.any(W != 0, axis=(1, 2))
        z = [np.exp(1j * theta[keep])]
        B = [psd_sqrt(W[keep])]
        for angle, mass in measure.atoms:
            z.append(np.array([np.exp(1j * angle)]))
            B.append(psd_sqrt(mass)[None])
        return cls(np.concatenate(z), np.concatenate(B))

    @property
    def p(self):
        return self.B.shape[-1]

    def values(self, P):
        return P(self.z) @ self.B

    def inner_left(self, P, Q):
        return _ip(self.values(P), self.values(Q))

    def orthonormality_residual(self, polys, side="left"):
        """max_{m,n} || <phi_m, phi_n> - delta_{mn} I ||_2 by quadrature."""
        Bh = herm_transpose(self.B)
        worst = 0.0
        if side == "left":
            X = [P(self.z) @ self.B for P in polys]
            ip = _ip
        else:
            X = [Bh @ P(self.z) for P in polys]
            ip = _ipr
        I = identity(self.p)
        for m in range(len(X)):
            for n in range(m, len(X)):
                G = ip(X[m], X[n]) - (I if m == n else 0.0)
                worst = max(worst, float(spectral_norm(G)))
        return worst

    def inner_right(self, P, Q):
        # int P^* W Q = sum_i (B_i^* P_i)^* (B_i^* Q_i)
        Bh = herm_transpose(self.B)
        return _ipr(Bh @ P(self.z), Bh @ Q(self.z))


def _ip(X, Y):
    return np.einsum("iab,icb->ac", X, np.conj(Y))


def _ipr(X, Y):
    return np.einsum("iba,ibc->ac", np.conj(X), Y)


def arnoldi_reflections(dm, N):
    """Reflection coefficients H_1..H_N of a discrete measure.

    Block Arnoldi on multiplication by z, run for the left family (values
    phi^L(z_i) B_i) and the right family (values B_i^* phi^R(z_i)), with two
    passes of classical Gram-Schmidt per step. In the recurrence
    normalisation the residual Gram matrices are exactly I - H H^* and
    I - H^* H, so their inverse square roots advance the orthonormal values
    and the leading coefficient K_{n,n} of phi_n^R. Then

        H_{n+1} = -<z phi_n^L, 1> K_{n,n}.

    Tracking K through the computed residual rather than through the
    computed H keeps rounding from feeding back into later coefficients,
    and the monomial coefficients (huge for gapped measures) never appear.

    Left values are laid out as p x (m p) row blocks and right values as
    (m p) x p column blocks, so both inner products are plain matrix products.
    """
    p, m = dm.p, dm.z.size
    Bw = dm.B.transpose(1, 0, 2).reshape(p, m * p)
    mu0 = Bw @ Bw.conj().T
    mu0 = 0.5 * (mu0 + herm_transpose(mu0))
    scale = spectral_norm(mu0)
    if not herm_eig(mu0).eigenvalues[0] > GRAM_TOL * scale:
        raise DegenerateMeasure("total mass mu_0 is singular", degree=0)
    phi0 = inverse(psd_sqrt(mu0))
    zrep = np.repeat(dm.z, p)
    QL = np.zeros(((N + 1) * p, m * p), complex)
    QR = np.zeros((m * p, (N + 1) * p), complex)
    QL[:p] = phi0 @ Bw
    # right values B_i^* phi0 stacked by node
    QR[:, :p] = herm_transpose(dm.B).reshape(m * p, p) @ phi0
    K = phi0
    # <V, 1>_L = <V, Phi_0> (phi0^{-1})^*
    first = inverse(herm_transpose(phi0))
    Hs = []
    for n in range(N):
        k = (n + 1) * p
        QLk, QRk = QL[:k], QR[:, :k]
        VL = QL[n * p:k] * zrep
        VR = zrep[:, None] * QR[:, n * p:k]
        H = -(VL @ QL[:p].conj().T) @ first @ K
        h = spectral_norm(H)
        for _ in range(2):
            VL = VL - (VL @ QLk.conj().T) @ QLk
            VR = VR - QRk @ (QRk.conj().T @ VR)
        GL = VL @ VL.conj().T
        GR = VR.conj().T @ VR
        GL = 0.5 * (GL + herm_transpose(GL))
        GR = 0.5 * (GR + herm_transpose(GR))
        # a finitely supported measure exhausts the Krylov space (and then
        # H is unitary); report the cause rather than the symptom
        if not min(herm_eig(GL).eigenvalues[0], herm_eig(GR).eigenvalues[0]) > GRAM_TOL:
            raise DegenerateMeasure(
                f"Krylov block of degree {n + 1} is rank deficient: "
                "the measure has too few support points",
                degree=n + 1,
            )
        if h >= 1.0 - REFLECTION_MARGIN:
            raise ReflectionTooLarge(
                f"||H_{n + 1}||_2 = {h:.12f} >= 1 - {REFLECTION_MARGIN}: measure nearly degenerate"
            )
        SR = inverse(psd_sqrt(GR))
        QL[k:k + p] = inverse(psd_sqrt(GL)) @ VL
        QR[:, k:k + p] = VR @ SR
        K = K @ SR
        Hs.append(H)
    return np.array(Hs).reshape(N, p, p), phi0


def _synthesize(p, phi0, Hs):
    from .recurrence import szego_step

    phiL = [MatPoly.constant(phi0)]
    phiR = [MatPoly.constant(phi0)]
    for H in Hs:
        L, R = szego_step(phiL[-1], phiR[-1], H)
        phiL.append(L)
        phiR.append(R)
    return OPUCSystem(p, phiL, phiR, np.asarray(Hs).reshape(-1, p, p), RECURRENCE)


def _moment_reflections(T, N):
    from .recurrence import szego_step

    check_gram(T, 0)
    phi0 = inverse(psd_sqrt(T[0]))
    L, R = MatPoly.constant(phi0), MatPoly.constant(phi0)
    Hs = []
    for n in range(N):
        H = reflection_from_moments(L, R, T)
        h = spectral_norm(H)
        if h >= 1.0 - REFLECTION_MARGIN:
            # a finitely supported measure shows up as a unitary H
            check_gram(T, n + 1, degrees=[n + 1])
            raise ReflectionTooLarge(
                f"||H_{n + 1}||_2 = {h:.12f} >= 1 - {REFLECTION_MARGIN}: measure nearly degenerate"
            )
        L, R = szego_step(L, R, H)
        Hs.append(H)
    return np.array(Hs).reshape(N, T.p, T.p), phi0


def build_system(source, N, method=None):
    """Recurrence-normalised orthonormal system of degree N.

    phi_0 = mu_0^{-1/2}; each H_{n+1} = -<z phi_n^L, reversed(phi_n^R)>_L
    and the Szego step raises the degree.

    ``method="quadrature"`` (default for a :class:`MatMeasure`) evaluates
    the inner products on the measure's quadrature nodes via
    :func:`arnoldi_reflections`, and repeats the computation at twice the
    resolution to detect under-resolution. ``method="moments"`` (the only
    choice for a :class:`MomentTable`, which needs order 2N + 2) applies
    the formula to monomial coefficients. That is exact for small degrees
    but loses about ||coeffs||^2 * eps, which is ruinous for measures with
    a gap in their support.
    """
    if isinstance(source, MomentTable) or method == "moments":
        T = _table(source, 2 * N + 2)
        Hs, phi0 = _moment_reflections(T, N)
        return _synthesize(T.p, phi0, Hs)
    if not isinstance(source, MatMeasure):
        raise TypeError("expected a MatMeasure or MomentTable")
    q = source.quad_points
    Hs, phi0 = arnoldi_reflections(DiscreteMeasure.from_measure(source, q), N)
    fine, _ = arnoldi_reflections(DiscreteMeasure.from_measure(source, 2 * q), N)
    drift = float(np.max(spectral_norm(Hs - fine))) if N else 0.0
    if drift > 1e-9:
        raise QuadratureUnderResolved(
            f"reflection coefficients change by {drift:.3e} when doubling {q} quadrature points"
        )
    return _synthesize(source.p, phi0, Hs)


def gram_schmidt_system(source, N):
    """HPD-normalised system; reflection coefficients are read off the
    leading and constant coefficients."""
    T = _table(source, 2 * N + 2)
    phiL = gram_schmidt_left(T, N)
    phiR = gram_schmidt_right(T, N)
    Hs = [reflection_from_coeffs(phiL[n], phiR[n]) for n in range(1, N + 1)]
    return OPUCSystem(T.p, phiL, phiR, np.array(Hs).reshape(N, T.p, T.p), HPD)


def leading_ladder_check(sys):
    """max_n of the residuals of
    (I - H_n^* H_n)^{1/2} = K_{n,n}^{-1} K_{n-1,n-1} and
    (I - H_n H_n^*)^{1/2} = (L_{n,n}^*)^{-1} L_{n-1,n-1}^*."""
    p = sys.p
    worst = 0.0
    for n in range(1, sys.N + 1):
        H = sys.reflection(n)
        K1, K0 = sys.phiR[n].leading, sys.phiR[n - 1].leading
        L1, L0 = sys.phiL[n].leading, sys.phiL[n - 1].leading
        r = spectral_norm(psd_sqrt(identity(p) - herm_transpose(H) @ H) - inverse(K1) @ K0)
        l = spectral_norm(
            psd_sqrt(identity(p) - H @ herm_transpose(H))
            - inverse(herm_transpose(L1)) @ herm_transpose(L0)
        )
        worst = max(worst, float(r), float(l))
    return worst
