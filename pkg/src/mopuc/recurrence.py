"""Synthesis from prescribed reflection coefficients.

Given H_1, ..., H_N with ||H_n||_2 < 1 the coupled recurrences

    (I - H H^*)^{1/2} phi_n^L = z phi_{n-1}^L + H reversed(phi_{n-1}^R)
    phi_n^R (I - H^* H)^{1/2} = z phi_{n-1}^R + reversed(phi_{n-1}^L) H

produce orthonormal polynomials for some positive matrix measure; the
Bernstein-Szego weight ([phi_N^L]^* phi_N^L)^{-1} is one such measure for the
first N + 1 polynomials.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, QuadratureUnderResolved, ReflectionTooLarge
from .matkernel import as_cmat, herm_transpose, identity, inverse, psd_sqrt, singular_values, spectral_norm
from .measure import DEFAULT_QUAD_POINTS, BernsteinSzego, MatMeasure
from .mpoly import MatPoly, matrices_from_json, matrix_to_json
from .opuc import RECURRENCE, REFLECTION_MARGIN, OPUCSystem, build_system

MAX_ROUNDTRIP_POINTS = 65536


def _check_norm(H, n=None):
    h = spectral_norm(H)
    if h > 1.0 - REFLECTION_MARGIN:
        label = "H" if n is None else f"H_{n}"
        raise ReflectionTooLarge(f"||{label}||_2 = {h:.12f} exceeds 1 - {REFLECTION_MARGIN}")


@dataclass(frozen=True, eq=False)
class ReflectionSequence:
    p: int
    H: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex).reshape(-1, self.p, self.p)
        for n, h in enumerate(H, start=1):
            _check_norm(h, n)
        object.__setattr__(self, "H", H)

    @property
    def N(self):
        return len(self.H)

    @classmethod
    def random(cls, rng, p, N, max_norm=0.9):
        """Gaussian matrices rescaled to spectral norms uniform in [0, max_norm]."""
        X = rng.normal(size=(N, p, p)) + 1j * rng.normal(size=(N, p, p))
        target = rng.uniform(0.0, max_norm, size=N)
        H = X * (target / spectral_norm(X))[:, None, None]
        return cls(p, H)

    def to_json(self):
        return {"p": self.p, "H": [matrix_to_json(h) for h in self.H]}

    @classmethod
    def from_json(cls, d):
        p = int(d["p"])
        H = matrices_from_json(d["H"]) if d["H"] else np.zeros((0, p, p), complex)
        if H.shape[1:] != (p, p):
            raise DimensionMismatch("H entries do not match p")
        return cls(p, H)


def szego_step(phiL, phiR, H):
    """Raise a degree-(n-1) left/right pair to degree n."""
    H = as_cmat(H)
    _check_norm(H)
    p = phiL.p
    n = phiL.deg + 1
    left_scale = inverse(psd_sqrt(identity(p) - H @ herm_transpose(H)))
    right_scale = inverse(psd_sqrt(identity(p) - herm_transpose(H) @ H))
    revL = phiL.reverse(n - 1)
    revR = phiR.reverse(n - 1)
    newL = (phiL.mul_z() + revR.left_mul(H)).left_mul(left_scale)
    newR = (phiR.mul_z() + revL.right_mul(H)).right_mul(right_scale)
    return newL, newR


def favard_synthesize(seq, phi0=None):
    """Recurrence-normalised system with the prescribed reflection coefficients.

    ``phi0`` is the common initial value of both families (default I, i.e.
    mu_0 = I). It must be normal so that [phi0]^* phi0 = phi0 [phi0]^*.
    """
    p = seq.p
    phi0 = identity(p) if phi0 is None else as_cmat(phi0)
    g1, g2 = herm_transpose(phi0) @ phi0, phi0 @ herm_transpose(phi0)
    if spectral_norm(g1 - g2) > 1e-12 * (1.0 + spectral_norm(g1)):
        raise ValueError("phi0 must satisfy phi0^* phi0 = phi0 phi0^*")
    inverse(phi0)
    phiL = [MatPoly.constant(phi0)]
    phiR = [MatPoly.constant(phi0)]
    for H in seq.H:
        L, R = szego_step(phiL[-1], phiR[-1], H)
        phiL.append(L)
        phiR.append(R)
    return OPUCSystem(p, phiL, phiR, seq.H.copy(), RECURRENCE)


def bernstein_szego_measure(sys, n=None, side="left", quad_points=DEFAULT_QUAD_POINTS):
    """Absolutely continuous measure ([phi_n^L]^* phi_n^L)^{-1} d theta / 2 pi.

    With ``side="right"`` the equivalent form (phi_n^R [phi_n^R]^*)^{-1} is used.
    """
    n = sys.N if n is None else n
    if not 0 <= n <= sys.N:
        raise ValueError(f"n must lie in [0, {sys.N}]")
    poly = sys.phiL[n] if side == "left" else sys.phiR[n]
    return MatMeasure(sys.p, BernsteinSzego(poly, side), (), quad_points)


def recovered_reflections(seq, N=None, max_quad_points=MAX_ROUNDTRIP_POINTS):
    """H_1..H_N rebuilt from the order-N Bernstein-Szego measure of ``seq``.

    Coefficients close to norm 1 put zeros of phi_N near the circle, and the
    weight then needs more than the default resolution; it is doubled until
    the quadrature check passes or ``max_quad_points`` is exceeded.
    """
    N = seq.N if N is None else N
    if N == 0:
        return np.zeros((0, seq.p, seq.p), complex)
    sys = favard_synthesize(seq)
    q = DEFAULT_QUAD_POINTS
    while True:
        try:
            return build_system(bernstein_szego_measure(sys, N, quad_points=q), N).H
        except QuadratureUnderResolved:
            if 2 * q > max_quad_points:
                raise
            q *= 2


def roundtrip(seq, N=None):
    """Synthesize, build the order-N Bernstein-Szego measure, rebuild the
    system from it and return the largest singular-value discrepancy
    between recovered and prescribed H_1..H_N."""
    N = seq.N if N is None else N
    if N == 0:
        return 0.0
    rebuilt = recovered_reflections(seq, N)
    return float(np.max(np.abs(singular_values(seq.H[:N]) - singular_values(rebuilt))))
