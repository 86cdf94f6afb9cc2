"""Independent reference computations used by the tests.

Nothing here imports the package under test.
"""
from fractions import Fraction

import mpmath as mp
import numpy as np


def levinson(mu, N, conj=lambda x: x):
    """Scalar Szego recursion on monic polynomials in exact or high precision.

    ``mu(m)`` returns the m-th moment (int e^{-i m theta} d rho). Returns
    Phi_1(0), ..., Phi_N(0), which equal the recurrence-normalised scalar
    reflection coefficients because kappa_n > 0.
    """
    Phi = [mu(0) * 0 + 1]
    out = []
    for n in range(N):
        zc = [0] + Phi
        rev = [conj(c) for c in Phi[::-1]]
        ip = sum(zc[j] * mu(k - j) * conj(rev[k]) for j in range(len(zc)) for k in range(len(rev)))
        nrm = sum(Phi[j] * mu(k - j) * conj(Phi[k]) for j in range(len(Phi)) for k in range(len(Phi)))
        a = -ip / nrm
        out.append(a)
        Phi = [(zc[k] if k < len(zc) else 0) + a * (rev[k] if k < len(rev) else 0) for k in range(n + 2)]
    return out


def fejer_moment(m):
    """Moments of w = 1 + cos(theta) against d theta / 2 pi, as exact fractions."""
    return {0: Fraction(1), 1: Fraction(1, 2), -1: Fraction(1, 2)}.get(m, Fraction(0))


def fejer_reflections(N):
    return [float(a) for a in levinson(fejer_moment, N)]


def arc_reflections(N, dps=60):
    """|Phi_n(0)| for the indicator of [0, pi] (floor 0) in ``dps`` digits."""
    with mp.workdps(dps):
        def mu(m):
            if m == 0:
                return mp.mpf(1) / 2
            return (1 - mp.e ** (-1j * m * mp.pi)) / (2 * mp.pi * 1j * m)

        return [float(abs(a)) for a in levinson(mu, N, mp.conj)]


def lebesgue_atom_reflections(N, mass, theta):
    """Lebesgue measure plus an atom: Phi_n(0) = -mass e^{i n theta} / (1 + n mass).

    Rank-one update of the Lebesgue kernel sum_{k<n} |z|^{2k} = n at the atom.
    """
    n = np.arange(1, N + 1)
    return -mass * np.exp(1j * n * theta) / (1.0 + n * mass)


def naive_eval(coeffs, z):
    """sum_k coeffs[k] z^k by explicit powers."""
    return sum(c * z**k for k, c in enumerate(coeffs))
