"""Matrix polynomials with p x p complex coefficients."""
from dataclasses import dataclass

import numpy as np

from .errors import DegreeExceedsFormal, DimensionMismatch
from .matkernel import as_cmat, herm_transpose, identity


@dataclass(frozen=True, eq=False)
class MatPoly:
    """P(z) = sum_k coeffs[k] z^k, with ``coeffs`` of shape (deg + 1, p, p).

    ``deg`` is the formal degree; trailing coefficients may be zero.

    Coefficients are stored in extended precision (``np.clongdouble``, which
    is plain double on platforms without a wider type). Orthonormal
    polynomials of gapped measures have coefficients many orders of
    magnitude above their values on the support, so double coefficients
    would already lose those digits. Accessors for single matrices return
    complex128.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim == 2:
            c = c[None]
        as_cmat(c.astype(np.complex128))
        c = c.astype(np.clongdouble)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def constant(cls, A):
        return cls(as_cmat(A)[None])

    @classmethod
    def monomial(cls, n, p, A=None):
        c = np.zeros((n + 1, p, p), dtype=np.clongdouble)
        c[n] = identity(p) if A is None else as_cmat(A)
        return cls(c)

    @classmethod
    def zero(cls, p, deg=0):
        return cls(np.zeros((deg + 1, p, p), dtype=np.clongdouble))

    @property
    def deg(self):
        return self.coeffs.shape[0] - 1

    @property
    def p(self):
        return self.coeffs.shape[-1]

    @property
    def leading(self):
        return self.coeffs[-1].astype(np.complex128)

    @property
    def constant_term(self):
        return self.coeffs[0].astype(np.complex128)

    def coefficient(self, k):
        return self.coeffs[k].astype(np.complex128)

    def support_degree(self):
        """Index of the last nonzero coefficient (0 for the zero polynomial)."""
        nz = np.flatnonzero(np.any(self.coeffs != 0, axis=(1, 2)))
        return int(nz[-1]) if nz.size else 0

    def __call__(self, z):
        """Horner evaluation in extended precision; ``z`` may be a scalar or
        an array of points. Returns complex128 values."""
        z = np.asarray(z, dtype=np.complex128)
        c = self.coeffs
        acc = np.broadcast_to(c[-1], z.shape + (self.p, self.p)).copy()
        zz = z.astype(np.clongdouble)[..., None, None]
        for ck in c[-2::-1]:
            acc = acc * zz + ck
        return acc.astype(np.complex128)

    def padded(self, n):
        if n < self.deg:
            if self.support_degree() > n:
                raise DegreeExceedsFormal(f"degree {self.support_degree()} exceeds {n}")
            return MatPoly(self.coeffs[: n + 1])
        extra = np.zeros((n - self.deg, self.p, self.p), dtype=np.clongdouble)
        return MatPoly(np.concatenate([self.coeffs, extra]))

    def reverse(self, n=None):
        """Reversed polynomial z^n P(1/conj(z))^* at formal degree n."""
        n = self.deg if n is None else n
        if self.support_degree() > n:
            raise DegreeExceedsFormal(f"degree {self.support_degree()} exceeds formal degree {n}")
        c = self.padded(n).coeffs
        return MatPoly(herm_transpose(c[::-1]))

    def mul_z(self):
        zero = np.zeros((1, self.p, self.p), dtype=np.clongdouble)
        return MatPoly(np.concatenate([zero, self.coeffs]))

    def _check(self, other):
        if other.p != self.p:
            raise DimensionMismatch(f"dimension mismatch: {self.p} vs {other.p}")

    def __add__(self, other):
        self._check(other)
        n = max(self.deg, other.deg)
        return MatPoly(self.padded(n).coeffs + other.padded(n).coeffs)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, c):
        return MatPoly(np.clongdouble(complex(c)) * self.coeffs)

    def left_mul(self, A):
        A = as_cmat(A)
        if A.shape[-1] != self.p:
            raise DimensionMismatch("dimension mismatch")
        return MatPoly(A @ self.coeffs)

    def right_mul(self, A):
        A = as_cmat(A)
        if A.shape[-1] != self.p:
            raise DimensionMismatch("dimension mismatch")
        return MatPoly(self.coeffs @ A)

    def to_json(self):
        # coeffs[k][i][j] = [re, im] of the (i, j) entry of the z^k coefficient
        return {
            "p": self.p,
            "deg": self.deg,
            "coeffs": [matrix_to_json(ck.astype(np.complex128)) for ck in self.coeffs],
        }

    @classmethod
    def from_json(cls, d):
        c = matrices_from_json(d["coeffs"])
        if c.shape[0] != d["deg"] + 1 or c.shape[-1] != d["p"]:
            raise DimensionMismatch("coeffs do not match declared p/deg")
        return cls(c)


def matrix_to_json(A):
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(A)]


def matrices_from_json(data, ndim=3):
    """Decode nested ``[re, im]`` pairs to a complex array with ``ndim`` axes.

    Plain real entries (one axis fewer) are accepted as a convenience.
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == ndim:
        return arr.astype(np.complex128)
    raise ValueError(f"cannot decode matrix data of shape {arr.shape}")


def matrix_from_json(data):
    return matrices_from_json(data, ndim=2)
