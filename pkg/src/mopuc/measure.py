"""Matrix measures on the unit circle, their moments and inner products.

Convention: the absolutely continuous part has density ``W(theta)`` with
respect to ``d theta / 2 pi``; atoms carry raw mass matrices. Moments are

    mu_m = int e^{-i m theta} d rho(theta),

so Lebesgue measure with ``W = I`` has ``mu_0 = I`` and ``<z^j I, z^k I>_L
= mu_{k-j}``.
"""
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyGrid,
    InsufficientMoments,
    NotPSD,
    QuadratureUnderResolved,
)
from .matkernel import as_cmat, herm_eig, herm_transpose, identity, inverse, spectral_norm
from .mpoly import MatPoly, matrices_from_json, matrix_from_json, matrix_to_json

TWO_PI = 2.0 * np.pi
DEFAULT_QUAD_POINTS = 4096
GL_ORDER = 16
PSD_SAMPLE_TOL = 1e-12


def circle_grid(n):
    """Uniform angles 2 pi k / n and the corresponding points on the circle."""
    if n < 1:
        raise EmptyGrid("grid must have at least one point")
    theta = TWO_PI * np.arange(n) / n
    return theta, np.exp(1j * theta)


def integrate_circle(values, theta=None):
    """(1/2 pi) * integral over [0, 2 pi) of sampled values.

    With ``theta=None`` the samples are taken on the uniform grid of
    :func:`circle_grid` and the periodic trapezoid rule reduces to the mean.
    Otherwise ``theta`` must be ascending in [0, 2 pi) and the composite
    trapezoid rule wraps around from the last sample to the first.
    """
    values = np.asarray(values)
    n = values.shape[0] if values.ndim else 0
    if n == 0:
        raise EmptyGrid("cannot integrate over an empty grid")
    if theta is None:
        return np.sum(values, axis=0) / n
    theta = np.asarray(theta, dtype=float)
    if theta.shape[0] != n:
        raise ValueError("theta and values disagree in length")
    h = np.diff(np.append(theta, theta[0] + TWO_PI))
    right = np.roll(values, -1, axis=0)
    hh = h.reshape((n,) + (1,) * (values.ndim - 1))
    return np.sum(hh * (values + right), axis=0) / (2.0 * TWO_PI)


def _min_eig_ok(W, what):
    lam = herm_eig(W).eigenvalues
    scale = 1.0 + np.max(np.abs(lam))
    if np.min(lam[..., 0]) < -PSD_SAMPLE_TOL * scale:
        raise NotPSD(f"{what} is not positive semidefinite (lambda_min = {np.min(lam):.3e})")


class Weight:
    """Hermitian PSD matrix density on the circle.

    Subclasses define ``p``, ``__call__(theta)`` returning shape
    ``theta.shape + (p, p)``, and optionally ``fourier(m)`` for analytic
    moments and ``breakpoints()`` for non-smooth points.
    """

    def fourier(self, m):
        return None

    def breakpoints(self):
        return ()

    def _validate(self):
        theta = TWO_PI * (np.arange(256) + 0.5) / 256
        _min_eig_ok(self(theta), f"{type(self).__name__} weight")


@dataclass(frozen=True, eq=False)
class IdentityLebesgue(Weight):
    p: int = 1

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.broadcast_to(identity(self.p), theta.shape + (self.p, self.p)).copy()

    def fourier(self, m):
        return identity(self.p) if m == 0 else np.zeros((self.p, self.p), complex)

    def to_json(self):
        return {"type": "IdentityLebesgue"}


@dataclass(frozen=True, eq=False)
class TrigPoly(Weight):
    """W(theta) = sum_{|k| <= K} W_k e^{i k theta} with W_{-k} = W_k^*.

    ``coeffs[k]`` holds W_k for k = 0..K; negative indices are implied.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = as_cmat(np.asarray(self.coeffs, dtype=np.complex128).reshape(
            (-1,) + np.shape(self.coeffs)[-2:])).copy()
        w0 = c[0]
        if spectral_norm(w0 - herm_transpose(w0)) > 1e-12 * (1.0 + spectral_norm(w0)):
            raise ValueError("W_0 must be Hermitian")
        c[0] = 0.5 * (w0 + herm_transpose(w0))
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        self._validate()

    @property
    def p(self):
        return self.coeffs.shape[-1]

    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.broadcast_to(self.coeffs[0], theta.shape + (self.p, self.p)).astype(complex)
        for k in range(1, self.order + 1):
            e = np.exp(1j * k * theta)[..., None, None]
            out = out + e * self.coeffs[k] + np.conj(e) * herm_transpose(self.coeffs[k])
        return out

    def fourier(self, m):
        if abs(m) > self.order:
            return np.zeros((self.p, self.p), complex)
        return self.coeffs[m] if m >= 0 else herm_transpose(self.coeffs[-m])

    def to_json(self):
        return {"type": "TrigPoly", "coeffs": [matrix_to_json(c) for c in self.coeffs]}


@dataclass(frozen=True, eq=False)
class DiagonalScalar(Weight):
    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts or any(w.p != 1 for w in parts):
            raise DimensionMismatch("DiagonalScalar needs a non-empty list of scalar weights")
        object.__setattr__(self, "parts", parts)

    @property
    def p(self):
        return len(self.parts)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape + (self.p, self.p), complex)
        for i, w in enumerate(self.parts):
            out[..., i, i] = w(theta)[..., 0, 0]
        return out

    def fourier(self, m):
        vals = [w.fourier(m) for w in self.parts]
        if any(v is None for v in vals):
            return None
        return np.diag([v[0, 0] for v in vals]).astype(complex)

    def breakpoints(self):
        return tuple(sorted({b for w in self.parts for b in w.breakpoints()}))

    def to_json(self):
        return {"type": "DiagonalScalar", "parts": [w.to_json() for w in self.parts]}


@dataclass(frozen=True, eq=False)
class ArcIndicator(Weight):
    """``inside`` on the arc from ``start`` to ``end`` (counter-clockwise),
    ``floor * outside`` elsewhere."""

    start: float
    end: float
    floor: float = 0.0
    inside: np.ndarray = None
    outside: np.ndarray = None
    p: int = 1

    def __post_init__(self):
        inside = identity(self.p) if self.inside is None else as_cmat(self.inside)
        outside = identity(inside.shape[-1]) if self.outside is None else as_cmat(self.outside)
        if inside.shape != outside.shape:
            raise DimensionMismatch("inside/outside matrices differ in shape")
        if self.floor < 0:
            raise ValueError("floor must be >= 0")
        _min_eig_ok(inside, "inside matrix")
        _min_eig_ok(outside, "outside matrix")
        object.__setattr__(self, "inside", inside)
        object.__setattr__(self, "outside", outside)
        object.__setattr__(self, "p", inside.shape[-1])
        if self.length <= 0:
            raise ValueError("arc must have positive length")

    @property
    def length(self):
        d = float(self.end) - float(self.start)
        return d if 0 < d <= TWO_PI else d % TWO_PI

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        rel = np.mod(theta - self.start, TWO_PI)
        inside = (rel < self.length)[..., None, None]
        return np.where(inside, self.inside, self.floor * self.outside).astype(complex)

    def breakpoints(self):
        if self.length >= TWO_PI:
            return ()
        return tuple(sorted({self.start % TWO_PI, self.end % TWO_PI}))

    def to_json(self):
        return {
            "type": "ArcIndicator",
            "start": float(self.start),
            "end": float(self.end),
            "floor": float(self.floor),
            "inside": matrix_to_json(self.inside),
            "outside": matrix_to_json(self.outside),
        }


@dataclass(frozen=True, eq=False)
class Conjugated(Weight):
    """U W(theta) U^* for a constant unitary U."""

    inner: Weight
    U: np.ndarray

    def __post_init__(self):
        U = as_cmat(self.U)
        if U.shape[-1] != self.inner.p:
            raise DimensionMismatch("U does not match the inner weight")
        if spectral_norm(U @ herm_transpose(U) - identity(U.shape[-1])) > 1e-10:
            raise ValueError("U must be unitary")
        object.__setattr__(self, "U", U)

    @property
    def p(self):
        return self.inner.p

    def __call__(self, theta):
        return self.U @ self.inner(theta) @ herm_transpose(self.U)

    def fourier(self, m):
        w = self.inner.fourier(m)
        return None if w is None else self.U @ w @ herm_transpose(self.U)

    def breakpoints(self):
        return self.inner.breakpoints()

    def to_json(self):
        return {"type": "Conjugated", "inner": self.inner.to_json(), "U": matrix_to_json(self.U)}


@dataclass(frozen=True, eq=False)
class BernsteinSzego(Weight):
    """([P(z)]^* P(z))^{-1} (``side="left"``) or (P(z) P(z)^*)^{-1}
    (``side="right"``) for a polynomial P without zeros on the circle."""

    poly: MatPoly
    side: str = "left"

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")

    @property
    def p(self):
        return self.poly.p

    def __call__(self, theta):
        z = np.exp(1j * np.asarray(theta, dtype=float))
        P = self.poly(z)
        G = herm_transpose(P) @ P if self.side == "left" else P @ herm_transpose(P)
        W = inverse(G)
        return 0.5 * (W + herm_transpose(W))

    def to_json(self):
        return {"type": "BernsteinSzego", "side": self.side, "poly": self.poly.to_json()}


def weight_from_json(d, p=None):
    kind = d.get("type")
    if kind == "IdentityLebesgue":
        return IdentityLebesgue(d.get("p", p or 1))
    if kind == "TrigPoly":
        return TrigPoly(matrices_from_json(d["coeffs"]))
    if kind == "DiagonalScalar":
        return DiagonalScalar(tuple(weight_from_json(w, 1) for w in d["parts"]))
    if kind == "ArcIndicator":
        get = lambda key: None if d.get(key) is None else matrix_from_json(d[key])
        return ArcIndicator(
            float(d["start"]), float(d["end"]), float(d.get("floor", 0.0)),
            get("inside"), get("outside"), p=d.get("p", p or 1),
        )
    if kind == "Conjugated":
        return Conjugated(weight_from_json(d["inner"], p), matrix_from_json(d["U"]))
    if kind == "BernsteinSzego":
        return BernsteinSzego(MatPoly.from_json(d["poly"]), d.get("side", "left"))
    raise ValueError(f"unknown weight type {kind!r}")


@dataclass(frozen=True, eq=False)
class MatMeasure:
    """Weight (may be None) plus atoms ``[(theta_j, M_j), ...]``."""

    p: int
    weight: Weight = None
    atoms: tuple = ()
    quad_points: int = DEFAULT_QUAD_POINTS

    def __post_init__(self):
        if self.weight is not None and self.weight.p != self.p:
            raise DimensionMismatch(f"weight has p={self.weight.p}, measure p={self.p}")
        if self.quad_points < 2 or self.quad_points % 2:
            raise ValueError("quad_points must be a positive even integer")
        atoms = []
        for theta, mass in self.atoms:
            mass = as_cmat(mass)
            if mass.shape != (self.p, self.p):
                raise DimensionMismatch("atom mass has the wrong shape")
            _min_eig_ok(mass, "atom mass")
            atoms.append((float(theta) % TWO_PI, 0.5 * (mass + herm_transpose(mass))))
        angles = [a for a, _ in atoms]
        if len(set(angles)) != len(angles):
            raise ValueError("atom angles must be distinct")
        object.__setattr__(self, "atoms", tuple(atoms))

    @classmethod
    def lebesgue(cls, p, **kw):
        return cls(p, IdentityLebesgue(p), **kw)

    def density(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.weight is None:
            return np.zeros(theta.shape + (self.p, self.p), complex)
        return self.weight(theta)

    def breakpoints(self):
        return () if self.weight is None else self.weight.breakpoints()

    def to_json(self):
        return {
            "p": self.p,
            "weight": None if self.weight is None else self.weight.to_json(),
            "atoms": [{"theta": t, "mass": matrix_to_json(m)} for t, m in self.atoms],
            "quadPoints": self.quad_points,
        }

    @classmethod
    def from_json(cls, d):
        p = int(d["p"])
        w = d.get("weight")
        weight = None if w is None else weight_from_json(w, p)
        atoms = tuple((float(a["theta"]), matrix_from_json(a["mass"])) for a in d.get("atoms", []))
        return cls(p, weight, atoms, int(d.get("quadPoints", DEFAULT_QUAD_POINTS)))

    def spec_hash(self):
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def quadrature_rule(breakpoints, quad_points):
    """Nodes and weights for (1/2 pi) * integral over the circle.

    Without breakpoints: the periodic trapezoid rule on ``quad_points`` nodes.
    With breakpoints: each panel between consecutive breakpoints gets
    ``quad_points`` nodes of composite 16-point Gauss-Legendre.
    """
    if not breakpoints:
        theta, _ = circle_grid(quad_points)
        return theta, np.full(quad_points, 1.0 / quad_points)
    x, w = np.polynomial.legendre.leggauss(GL_ORDER)
    nsub = max(1, quad_points // GL_ORDER)
    b = np.sort(np.mod(np.asarray(breakpoints, dtype=float), TWO_PI))
    edges = np.append(b, b[0] + TWO_PI)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sub = np.linspace(lo, hi, nsub + 1)
        half = 0.5 * np.diff(sub)
        mid = 0.5 * (sub[:-1] + sub[1:])
        nodes.append((mid[:, None] + half[:, None] * x).ravel())
        weights.append((half[:, None] * w).ravel())
    return np.mod(np.concatenate(nodes), TWO_PI), np.concatenate(weights) / TWO_PI


@dataclass(frozen=True, eq=False)
class MomentTable:
    """Moments mu_m for -M <= m <= M; ``data[m + M]`` holds mu_m."""

    p: int
    M: int
    data: np.ndarray = field(repr=False)

    def __getitem__(self, m):
        if abs(m) > self.M:
            raise InsufficientMoments(f"moment {m} not in table of order {self.M}")
        return self.data[m + self.M]

    def block_toeplitz(self, n, side="left"):
        """Gram matrix of 1, z, ..., z^n: blocks mu_{k-j} (left) or mu_{j-k} (right)."""
        if n > self.M:
            raise InsufficientMoments(f"need {n} moments, have {self.M}")
        p = self.p
        G = np.empty(((n + 1) * p, (n + 1) * p), complex)
        sgn = 1 if side == "left" else -1
        for j in range(n + 1):
            for k in range(n + 1):
                G[j * p:(j + 1) * p, k * p:(k + 1) * p] = self[sgn * (k - j)]
        return G

    def to_json(self):
        return {
            "p": self.p,
            "M": self.M,
            "moments": [{"m": m, "value": matrix_to_json(self[m])} for m in range(-self.M, self.M + 1)],
        }


def _quadrature_moments(measure, M, quad_points):
    theta, w = quadrature_rule(measure.breakpoints(), quad_points)
    W = measure.density(theta)
    E = np.exp(-1j * np.outer(np.arange(M + 1), theta)) * w
    return np.einsum("mn,nij->mij", E, W)


def compute_moments(measure, M):
    """Moment table of order M.

    Analytic weights (trigonometric polynomials and their diagonal or
    conjugated combinations) return exact Fourier coefficients; other
    weights use panel quadrature at ``measure.quad_points`` and are
    re-checked at twice that resolution.
    """
    p = measure.p
    pos = np.zeros((M + 1, p, p), complex)
    weight = measure.weight
    if weight is not None:
        exact = [weight.fourier(m) for m in range(M + 1)]
        if all(e is not None for e in exact):
            pos += np.array(exact)
        else:
            q = measure.quad_points
            coarse = _quadrature_moments(measure, M, q)
            fine = _quadrature_moments(measure, M, 2 * q)
            mu0 = spectral_norm(coarse[0])
            drift = np.max(spectral_norm(coarse - fine))
            if drift > 1e-9 * (1.0 + mu0):
                raise QuadratureUnderResolved(
                    f"moments change by {drift:.3e} when doubling {q} quadrature points"
                )
            pos += coarse
    for theta, mass in measure.atoms:
        pos += np.exp(-1j * np.arange(M + 1) * theta)[:, None, None] * mass
    pos[0] = 0.5 * (pos[0] + herm_transpose(pos[0]))
    neg = herm_transpose(pos[:0:-1])
    return MomentTable(p, M, np.concatenate([neg, pos]))


def moment(measure, m):
    return compute_moments(measure, abs(m))[m]


def _gram_blocks(T, dp, dq, sign):
    j = np.arange(dp + 1)[:, None]
    k = np.arange(dq + 1)[None, :]
    return T.data[sign * (k - j) + T.M]


def inner_left(P, Q, T):
    """<P, Q>_L = int P(z) d rho Q(z)^* = sum_{j,k} P_j mu_{k-j} Q_k^*."""
    if P.p != T.p or Q.p != T.p:
        raise DimensionMismatch("polynomial and moment table dimensions differ")
    if T.M < P.deg + Q.deg:
        raise InsufficientMoments(f"need {P.deg + Q.deg} moments, have {T.M}")
    mu = _gram_blocks(T, P.deg, Q.deg, 1)
    out = np.einsum("jab,jkbc,kdc->ad", P.coeffs, mu, np.conj(Q.coeffs))
    return out.astype(np.complex128)


def inner_right(P, Q, T):
    """<P, Q>_R = int P(z)^* d rho Q(z) = sum_{j,k} P_j^* mu_{j-k} Q_k."""
    if P.p != T.p or Q.p != T.p:
        raise DimensionMismatch("polynomial and moment table dimensions differ")
    if T.M < P.deg + Q.deg:
        raise InsufficientMoments(f"need {P.deg + Q.deg} moments, have {T.M}")
    mu = _gram_blocks(T, P.deg, Q.deg, -1)
    out = np.einsum("jba,jkbc,kcd->ad", np.conj(P.coeffs), mu, Q.coeffs)
    return out.astype(np.complex128)


def random_trigpoly(rng, p, K, floor=0.1):
    """Random PSD trigonometric weight B(theta) B(theta)^* + floor * I.

    B is a random matrix polynomial of degree K in e^{i theta}, so the
    Fourier coefficients are W_m = sum_j B_{j+m} B_j^* (plus the floor in W_0).
    """
    B = rng.normal(size=(K + 1, p, p)) + 1j * rng.normal(size=(K + 1, p, p))
    B /= np.sqrt(2.0 * p * (K + 1))
    W = np.zeros((K + 1, p, p), complex)
    for m in range(K + 1):
        for j in range(K + 1 - m):
            W[m] += B[j + m] @ herm_transpose(B[j])
    W[0] += floor * identity(p)
    return TrigPoly(W)


def random_unitary(rng, p):
    X = rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p))
    Q, R = np.linalg.qr(X)
    return Q * (np.diag(R) / np.abs(np.diag(R)))
