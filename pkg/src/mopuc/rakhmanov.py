"""Decay diagnostics for reflection coefficients.

The central quantity is the circle average

    I(n, l) = (1/2 pi) int || phi_n (phi_{n+l})^{-1} (phi_{n+l}^*)^{-1} phi_n^* - I ||_2 d theta

with phi = phi^L. It bounds ||H_{n+1}||_2 from above for every l >= 1, tends
to zero (for some l) exactly when H_n -> 0, and its sup over l tends to zero
when det W > 0 almost everywhere. Only l <= Lmax is computed, so reported
inf/sup values are truncated proxies.
"""
import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EmptyGrid
from .kernels import circle_identity_residual, circle_points, ratio_factor, ratio_unitarity, verify_cd
from .matkernel import herm_norm, herm_transpose, identity, inverse, spectral_norm
from .measure import circle_grid
from .opuc import DiscreteMeasure, build_system, leading_ladder_check

MIN_NEVAI_POINTS = 512
DEFAULT_RESOLUTION = 2048
DEFAULT_LMAX = 8
BOUND_SLACK = 1e-9
RATIO_SLACK = 1e-10
NON_DECAY_FLOOR = 0.05
CSV_COLUMNS = ("n", "hn_norm", "nevai_inf", "nevai_sup", "ratio_dev", "ortho_residual")

# verify_system thresholds
CD_TOL = 1e-9
CIRCLE_TOL = 1e-10
UNITARY_TOL = 1e-10
LADDER_TOL = 1e-9


def _nevai_grid(resolution):
    if resolution < MIN_NEVAI_POINTS:
        raise EmptyGrid(f"Nevai integrals need at least {MIN_NEVAI_POINTS} points, got {resolution}")
    return circle_grid(resolution)[1]


class _CircleValues:
    """phi_n^L on a uniform grid, evaluated once per degree and cached."""

    def __init__(self, sys, resolution):
        self.sys = sys
        self.z = _nevai_grid(resolution)
        self._vals = {}
        self._invs = {}

    def value(self, n):
        if n not in self._vals:
            self._vals[n] = self.sys.phiL[n](self.z)
        return self._vals[n]

    def inv(self, n):
        if n not in self._invs:
            self._invs[n] = inverse(self.value(n))
        return self._invs[n]

    def nevai(self, n, ell):
        M = self.value(n) @ self.inv(n + ell)
        A = M @ herm_transpose(M) - identity(self.sys.p)
        return float(np.mean(herm_norm(A)))


def nevai_integral(sys, n, ell, resolution=DEFAULT_RESOLUTION):
    """I(n, l) by the trapezoid rule on ``resolution`` uniform points."""
    if ell < 1 or n < 0 or n + ell > sys.N:
        raise ValueError(f"need l >= 1 and 0 <= n, n + l <= {sys.N}")
    return _CircleValues(sys, resolution).nevai(n, ell)


def hn_bound_check(sys, n, Lmax, resolution=DEFAULT_RESOLUTION):
    """True iff ||H_{n+1}||_2 <= I(n, l) + 1e-9 for l = 1..Lmax."""
    if n + Lmax > sys.N or n + 1 > sys.N:
        raise ValueError(f"need n + Lmax <= {sys.N}")
    cv = _CircleValues(sys, resolution)
    h = float(spectral_norm(sys.reflection(n + 1)))
    return all(h <= cv.nevai(n, ell) + BOUND_SLACK for ell in range(1, Lmax + 1))


def ratio_deviation(sys, n, grid=None):
    """max over the grid of ||(I - H_n H_n^*)^{1/2} phi_n^L (phi_{n-1}^L)^{-1} - z I||_2.

    Bounded by ||H_n||_2 because the recurrence turns the left side into
    H_n rev(phi_{n-1}^R) (phi_{n-1}^L)^{-1}, whose second factor is unitary.
    """
    if not 1 <= n <= sys.N:
        raise ValueError(f"n must lie in [1, {sys.N}]")
    z = circle_points(grid)
    S = ratio_factor(sys, n)
    D = S @ sys.phiL[n](z) @ inverse(sys.phiL[n - 1](z)) - z[:, None, None] * identity(sys.p)
    return float(np.max(spectral_norm(D)))


def _fmt(x):
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.17g}"


def _jnum(x):
    return None if isinstance(x, float) and math.isnan(x) else x


@dataclass
class DecayReport:
    """Per-degree rows n = 1..N.

    ``nevai_by_ell[i][l-1]`` is I(n, l) for the row's n; ``hn_norm`` of the
    next row is bounded by each of them.
    """

    n: list
    hn_norm: list
    nevai_by_ell: list
    ratio_dev: list
    ortho_residual: list
    spec_hash: str
    N: int
    Lmax: int
    resolution: int
    verdict: str = "inconclusive"
    metadata: dict = field(default_factory=dict)

    @property
    def nevai_inf(self):
        return [min(r) if r else float("nan") for r in self.nevai_by_ell]

    @property
    def nevai_sup(self):
        return [max(r) if r else float("nan") for r in self.nevai_by_ell]

    def row(self, n):
        return self.n.index(n)

    def bound_violations(self):
        """(n, l, excess) triples where ||H_{n+1}|| > I(n, l) + 1e-9."""
        out = []
        for i in range(len(self.n) - 1):
            h = self.hn_norm[i + 1]
            for ell, v in enumerate(self.nevai_by_ell[i], start=1):
                if h > v + BOUND_SLACK:
                    out.append((self.n[i], ell, h - v))
        return out

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        inf, sup = self.nevai_inf, self.nevai_sup
        for i, n in enumerate(self.n):
            w.writerow([n] + [_fmt(v) for v in (
                self.hn_norm[i], inf[i], sup[i], self.ratio_dev[i], self.ortho_residual[i]
            )])
        return buf.getvalue()

    def to_json(self):
        inf, sup = self.nevai_inf, self.nevai_sup
        rows = [
            {
                "n": n,
                "hn_norm": self.hn_norm[i],
                "nevai_by_ell": self.nevai_by_ell[i],
                "nevai_inf": _jnum(inf[i]),
                "nevai_sup": _jnum(sup[i]),
                "ratio_dev": self.ratio_dev[i],
                "ortho_residual": self.ortho_residual[i],
            }
            for i, n in enumerate(self.n)
        ]
        meta = {
            "spec_hash": self.spec_hash,
            "N": self.N,
            "Lmax": self.Lmax,
            "resolution": self.resolution,
            "ell_range": f"1..{self.Lmax} (truncated inf/sup)",
            "verdict": self.verdict,
        }
        meta.update(self.metadata)
        return {"metadata": meta, "rows": rows}

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def decay_verdict(hn, nevai_sup):
    """Descriptive label for a decay table; a heuristic, not a proof.

    "decaying": the last quartile of both series stays below half of the
    first quartile's median (or the series is already at rounding level).
    "non-decaying": ||H_n|| stays above 0.05 over the last quartile.
    """
    hn = np.asarray(hn, dtype=float)
    if hn.size < 4:
        return "inconclusive"
    q = max(1, hn.size // 4)
    head, tail = hn[:q], hn[-q:]
    if np.max(hn) < 1e-10:
        return "decaying"
    sup = np.asarray(nevai_sup, dtype=float)
    sup_ok = True
    finite = sup[np.isfinite(sup)]
    if finite.size >= 4:
        qs = max(1, finite.size // 4)
        sup_ok = np.max(finite[-qs:]) < 0.5 * np.median(finite[:qs])
    if np.max(tail) < 0.5 * np.median(head) and sup_ok:
        return "decaying"
    if np.min(tail) >= NON_DECAY_FLOOR:
        return "non-decaying"
    return "inconclusive"


def _threads():
    raw = os.environ.get("MOPUC_THREADS", "1").strip() or "1"
    try:
        k = int(raw)
    except ValueError as exc:
        raise ConfigError(f"MOPUC_THREADS must be an integer, got {raw!r}") from exc
    if k < 0:
        raise ConfigError("MOPUC_THREADS must be >= 0")
    return (os.cpu_count() or 1) if k == 0 else k


def scan(measure, N, Lmax=DEFAULT_LMAX, resolution=DEFAULT_RESOLUTION, system=None):
    """Decay table of ``measure`` for n = 1..N.

    The system is built to degree N + Lmax so that every row has all Lmax
    integrals. Rows are independent and may be computed on MOPUC_THREADS
    threads; results do not depend on the thread count.
    """
    if N < 1 or Lmax < 1:
        raise ConfigError("scan needs N >= 1 and Lmax >= 1")
    _nevai_grid(resolution)
    sys = build_system(measure, N + Lmax) if system is None else system
    if sys.N < N + Lmax:
        raise ConfigError(f"system must have degree >= N + Lmax = {N + Lmax}")
    cv = _CircleValues(sys, resolution)
    for k in range(N + Lmax + 1):
        cv.inv(k)
    dm = DiscreteMeasure.from_measure(measure)
    Xl = [sys.phiL[k](dm.z) @ dm.B for k in range(N + 1)]
    Bh = herm_transpose(dm.B)
    Xr = [Bh @ sys.phiR[k](dm.z) for k in range(N + 1)]
    I = identity(sys.p)

    def row(n):
        nev = [cv.nevai(n, ell) for ell in range(1, Lmax + 1)]
        rd = ratio_deviation(sys, n, circle_points(resolution))
        worst = 0.0
        for m in range(n + 1):
            d = I if m == n else 0.0
            gl = np.einsum("iab,icb->ac", Xl[n], np.conj(Xl[m])) - d
            gr = np.einsum("iba,ibc->ac", np.conj(Xr[n]), Xr[m]) - d
            worst = max(worst, float(spectral_norm(gl)), float(spectral_norm(gr)))
        return nev, rd, worst

    ns = list(range(1, N + 1))
    k = _threads()
    if k > 1:
        with ThreadPoolExecutor(max_workers=k) as pool:
            rows = list(pool.map(row, ns))
    else:
        rows = [row(n) for n in ns]
    hn = [float(x) for x in spectral_norm(sys.H[:N])]
    report = DecayReport(
        n=ns,
        hn_norm=hn,
        nevai_by_ell=[r[0] for r in rows],
        ratio_dev=[r[1] for r in rows],
        ortho_residual=[r[2] for r in rows],
        spec_hash=measure.spec_hash(),
        N=N,
        Lmax=Lmax,
        resolution=resolution,
    )
    report.verdict = decay_verdict(hn, report.nevai_sup)
    return report


def verify_system(sys, Lmax=DEFAULT_LMAX, resolution=DEFAULT_RESOLUTION):
    """All pointwise identities and bounds of a recurrence-normalised system.

    Returns a dict of maxima over n plus ``breaches``, the names of checks
    that exceeded their tolerance.
    """
    grid = circle_points(resolution)
    cv = _CircleValues(sys, resolution)
    res = {
        "N": sys.N,
        "cd": max(verify_cd(sys, n) for n in range(sys.N + 1)),
        "circle_identity": max(circle_identity_residual(sys, n, grid) for n in range(sys.N + 1)),
        "ratio_unitarity": max(ratio_unitarity(sys, n, grid) for n in range(sys.N + 1)),
        "leading_ladder": leading_ladder_check(sys),
    }
    bound_excess = 0.0
    ratio_excess = 0.0
    for n in range(sys.N):
        h = float(spectral_norm(sys.H[n]))
        for ell in range(1, min(Lmax, sys.N - n) + 1):
            bound_excess = max(bound_excess, h - cv.nevai(n, ell))
    for n in range(1, sys.N + 1):
        h = float(spectral_norm(sys.H[n - 1]))
        ratio_excess = max(ratio_excess, ratio_deviation(sys, n, grid) - h)
    res["hn_bound_excess"] = bound_excess
    res["ratio_dev_excess"] = ratio_excess
    limits = {
        "cd": CD_TOL,
        "circle_identity": CIRCLE_TOL,
        "ratio_unitarity": UNITARY_TOL,
        "leading_ladder": LADDER_TOL,
        "hn_bound_excess": BOUND_SLACK,
        "ratio_dev_excess": RATIO_SLACK,
    }
    res["breaches"] = [k for k, tol in limits.items() if not res[k] <= tol]
    return res
