import json

import numpy as np
import pytest
from conftest import arc_measure, conjugated_pair, diag_measure, fejer_measure, pinned, random_trig_measure

from oracles import arc_reflections, fejer_reflections, lebesgue_atom_reflections

from mopuc.errors import DegenerateMeasure, IncompatiblePair, QuadratureUnderResolved, ReflectionTooLarge
from mopuc.matkernel import herm_transpose, identity, singular_values, spectral_norm
from mopuc.measure import IdentityLebesgue, MatMeasure, Weight, compute_moments
from mopuc.mpoly import MatPoly
from mopuc.opuc import (
    HPD,
    RECURRENCE,
    DiscreteMeasure,
    OPUCSystem,
    build_system,
    gram_schmidt_left,
    gram_schmidt_right,
    gram_schmidt_system,
    leading_ladder_check,
    orthonormality_residual,
    reflection_from_coeffs,
    reflection_from_moments,
)


def single_atom(p=1):
    return MatMeasure(p, None, ((0.7, identity(p)),))


# --- Gram-Schmidt ------------------------------------------------------------

def test_gram_schmidt_lebesgue_is_monomials():
    T = compute_moments(MatMeasure.lebesgue(2), 12)
    for side, gs in (("left", gram_schmidt_left), ("right", gram_schmidt_right)):
        for n, P in enumerate(gs(T, 5)):
            assert np.allclose(P.coeffs.astype(complex), MatPoly.monomial(n, 2).coeffs.astype(complex))


def test_gram_schmidt_fejer_first_polynomial():
    T = compute_moments(fejer_measure(), 4)
    for gs in (gram_schmidt_left, gram_schmidt_right):
        phi1 = gs(T, 1)[1]
        monic = phi1.coeffs[:, 0, 0] / phi1.coeffs[1, 0, 0]
        assert complex(monic[0]) == pytest.approx(-0.5, abs=1e-14)


@pytest.mark.parametrize("gs", [gram_schmidt_left, gram_schmidt_right])
def test_gram_schmidt_single_atom_degenerate(gs):
    T = compute_moments(single_atom(), 4)
    with pytest.raises(DegenerateMeasure) as err:
        gs(T, 2)
    assert err.value.degree == 1


def test_gram_schmidt_leading_coefficients_hpd_and_orthonormal():
    T = compute_moments(random_trig_measure(3, 3, 4), 20)
    L, R = gram_schmidt_left(T, 8), gram_schmidt_right(T, 8)
    for P in L + R:
        lead = P.leading
        assert np.allclose(lead, herm_transpose(lead))
        assert np.linalg.eigvalsh(lead)[0] > 0
    assert orthonormality_residual(L, T, "left") < 1e-9
    assert orthonormality_residual(R, T, "right") < 1e-9


# --- reflection coefficients -------------------------------------------------

def test_reflection_from_coeffs_examples():
    T = compute_moments(MatMeasure.lebesgue(2), 10)
    L, R = gram_schmidt_left(T, 4), gram_schmidt_right(T, 4)
    for n in range(1, 5):
        assert np.allclose(reflection_from_coeffs(L[n], R[n]), 0)
    T = compute_moments(fejer_measure(), 4)
    H1 = reflection_from_coeffs(gram_schmidt_left(T, 1)[1], gram_schmidt_right(T, 1)[1])
    assert abs(H1[0, 0]) == pytest.approx(0.5, abs=1e-12)


def test_reflection_from_coeffs_diagonal_weight():
    N = 6
    sysd = gram_schmidt_system(diag_measure(), N)
    parts = diag_measure().weight.parts
    scalar = [gram_schmidt_system(MatMeasure(1, w), N).H[:, 0, 0] for w in parts]
    assert np.max(np.abs(sysd.H[:, 0, 1])) < 1e-12 and np.max(np.abs(sysd.H[:, 1, 0])) < 1e-12
    assert np.allclose(np.abs(sysd.H[:, 0, 0]), np.abs(scalar[0]), atol=1e-10)
    assert np.allclose(np.abs(sysd.H[:, 1, 1]), np.abs(scalar[1]), atol=1e-10)


def test_reflection_from_coeffs_rejects_mixed_pair():
    a = build_system(random_trig_measure(1), 3)
    b = build_system(random_trig_measure(2), 3)
    with pytest.raises(IncompatiblePair):
        reflection_from_coeffs(a.phiL[3], b.phiR[3])


def test_reflection_from_moments_examples():
    T = compute_moments(MatMeasure.lebesgue(2), 4)
    one = MatPoly.constant(identity(2))
    assert np.allclose(reflection_from_moments(one, one, T), 0)
    T = compute_moments(fejer_measure(), 4)
    phi0 = MatPoly.constant([[1.0]])
    assert abs(reflection_from_moments(phi0, phi0, T)[0, 0]) == pytest.approx(0.5, abs=1e-15)


def test_reflection_forms_agree_in_singular_values():
    meas = random_trig_measure(3, 3, 4)
    N = 8
    rec = build_system(meas, N)
    hpd = gram_schmidt_system(meas, N)
    assert np.max(np.abs(singular_values(rec.H) - singular_values(hpd.H))) < 1e-9


def test_reflection_forms_agree_as_matrices_in_recurrence_normalisation():
    sys = build_system(random_trig_measure(3, 3, 4), 8)
    for n in range(1, sys.N + 1):
        H = reflection_from_coeffs(sys.phiL[n], sys.phiR[n])
        assert spectral_norm(H - sys.reflection(n)) < 1e-9


# --- build_system ------------------------------------------------------------

@pytest.mark.parametrize("method", [None, "moments"])
def test_build_system_lebesgue(method):
    sys = build_system(MatMeasure.lebesgue(2), 5, method=method)
    assert sys.normalization == RECURRENCE
    assert np.max(sys.hn_norms()) < 1e-14
    for n, P in enumerate(sys.phiL):
        assert np.allclose(P.coeffs.astype(complex), MatPoly.monomial(n, 2).coeffs.astype(complex), atol=1e-14)


def test_build_system_fejer_matches_exact_oracle():
    sys = build_system(fejer_measure(), 20)
    exact = np.array(fejer_reflections(20))
    assert np.max(np.abs(sys.H[:, 0, 0] - exact)) < 1e-12
    h = sys.hn_norms()
    assert h[0] == pytest.approx(0.5, abs=1e-9)
    assert np.all(np.diff(h) < 0)
    assert np.allclose(h, 1.0 / np.arange(2, 22), atol=1e-12)


def test_build_system_fejer_regression():
    h = build_system(fejer_measure(), 20).hn_norms()
    assert np.max(np.abs(h - pinned()["fejer_abs_H"])) < 1e-9


def test_build_system_arc_matches_high_precision_oracle():
    h = build_system(arc_measure(), 20).hn_norms()
    assert np.max(np.abs(h - arc_reflections(20))) < 1e-9
    assert np.max(np.abs(h - pinned()["arc_abs_H"])) < 1e-9
    assert np.min(h[4:20]) > 0.1


def test_build_system_lebesgue_plus_atom_closed_form():
    meas = MatMeasure(2, IdentityLebesgue(2), ((1.0, 0.5 * identity(2)),))
    sys = build_system(meas, 12)
    ref = lebesgue_atom_reflections(12, 0.5, 1.0)
    assert np.max(np.abs(sys.H[:, 0, 0] - ref)) < 1e-12
    assert np.max(np.abs(sys.H[:, 1, 1] - ref)) < 1e-12


def test_quadrature_and_moment_paths_agree():
    meas = random_trig_measure(3, 3, 4)
    a = build_system(meas, 10)
    b = build_system(meas, 10, method="moments")
    assert np.max(np.abs(a.H - b.H)) < 1e-12


def test_moment_path_loses_gapped_measures_but_quadrature_does_not():
    exact = np.array(arc_reflections(20))
    good = build_system(arc_measure(), 20).hn_norms()
    bad = build_system(arc_measure(), 20, method="moments").hn_norms()
    assert np.max(np.abs(good - exact)) < 1e-12
    assert np.max(np.abs(bad - exact)) > 1e-6


@pytest.mark.parametrize("method", [None, "moments"])
def test_build_system_degenerate(method):
    with pytest.raises(DegenerateMeasure) as err:
        build_system(single_atom(2), 3, method=method)
    assert err.value.degree == 1
    two = MatMeasure(1, None, ((0.0, [[1.0]]), (2.0, [[1.0]])))
    with pytest.raises(DegenerateMeasure) as err:
        build_system(two, 4, method=method)
    assert err.value.degree == 2


@pytest.mark.parametrize("method", [None, "moments"])
def test_build_system_reflection_too_large(method):
    # |H_1| = m / (1 + m) for Lebesgue plus an atom of mass m
    meas = MatMeasure(1, IdentityLebesgue(1), ((0.0, [[1e9]]),))
    with pytest.raises(ReflectionTooLarge):
        build_system(meas, 2, method=method)


def test_build_system_detects_under_resolution():
    class Peaked(Weight):
        # Fourier coefficients decay only like 0.87^k
        p = 1

        def __call__(self, theta):
            theta = np.asarray(theta, dtype=float)
            return (1.0 / (1.01 - np.cos(theta)))[..., None, None].astype(complex)

    with pytest.raises(QuadratureUnderResolved):
        build_system(MatMeasure(1, Peaked(), quad_points=64), 3)
    build_system(MatMeasure(1, Peaked(), quad_points=1024), 3)


def test_system_orthonormality(systems):
    meas = {
        "trigpoly_p2_N10": random_trig_measure(),
        "diagonal_N12": diag_measure(),
        "conjugated_N12": conjugated_pair()[1],
        "fejer_N20": fejer_measure(),
        "arc_N20": arc_measure(),
    }
    for name, m in meas.items():
        sys = systems[name]
        dm = DiscreteMeasure.from_measure(m)
        assert dm.orthonormality_residual(sys.phiL, "left") <= 1e-9, name
        assert dm.orthonormality_residual(sys.phiR, "right") <= 1e-9, name
        if name != "arc_N20":
            T = compute_moments(m, 2 * sys.N + 2)
            assert orthonormality_residual(sys.phiL, T, "left") <= 1e-9, name
            assert orthonormality_residual(sys.phiR, T, "right") <= 1e-9, name


def test_system_invariants(systems):
    for name, sys in systems.items():
        assert np.all(sys.hn_norms() < 1), name
        L0, R0 = sys.phiL[0].leading, sys.phiR[0].leading
        assert spectral_norm(herm_transpose(L0) @ L0 - R0 @ herm_transpose(R0)) < 1e-12, name
        for n in range(sys.N + 1):
            assert sys.phiL[n].deg == n and sys.phiR[n].deg == n
            assert abs(np.linalg.det(sys.phiL[n].leading)) > 0


def test_leading_ladder_examples(systems):
    assert leading_ladder_check(systems["lebesgue_p2_N30"]) == 0.0
    sys = systems["fejer_N20"]
    kappa = np.array([float(P.leading[0, 0].real) for P in sys.phiL])
    assert np.allclose(kappa[:-1] ** 2 / kappa[1:] ** 2, 1 - sys.hn_norms() ** 2, atol=1e-12)
    assert leading_ladder_check(systems["trigpoly_p2_N10"]) < 1e-9


def test_unitary_freedom_invariance():
    meas = random_trig_measure(3, 3, 4)
    rec = build_system(meas, 8)
    hpd = gram_schmidt_system(meas, 8)
    assert hpd.normalization == HPD
    z = np.exp(2j * np.pi * np.arange(64) / 64)
    for n in range(9):
        a, b = rec.phiL[n](z), hpd.phiL[n](z)
        diff = herm_transpose(a) @ a - herm_transpose(b) @ b
        assert np.max(spectral_norm(diff)) < 1e-9


def test_system_json_round_trip(systems):
    sys = systems["favard_seed0_p2_N6"]
    again = OPUCSystem.from_json(json.loads(json.dumps(sys.to_json())))
    assert again.N == sys.N and again.normalization == sys.normalization
    assert np.allclose(again.H, sys.H)
    assert np.allclose(again.phiL[3].coeffs.astype(complex), sys.phiL[3].coeffs.astype(complex))
