import numpy as np
import pytest

from mopuc.kernels import (
    cd_kernel_left,
    cd_kernel_right,
    circle_identity_residual,
    circle_points,
    default_cd_grid,
    ratio_unitarity,
    verify_cd,
)
from mopuc.errors import EmptyGrid
from mopuc.matkernel import herm_transpose, identity, inverse, spectral_norm
from mopuc.mpoly import MatPoly
from mopuc.recurrence import ReflectionSequence, favard_synthesize


def test_default_cd_grid_shape():
    z, xi = default_cd_grid()
    assert z.shape == xi.shape == (16 * 16 + 16,)
    assert np.allclose(np.abs(z[:256]), 1) and np.allclose(np.abs(xi[:256]), 1)
    assert np.all(np.abs(z[256:]) <= 0.9) and np.all(np.abs(xi[256:]) <= 0.9)


def test_cd_kernel_examples(systems):
    leb = systems["lebesgue_p2_N30"]
    assert np.allclose(cd_kernel_left(leb, 0, 0.3, -0.2j), identity(2))
    z, xi = 0.8 * np.exp(0.4j), 0.5 * np.exp(-2.0j)
    w = np.conj(z) * xi
    geo = sum(w**k for k in range(6))
    assert np.allclose(cd_kernel_left(leb, 5, z, xi), geo * identity(2))
    assert np.allclose(cd_kernel_right(leb, 5, z, xi), geo * identity(2))


def test_cd_kernel_diagonal_is_psd_and_monotone(systems):
    sys = systems["favard_p3_N8"]
    z = circle_points(64)
    prev = np.zeros((64, 3, 3))
    for n in range(sys.N + 1):
        K = cd_kernel_left(sys, n, z, z)
        assert np.allclose(K, herm_transpose(K), atol=1e-12)
        assert np.all(np.linalg.eigvalsh(K - prev)[:, 0] >= -1e-10)
        assert np.all(np.trace(K, axis1=1, axis2=2).real >= 3 - 1e-10)
        prev = K


def test_verify_cd_examples(systems):
    leb = systems["lebesgue_p2_N30"]
    assert verify_cd(leb, 2) < 1e-15
    # both sides of the degree-0 formula coincide by definition
    for sys in systems.values():
        assert verify_cd(sys, 0) < 1e-14
    assert max(verify_cd(systems["favard_seed0_p2_N6"], n) for n in range(7)) < 1e-9


def test_verify_cd_detects_perturbation(systems):
    sys = systems["favard_seed0_p2_N6"]
    bad = list(sys.phiL)
    bad[4] = MatPoly(bad[4].coeffs + 1e-6)
    broken = type(sys)(sys.p, bad, sys.phiR, sys.H, sys.normalization)
    assert verify_cd(broken, 4) > 1e-8


def test_verify_cd_accepts_explicit_grid(systems):
    sys = systems["favard_p3_N8"]
    z = np.array([0.1 + 0.2j, 2.0, np.exp(1j)])
    xi = np.array([-0.4j, 0.5, 1.5])
    # the formula holds for all z, xi, including outside the disk
    assert verify_cd(sys, 5, (z, xi)) < 1e-12
    with pytest.raises(EmptyGrid):
        verify_cd(sys, 1, (np.array([]), np.array([])))


def test_circle_identity_examples(systems):
    leb = systems["lebesgue_p2_N30"]
    assert circle_identity_residual(leb, 7) < 1e-15
    assert circle_identity_residual(systems["fejer_N20"], 10) < 1e-14
    sys = systems["favard_p3_N8"]
    assert max(circle_identity_residual(sys, n) for n in range(sys.N + 1)) < 1e-10


def test_ratio_unitarity_examples(systems):
    assert ratio_unitarity(systems["lebesgue_p2_N30"], 9) < 1e-14
    assert ratio_unitarity(systems["fejer_N20"], 12) < 1e-12
    sys = favard_synthesize(ReflectionSequence.random(np.random.default_rng(11), 2, 6))
    assert max(ratio_unitarity(sys, n, 128) for n in range(7)) < 1e-10


def test_ratio_has_unit_spectral_norm(systems):
    sys = systems["favard_p3_N8"]
    z = circle_points(128)
    R = sys.phiR[6].reverse(6)(z) @ inverse(sys.phiL[6](z))
    assert np.max(np.abs(spectral_norm(R) - 1)) < 1e-10


def test_circle_points_input_forms():
    assert circle_points(8).shape == (8,)
    assert circle_points(np.array([1j])).shape == (1,)
    with pytest.raises(EmptyGrid):
        circle_points(0)
