import numpy as np
import pytest

from ptqgt import (
    AmbiguousMatching,
    DefectiveMatrix,
    FieldPoint,
    HamiltonianFamily,
    NonFinite,
    NotPositiveDefinite,
    XYParams,
    ZeroScale,
    biortho_eig,
    build_W,
    dispersion,
    dk_matrix,
    gauge_fix,
    gauge_transform,
)

ANISO = XYParams(J=1.0, Js=0.5, Gamma=1.0 / 3.0, Gammas=1.0 / 6.0)


def random_matrix(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def test_diagonal_hermitian():
    eig = biortho_eig(np.diag([1.0, 2.0, 3.0]).astype(complex))
    assert np.allclose(eig.energies, [1, 2, 3])
    assert np.allclose(np.abs(eig.right), np.eye(3))
    assert np.allclose(eig.left, eig.right)
    assert eig.unbroken


def test_jordan_block_defective():
    with pytest.raises(DefectiveMatrix):
        biortho_eig(np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex))


def test_nonfinite_rejected():
    with pytest.raises(NonFinite):
        biortho_eig(np.array([[np.nan, 0], [0, 1]], dtype=complex))
    with pytest.raises(ValueError):
        biortho_eig(np.zeros((2, 3)))


def test_dk_block_real_spectrum_matches_dispersion():
    f = FieldPoint(h=0.5, eta=0.3)
    k = 0.7
    eig = biortho_eig(dk_matrix(ANISO, f, k))
    d = dispersion(ANISO, f, k)
    expected = sorted(
        [-d.lambda_plus.real, -d.lambda_minus.real, d.lambda_minus.real, d.lambda_plus.real]
    )
    assert eig.unbroken
    assert np.allclose(eig.energies.real, expected, atol=1e-10)
    assert np.max(np.abs(eig.energies.imag)) < 1e-10


def test_residuals_and_biorthonormality_random():
    rng = np.random.default_rng(3)
    for n in (2, 3, 5, 8):
        h = random_matrix(rng, n)
        eig = biortho_eig(h)
        scale = np.linalg.norm(h)
        for j in range(n):
            r1 = h @ eig.right[:, j] - eig.energies[j] * eig.right[:, j]
            r2 = h.conj().T @ eig.left[:, j] - eig.energies[j].conj() * eig.left[:, j]
            assert np.linalg.norm(r1) <= 1e-10 * scale
            assert np.linalg.norm(r2) <= 1e-10 * scale
        assert np.max(np.abs(eig.overlap_matrix() - np.eye(n))) < 1e-10
        # completeness
        assert np.linalg.norm(eig.right @ eig.left.conj().T - np.eye(n)) < 1e-9
        # unit norm + leading-component phase convention
        assert np.allclose(np.linalg.norm(eig.right, axis=0), 1.0)
        lead = np.argmax(np.abs(eig.right), axis=0)
        lead_vals = eig.right[lead, np.arange(n)]
        assert np.all(lead_vals.real > 0)
        assert np.max(np.abs(lead_vals.imag)) < 1e-12


def test_sorted_by_real_then_imag():
    h = np.diag([2.0 + 1j, 2.0 - 1j, -1.0]).astype(complex)
    eig = biortho_eig(h)
    assert np.allclose(eig.energies, [-1.0, 2.0 - 1j, 2.0 + 1j])
    assert not eig.unbroken


def test_degenerate_but_diagonalizable_ok():
    # identity has a fully degenerate spectrum yet a complete eigenbasis
    eig = biortho_eig(np.eye(3, dtype=complex))
    assert np.max(np.abs(eig.overlap_matrix() - np.eye(3))) < 1e-12


def test_build_w_hermitian_identity_case():
    rng = np.random.default_rng(5)
    a = random_matrix(rng, 4)
    h = a + a.conj().T
    eig = biortho_eig(h)
    w = build_W(eig).matrix
    assert np.max(np.abs(w - np.eye(4))) < 1e-10
    assert np.max(np.abs(eig.left - eig.right)) < 1e-10


def test_build_w_intertwines_dk():
    h = dk_matrix(ANISO, FieldPoint(h=0.5, eta=0.3), 0.7)
    eig = biortho_eig(h)
    w = build_W(eig).matrix
    assert np.max(np.abs(w - w.conj().T)) < 1e-12
    assert np.min(np.linalg.eigvalsh(w)) > 0
    assert np.linalg.norm(w @ h - h.conj().T @ w) <= 1e-10 * np.linalg.norm(h) * np.linalg.norm(w)
    # right vectors orthonormal in the W inner product
    assert np.max(np.abs(eig.right.conj().T @ w @ eig.right - np.eye(4))) < 1e-10


def test_build_w_rejects_broken_eigensystem():
    h = dk_matrix(ANISO, FieldPoint(h=0.5, eta=0.3), 0.7)
    eig = biortho_eig(h)
    bad = gauge_transform(eig, np.array([1.0, 1.0, 1.0, 1e9]))
    # blowing up one right vector shrinks its left partner; W loses rank
    with pytest.raises(NotPositiveDefinite):
        build_W(bad)


def test_gauge_fix_identity_and_phase():
    h = dk_matrix(ANISO, FieldPoint(h=0.5, eta=0.3), 0.7)
    eig = biortho_eig(h)
    same = gauge_fix(eig, eig)
    assert np.max(np.abs(same.right - eig.right)) < 1e-12

    theta = 0.4
    rotated = gauge_transform(eig, np.full(4, np.exp(1j * theta)))
    fixed = gauge_fix(eig, rotated)
    assert np.max(np.abs(fixed.right - eig.right)) < 1e-12
    assert np.max(np.abs(fixed.left - eig.left)) < 1e-12


def test_gauge_fix_near_gap_closing():
    # straddling the critical circle at eta = 0: either a clean match or an
    # explicit AmbiguousMatching, never a silent mislabeling
    r_c1 = 2.0 * np.sqrt(ANISO.J**2 - ANISO.Gammas**2)
    k = 1e-3
    a = biortho_eig(dk_matrix(ANISO, FieldPoint(h=r_c1 - 5e-4, eta=0.0), k))
    b = biortho_eig(dk_matrix(ANISO, FieldPoint(h=r_c1 + 5e-4, eta=0.0), k))
    try:
        fixed = gauge_fix(a, b)
    except AmbiguousMatching:
        return
    assert np.max(np.abs(fixed.overlap_matrix() - np.eye(4))) < 1e-9


def test_gauge_transform_roundtrip():
    rng = np.random.default_rng(11)
    eig = biortho_eig(random_matrix(rng, 4))
    f = rng.normal(size=4) + 1j * rng.normal(size=4)
    out = gauge_transform(eig, f)
    assert np.max(np.abs(out.overlap_matrix() - np.eye(4))) < 1e-12
    back = gauge_transform(out, 1.0 / f)
    assert np.max(np.abs(back.right - eig.right)) < 1e-12
    assert np.max(np.abs(back.left - eig.left)) < 1e-12

    doubled = gauge_transform(eig, np.full(4, 2.0))
    assert np.allclose(doubled.right, 2.0 * eig.right)
    assert np.allclose(doubled.left, 0.5 * eig.left)

    with pytest.raises(ZeroScale):
        gauge_transform(eig, np.array([1.0, 0.0, 1.0, 1.0]))


def test_family_derivative_matches_finite_difference():
    def evaluate(lam):
        return np.array([[lam[0] ** 2, np.sin(lam[1])], [np.sin(lam[1]), -lam[0]]],
                        dtype=complex)

    def derivative(lam, mu):
        if mu == 0:
            return np.array([[2 * lam[0], 0], [0, -1]], dtype=complex)
        return np.array([[0, np.cos(lam[1])], [np.cos(lam[1]), 0]], dtype=complex)

    fam = HamiltonianFamily(dim_hilbert=2, dim_param=2,
                            evaluate=evaluate, derivative=derivative)
    fam_fd = HamiltonianFamily(dim_hilbert=2, dim_param=2, evaluate=evaluate)
    rng = np.random.default_rng(7)
    for _ in range(5):
        lam = rng.normal(size=2)
        for mu in range(2):
            exact = fam.deriv(lam, mu)
            approx = fam_fd.deriv(lam, mu, step=1e-6)
            assert np.max(np.abs(exact - approx)) < 1e-8
