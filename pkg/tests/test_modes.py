import numpy as np
import pytest

from qext.core import METRIC, OnShellMomentum, lower, minkowski_dot
from qext.gamma_algebra import alpha, beta, charge_conjugation_kappa
from qext.modes import (BoundaryDecayError, CauchyData, casimir_spin_sum, causal_shadow_leakage,
                        dirac_u, evolve_kg_cauchy, gaussian_cauchy_data, kg_energy,
                        polarization_completeness, polarization_completeness_closed,
                        polarization_vector, read_cauchy, spin_projector, spin_sum_boson,
                        spinor_completeness, symplectic_form, write_cauchy)

SPINS = (0.5, -0.5)
BETA = beta("dirac")
ALPHA = [alpha("dirac", i) for i in (1, 2, 3)]


def test_rest_frame_spinor():
    np.testing.assert_array_equal(dirac_u([0, 0, 0], 1.0, 1, 0.5).components, [1, 0, 0, 0])
    with pytest.raises(ValueError):
        dirac_u([0, 0, 0], 0.0)


def test_spinor_orthonormality(rng):
    for _ in range(20):
        p = rng.normal(size=3) * 2
        m = rng.uniform(0.3, 2)
        for sign in (1, -1):
            us = [dirac_u(p, m, sign, s).components for s in SPINS]
            G = np.array([[a.conj() @ b for b in us] for a in us])
            np.testing.assert_allclose(G, np.eye(2), atol=1e-14)
        # opposite-frequency partner with the same spatial momentum is orthogonal
        for s in SPINS:
            for s1 in SPINS:
                ov = dirac_u(p, m, 1, s).components.conj() @ dirac_u(p, m, -1, s1).components
                assert abs(ov) < 1e-14


def test_kappa_maps_spinors(rng):
    k = charge_conjugation_kappa("dirac")
    for _ in range(20):
        p = rng.normal(size=3)
        for sign in (1, -1):
            for s in SPINS:
                lhs = k @ dirac_u(p, 1.3, sign, s).components.conj()
                rhs = dirac_u(-p, 1.3, -sign, -s).components
                np.testing.assert_allclose(lhs, rhs, atol=1e-14)


def test_spinors_solve_the_dirac_equation(rng):
    from qext.gamma_algebra import slash
    for _ in range(10):
        p = rng.normal(size=3)
        for sign in (1, -1):
            u = dirac_u(p, 0.8, sign, 0.5)
            # plane wave exp(i k x) with k = (sign E, p): (kslash + m) u = 0
            np.testing.assert_allclose((slash(u.four_momentum()) + 0.8 * np.eye(4)) @ u.components,
                                       0, atol=1e-13)


@pytest.mark.parametrize("sign", [1, -1])
def test_spinor_completeness(sign, rng):
    for _ in range(50):
        p = rng.normal(size=3) * 3
        np.testing.assert_allclose(spinor_completeness(p, 1.1, sign), spin_projector(p, 1.1, sign),
                                   atol=1e-12)


def test_gauge_kernel_spin_sum(rng):
    # sum over spins of |u(p,s)* u(-p1,-s1)|^2 = (|p+p1|^2 - (E-E1)^2)/(2 E E1)
    for _ in range(30):
        p, p1 = rng.normal(size=(2, 3)) * 2
        m = 0.7
        E, E1 = np.sqrt(p @ p + m * m), np.sqrt(p1 @ p1 + m * m)
        tot = sum(abs(dirac_u(p, m, 1, s).components.conj() @ dirac_u(-p1, m, -1, -s1).components) ** 2
                  for s in SPINS for s1 in SPINS)
        q = p + p1
        assert tot == pytest.approx((q @ q - (E - E1) ** 2) / (2 * E * E1), rel=1e-12)
        P = (np.eye(4) * E + sum(pi * a for pi, a in zip(p, ALPHA)) + m * BETA) / (2 * E)
        Q = (np.eye(4) * E1 + sum(pi * a for pi, a in zip(p1, ALPHA)) - m * BETA) / (2 * E1)
        assert tot == pytest.approx(np.trace(P @ Q).real, rel=1e-12)


def test_casimir_examples():
    rest = OnShellMomentum(1.0, (0, 0, 0))
    b = np.diag([1, 1, -1, -1]).astype(complex)
    for method in ("trace", "explicit"):
        assert casimir_spin_sum(b, 1, 1, rest, rest, method) == pytest.approx(2, abs=1e-14)
        assert casimir_spin_sum(b, 1, -1, rest, rest, method) == pytest.approx(0, abs=1e-14)


def test_casimir_random(rng):
    signs = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    for i in range(100):
        m = rng.uniform(0.2, 2)
        pp, pm = OnShellMomentum(m, rng.normal(size=3)), OnShellMomentum(m, rng.normal(size=3))
        B = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        sp, sm = signs[i % 4]
        a = casimir_spin_sum(B, sp, sm, pp, pm, "trace")
        b = casimir_spin_sum(B, sp, sm, pp, pm, "explicit")
        assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


def test_casimir_rejects_unequal_masses():
    with pytest.raises(ValueError):
        casimir_spin_sum(np.eye(4), 1, 1, OnShellMomentum(1, (0, 0, 0)), OnShellMomentum(2, (0, 0, 0)))


def test_polarization_example():
    u = polarization_vector([0, 0, 1], 0.0, 1)
    # frame rule picks e1 = x, e2 = z x x = y; the +1 helicity vector is (e1 - i e2)/sqrt(2)
    np.testing.assert_allclose(u.components, [0, 1 / np.sqrt(2), -1j / np.sqrt(2), 0], atol=1e-15)
    with pytest.raises(ValueError):
        polarization_vector([0, 0, 0], 1.0, 1)
    with pytest.raises(ValueError):
        polarization_vector([1, 0, 0], 0.0, 0)


def test_polarization_properties(rng):
    for _ in range(50):
        k = rng.normal(size=3) * 2
        m = rng.uniform(0.1, 2)
        kv = np.array([np.sqrt(k @ k + m * m), *k])
        labels = (1, -1, 0)
        us = [polarization_vector(k, m, s).components for s in labels]
        for u in us:
            assert abs(minkowski_dot(u, kv)) < 1e-12 * np.linalg.norm(kv)
        G = np.array([[minkowski_dot(a.conj(), b) for b in us] for a in us])
        np.testing.assert_allclose(G, np.eye(3), atol=1e-12)
        for s in (1, -1):
            e = polarization_vector(k, m, s).components[1:]
            np.testing.assert_allclose(np.cross(k, e), s * 1j * np.linalg.norm(k) * e, atol=1e-12)
        sc = polarization_vector(k, m, "sc").components
        assert minkowski_dot(sc, sc).real == pytest.approx(-1, abs=1e-12)
        # full completeness including the scalar mode reproduces the metric
        tot = polarization_completeness(k, m) - np.outer(lower(sc).conj(), lower(sc))
        np.testing.assert_allclose(tot, METRIC, atol=1e-12)


@pytest.mark.parametrize("m", [0.0, 0.9])
def test_polarization_completeness(m, rng):
    for _ in range(100):
        k = rng.normal(size=3)
        a = polarization_completeness(k, m)
        b = polarization_completeness_closed(k, m)
        assert np.abs(a - b).max() <= 1e-12 * max(1.0, np.abs(b).max())


def test_spin_sum_boson(rng):
    k = OnShellMomentum(0.8, rng.normal(size=3))
    kv = k.four_vector()
    for _ in range(20):
        M, N = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
        # project onto the k-orthogonal subspace: M -> M + (k.M/m^2) k
        M = M + minkowski_dot(kv, M) / 0.64 * kv
        N = N + minkowski_dot(kv, N) / 0.64 * kv
        a = spin_sum_boson(M, N, k, method="closed")
        b = spin_sum_boson(M, N, k, method="explicit")
        assert abs(a - b) < 1e-12 * max(1, abs(a))
    with pytest.raises(ValueError):
        spin_sum_boson(kv, kv, k)
    e = polarization_vector(k.spatial, 0.8, 1).components
    assert spin_sum_boson(e, e, k) == pytest.approx(minkowski_dot(e.conj(), e))


def test_massless_spin_sum(rng):
    k = OnShellMomentum(0.0, rng.normal(size=3))
    kv = k.four_vector()
    M = np.concatenate([[0], np.cross(kv[1:], rng.normal(size=3))]).astype(complex)
    N = np.concatenate([[0], np.cross(kv[1:], rng.normal(size=3))]).astype(complex)
    assert spin_sum_boson(M, N, k) == pytest.approx(spin_sum_boson(M, N, k, method="explicit"))


@pytest.fixture(scope="module")
def bump():
    return gaussian_cauchy_data(64, 18.0, sigma=1.5, amplitude=(1.0, 0.3))


def test_evolve_zero_time_is_identity(bump):
    out = evolve_kg_cauchy(bump, 0.0, 1.0)
    assert out.varsigma.tobytes() == bump.varsigma.tobytes()
    assert out.vartheta.tobytes() == bump.vartheta.tobytes()


def test_evolution_conserves_energy_and_symplectic_form(bump):
    m = 1.0
    other = gaussian_cauchy_data(64, 18.0, sigma=1.2, center=(1, -0.5, 0), amplitude=(0.4, -1.0))
    e0 = kg_energy(bump, m)
    w0 = symplectic_form(bump, other)
    for t in (0.5, 3.0, 7.0):
        a, b = evolve_kg_cauchy(bump, t, m), evolve_kg_cauchy(other, t, m)
        assert abs(kg_energy(a, m) - e0) < 1e-10 * e0
        assert abs(symplectic_form(a, b) - w0) < 1e-10 * abs(w0)


def test_evolution_group_law(bump):
    a = evolve_kg_cauchy(evolve_kg_cauchy(bump, 1.3, 0.7), 2.1, 0.7)
    b = evolve_kg_cauchy(bump, 3.4, 0.7)
    np.testing.assert_allclose(a.varsigma, b.varsigma, atol=1e-12)
    back = evolve_kg_cauchy(b, -3.4, 0.7)
    np.testing.assert_allclose(back.varsigma, bump.varsigma, atol=1e-12)


def test_plane_wave_mode_solves_klein_gordon():
    # one Fourier mode evolves with exp(-i eps t)
    n, L, m = 16, 8.0, 0.6
    d = CauchyData(np.zeros((n, n, n)), np.zeros((n, n, n)), 2 * L / n, (-L,) * 3)
    X, Y, Z = d.mesh()
    k = np.array([2, 1, 0]) * np.pi / L
    eps = np.sqrt(k @ k + m * m)
    d.varsigma = np.exp(1j * (k[0] * X + k[1] * Y))
    d.vartheta = -1j * eps * d.varsigma
    out = evolve_kg_cauchy(d, 1.7, m, check=False)
    np.testing.assert_allclose(out.varsigma, d.varsigma * np.exp(-1j * eps * 1.7), atol=1e-12)


def test_causal_shadow(bump):
    t = 6.0
    out = evolve_kg_cauchy(bump, t, 1.0)
    assert causal_shadow_leakage(bump, out, t) < 1e-8


def test_boundary_guard():
    d = gaussian_cauchy_data(16, 3.0, sigma=1.5)
    with pytest.raises(BoundaryDecayError):
        evolve_kg_cauchy(d, 1.0, 1.0)


@pytest.mark.parametrize("complex_fields", [False, True])
def test_binary_roundtrip(tmp_path, complex_fields):
    d = gaussian_cauchy_data(8, 4.0, amplitude=(1.0, 0.5))
    if complex_fields:
        d.varsigma = d.varsigma * (1 + 2j)
    path = tmp_path / "grid.qcd"
    write_cauchy(path, d)
    e = read_cauchy(path)
    assert e.spacing == d.spacing and e.origin == d.origin
    np.testing.assert_array_equal(e.varsigma, d.varsigma)
    np.testing.assert_array_equal(e.vartheta, d.vartheta)
    raw = path.read_bytes()
    assert raw[:8] == b"QEXTCD01"
    (tmp_path / "bad.qcd").write_bytes(raw[:20])
    with pytest.raises(ValueError):
        read_cauchy(tmp_path / "bad.qcd")
