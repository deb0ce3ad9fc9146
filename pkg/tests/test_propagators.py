import mpmath
import numpy as np
import pytest

from qext.core import ConservedCurrent, GaussianSum, METRIC, lower, minkowski_dot
from qext.gamma_algebra import gammas
from qext.propagators import (COULOMB, DZERO, FEYNMAN, FRIED_YENNIE, LANDAU, TEMPORAL, YUKAWA,
                              LightConeError, PhotonGauge, PropagatorKind, alpha_family,
                              dirac_propagator, gauge_shift_vector, kg_momentum, kg_position,
                              photon_momentum, photon_parts)

K = PropagatorKind


def sample_points(rng, n, min_gap=0.2):
    """Points with ``|x^2|`` bounded away from the light cone, mixed causal character."""
    pts = []
    while len(pts) < n:
        x = rng.uniform(-3, 3, size=4)
        if abs(minkowski_dot(x, x)) > min_gap:
            pts.append(x)
    return np.array(pts)


def off_shell(rng, n, m, gap=0.1):
    k = rng.normal(size=(4 * n, 4))
    keep = (np.abs(minkowski_dot(k, k) + m * m) > gap) & (np.abs(k[:, 0]) > gap)
    return k[keep][:n]


def val(kind, x, m):
    return kg_position(kind, x, m).value


def test_momentum_examples():
    assert kg_momentum(K.CAUSAL, [0, 1, 0, 0], 1.0, 1e-12) == pytest.approx(0.5, abs=1e-11)
    assert kg_momentum(K.CAUSAL, np.zeros(4), 1.0, 1e-12) == pytest.approx(1.0, abs=1e-11)
    with pytest.raises(ValueError):
        kg_momentum(K.CAUSAL, np.zeros(4), 1.0, 0.0)


def test_momentum_retarded_minus_advanced_is_first_order(rng):
    p = np.array([0.7, 1.2, -0.3, 0.5])
    etas = np.geomspace(1e-2, 1e-5, 4)
    d = [abs(kg_momentum(K.RETARDED, p, 1.0, e) - kg_momentum(K.ADVANCED, p, 1.0, e)) for e in etas]
    slope = np.polyfit(np.log(etas), np.log(d), 1)[0]
    assert slope == pytest.approx(1.0, abs=1e-3)


def test_momentum_causal_symmetric(rng):
    p = rng.normal(size=(100, 4))
    np.testing.assert_array_equal(kg_momentum(K.CAUSAL, p, 1.3), kg_momentum(K.CAUSAL, -p, 1.3))


def test_momentum_on_shell_weights():
    m = 1.0
    p = np.array([np.sqrt(2.0), 1.0, 0, 0])
    w = np.pi / np.sqrt(2.0)
    assert kg_momentum(K.WIGHTMAN_PLUS, p, m) == pytest.approx(1j * w)
    assert kg_momentum(K.WIGHTMAN_MINUS, -p, m) == pytest.approx(-1j * w)
    assert kg_momentum(K.WIGHTMAN_PLUS, -p, m) == 0
    assert kg_momentum(K.PAULI_JORDAN, [1.0, 0, 0, 0.3], m) == 0


def test_position_examples():
    assert val(K.PAULI_JORDAN, [0, 0.4, -1, 0.2], 1.0) == 0
    for x in ([-0.5, 2, 0, 0], [-2, 0.3, 0.1, 0]):
        assert val(K.RETARDED, x, 1.0) == 0
    x = [2, 0.5, 0, 0]
    lhs = val(K.CAUSAL, x, 1.0) - val(K.WIGHTMAN_PLUS, x, 1.0)
    assert abs(lhs) < 1e-10


def test_light_cone_rejected():
    with pytest.raises(LightConeError):
        kg_position(K.CAUSAL, [1.0, 1.0, 0, 0], 1.0)


@pytest.mark.parametrize("m", [1.0, 0.0])
def test_identity_web(rng, m):
    x = sample_points(rng, 200)
    v = {k: val(k, x, m) for k in K}
    vm = {k: val(k, -x, m) for k in K}
    fut = x[:, 0] > 0
    space = minkowski_dot(x, x) > 0
    tol = 1e-10
    D = v[K.PAULI_JORDAN]
    assert np.max(np.abs(D - (v[K.WIGHTMAN_PLUS] + v[K.WIGHTMAN_MINUS]))) < tol
    assert np.max(np.abs(D - (v[K.RETARDED] - v[K.ADVANCED]))) < tol
    assert np.max(np.abs(D + vm[K.PAULI_JORDAN])) < tol
    assert np.max(np.abs(D.imag)) < tol
    assert np.max(np.abs(np.conj(v[K.WIGHTMAN_MINUS]) - v[K.WIGHTMAN_PLUS])) < tol
    assert np.max(np.abs(v[K.WIGHTMAN_PLUS] + vm[K.WIGHTMAN_MINUS])) < tol
    assert np.max(np.abs(v[K.RETARDED] - np.where(fut, D, 0))) < tol
    assert np.max(np.abs(v[K.ADVANCED] + np.where(fut, 0, D))) < tol
    assert np.max(np.abs(v[K.RETARDED] - vm[K.ADVANCED])) < tol
    causal = np.where(fut, v[K.WIGHTMAN_PLUS], -v[K.WIGHTMAN_MINUS])
    assert np.max(np.abs(v[K.CAUSAL] - causal)) < tol
    assert np.max(np.abs(v[K.CAUSAL] - vm[K.CAUSAL])) < tol
    assert np.max(np.abs(D[space])) == 0
    assert np.max(np.abs(v[K.RETARDED][~fut])) == 0


def test_delta_coefficients_follow_the_same_web():
    for s in (1.0, -1.0):
        x = [2 * s, 0.5, 0, 0]
        c = {k: kg_position(k, x, 1.0).delta_coefficient for k in K}
        assert c[K.PAULI_JORDAN] == pytest.approx(c[K.WIGHTMAN_PLUS] + c[K.WIGHTMAN_MINUS])
        assert c[K.PAULI_JORDAN] == pytest.approx(c[K.RETARDED] - c[K.ADVANCED])
        assert c[K.CAUSAL] == pytest.approx(1 / (4 * np.pi))


def _mp_reference(kind, x, m):
    x0 = mpmath.mpf(x[0])
    x2 = -x0 ** 2 + sum(mpmath.mpf(c) ** 2 for c in x[1:])
    sg = 1 if x0 > 0 else -1
    if x2 > 0:
        r = mpmath.sqrt(x2)
        b = m * mpmath.besselk(1, m * r) / (4 * mpmath.pi ** 2 * r)
        return {K.WIGHTMAN_PLUS: 1j * b, K.CAUSAL: 1j * b, K.PAULI_JORDAN: 0}[kind]
    s = mpmath.sqrt(-x2)
    j = -m * sg * mpmath.besselj(1, m * s) / (4 * mpmath.pi * s)
    h1 = mpmath.besselj(1, m * s) + 1j * mpmath.bessely(1, m * s)
    h2 = mpmath.besselj(1, m * s) - 1j * mpmath.bessely(1, m * s)
    hp = h2 if sg > 0 else h1
    return {K.PAULI_JORDAN: j,
            K.WIGHTMAN_PLUS: -sg * m * hp / (8 * mpmath.pi * s),
            K.CAUSAL: -m * h2 / (8 * mpmath.pi * s)}[kind]


@pytest.mark.parametrize("x", [[0.3, 1, 0.2, 0], [2, 0.5, 0, 0], [-7.5, 1, 2, 0.5],
                               [12.0, 0.5, 0, 0], [0.1, 9.0, 0, 0], [-0.2, 0.05, 0.03, 0.1]])
@pytest.mark.parametrize("kind", [K.WIGHTMAN_PLUS, K.PAULI_JORDAN, K.CAUSAL])
def test_bessel_closed_forms_against_high_precision(x, kind):
    mpmath.mp.dps = 30
    ref = complex(_mp_reference(kind, x, 1.0))
    got = val(kind, x, 1.0)
    assert abs(got - ref) <= 1e-12 * max(abs(ref), 1e-300) + 1e-300


def _fd_kg(kind, x, m, h):
    c = np.array([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12])
    offs = np.arange(-2, 3)
    f0 = val(kind, x, m)
    out = m * m * f0
    for mu in range(4):
        e = np.zeros(4)
        e[mu] = h
        d2 = sum(ci * val(kind, x + o * e, m) for ci, o in zip(c, offs)) / h ** 2
        out += d2 if mu == 0 else -d2
    scale = abs(m * m * f0) + abs(d2)
    return abs(out), scale


@pytest.mark.parametrize("kind", list(K))
def test_klein_gordon_residual(kind, rng):
    pts = sample_points(rng, 12, min_gap=1.0)
    for x in pts:
        scale = np.linalg.norm(x)
        res, ref = _fd_kg(kind, x, 1.0, 1e-2 * min(scale, 1.0))
        if ref == 0:
            continue
        assert res <= 1e-4 * ref


def test_dirac_momentum_examples():
    np.testing.assert_allclose(dirac_propagator(K.CAUSAL, np.zeros(4), 1.0, domain="momentum",
                                                pole_offset=1e-14), np.eye(4), atol=1e-12)


def test_dirac_spacelike_vanishing(rng):
    x = sample_points(rng, 200)
    x = x[minkowski_dot(x, x) > 0]
    S = dirac_propagator(K.PAULI_JORDAN, x, 1.0)
    assert np.max(np.abs(S)) == 0


def test_dirac_web(rng):
    x = sample_points(rng, 100)
    Sp = dirac_propagator(K.WIGHTMAN_PLUS, x, 1.0)
    Sm = dirac_propagator(K.WIGHTMAN_MINUS, x, 1.0)
    S = dirac_propagator(K.PAULI_JORDAN, x, 1.0)
    assert np.max(np.abs(S - Sp - Sm)) < 1e-10


def test_dirac_equation_residual(rng):
    g = gammas("dirac")
    c = np.array([1 / 12, -2 / 3, 0, 2 / 3, -1 / 12])
    m = 1.0
    for x in ([2.0, 0.5, 0.3, -0.2], [-1.7, 0.2, 0.4, 0.1], [3.0, 1.0, -0.5, 0.7]):
        x = np.array(x)
        h = 1e-2
        S0 = dirac_propagator(K.CAUSAL, x, m)
        out = m * S0
        parts = []
        for mu in range(4):
            e = np.zeros(4)
            e[mu] = h
            d = sum(ci * dirac_propagator(K.CAUSAL, x + o * e, m) for ci, o in zip(c, range(-2, 3))) / h
            term = -1j * g[mu] @ d
            parts.append(np.abs(term).max())
            out = out + term
        assert np.abs(out).max() <= 1e-4 * max(max(parts), m * np.abs(S0).max())


def test_photon_examples(rng):
    k = np.array([0.4, 1.1, -0.3, 0.7])
    m = 0.8
    den = minkowski_dot(k, k) + m * m
    np.testing.assert_allclose(photon_momentum(FEYNMAN, k, m, 1e-14), METRIC / den, rtol=1e-12)
    np.testing.assert_allclose(photon_momentum(alpha_family(1.0), k, m) - photon_momentum(FEYNMAN, k, m),
                               0, atol=0)
    assert alpha_family(1.0).alpha == 1.0 and PhotonGauge.parse("alpha:0.5").alpha == 0.5


def test_photon_gauge_mass_mismatch():
    with pytest.raises(ValueError):
        photon_momentum(DZERO, np.ones(4), 0.0)
    with pytest.raises(ValueError):
        photon_momentum(COULOMB, np.ones(4), 1.0)
    with pytest.raises(ValueError):
        photon_momentum(COULOMB, [1.0, 0, 0, 0], 0.0)
    with pytest.raises(ValueError):
        PhotonGauge("unitary")


@pytest.mark.parametrize("gauge,m", [(COULOMB, 0.0), (YUKAWA, 0.9), (TEMPORAL, 0.9), (TEMPORAL, 0.0)])
def test_gauge_shift_decomposition(gauge, m, rng):
    # the decomposition is exact only as eta -> 0; sample off shell with a tiny offset
    k = off_shell(rng, 50, m)
    eta = 1e-14
    D = photon_momentum(gauge, k, m, eta)
    DF = photon_momentum(FEYNMAN, k, m, eta)
    f = gauge_shift_vector(gauge, k, m, eta)
    kl = lower(k)
    shift = kl[:, :, None] * f[:, None, :] + f[:, :, None] * kl[:, None, :]
    err = np.abs(D - DF - shift).max(axis=(1, 2)) / np.abs(D).max(axis=(1, 2))
    assert err.max() < 1e-12


def test_coulomb_shift_vector_formula(rng):
    k = rng.normal(size=4)
    eta = 1e-6
    den = minkowski_dot(k, k) - 1j * eta
    k3 = k[1:] @ k[1:]
    f = gauge_shift_vector(COULOMB, k, 0.0, eta)
    # f_0 = k^0/(2 (k^2 - i0) |k|^2) with the lower-index component k_0 = -k^0
    assert f[0] == pytest.approx(-k[0] / (2 * den * k3), rel=1e-14)
    np.testing.assert_allclose(f[1:], -k[1:] / (2 * den * k3), rtol=1e-14)


@pytest.mark.parametrize("m,gauges", [
    (0.9, [FEYNMAN, DZERO, LANDAU, YUKAWA, TEMPORAL, alpha_family(0.3), alpha_family(2.5)]),
    (0.0, [FEYNMAN, LANDAU, COULOMB, FRIED_YENNIE, TEMPORAL, alpha_family(0.3)]),
])
def test_conserved_contraction_gauge_independent(m, gauges, rng):
    C = rng.normal(size=(4, 4))
    J = ConservedCurrent(C - C.T, GaussianSum.single())
    k = off_shell(rng, 100, m)
    Jk = J.fourier(k)
    vals = []
    for g in gauges:
        D = photon_momentum(g, k, m, 1e-14)
        vals.append(np.einsum("ni,nij,nj->n", Jk.conj(), D, Jk))
    ref = np.einsum("ni,nj->n", np.abs(Jk), np.abs(Jk)) * np.abs(photon_momentum(FEYNMAN, k, m)).max(axis=(1, 2))
    for v in vals[1:]:
        assert np.max(np.abs(v - vals[0]) / ref) < 1e-12


def test_photon_parts_split():
    P, R = photon_parts(COULOMB, [0.3, 1.0, 0.5, -0.2], 0.0)
    assert R[0, 0] == pytest.approx(-1 / 1.29)
    np.testing.assert_allclose(P[0], 0)
