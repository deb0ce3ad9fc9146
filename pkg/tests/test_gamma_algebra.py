import itertools

import numpy as np
import pytest

from qext.core import METRIC
from qext.gamma_algebra import (GammaRepresentation, alpha, beta, charge_conjugation_kappa,
                                gamma5, gamma_matrix, gammas, sigma, slash,
                                trace_slash_product)

REPS = list(GammaRepresentation)
I4 = np.eye(4)


def test_named_elements():
    np.testing.assert_array_equal(gamma_matrix("dirac", ("gamma", 0)), np.diag([1, 1, -1, -1]))
    np.testing.assert_array_equal(gamma_matrix("majorana", ("gamma", 2)),
                                  1j * np.diag([-1, -1, 1, 1]))
    for rep in REPS:
        np.testing.assert_allclose(gamma_matrix(rep, "gamma5") @ gamma5(rep), I4, atol=1e-15)
        np.testing.assert_array_equal(gamma_matrix(rep, "beta"), beta(rep))
        np.testing.assert_array_equal(gamma_matrix(rep, ("alpha", 2)), alpha(rep, 2))
        np.testing.assert_array_equal(gamma_matrix(rep, ("sigma", 1, 3)), sigma(rep, 1, 3))


@pytest.mark.parametrize("which", [("gamma", 4), ("gamma", -1), ("alpha", 0), ("sigma", 0, 4)])
def test_index_out_of_range(which):
    with pytest.raises(IndexError):
        gamma_matrix("dirac", which)


def test_unknown_names():
    with pytest.raises(ValueError):
        gamma_matrix("dirac", "delta")
    with pytest.raises(ValueError):
        gammas("weyl")


@pytest.mark.parametrize("rep", REPS)
def test_clifford_relations(rep):
    g = gammas(rep)
    for mu, nu in itertools.product(range(4), repeat=2):
        anti = g[mu] @ g[nu] + g[nu] @ g[mu]
        np.testing.assert_allclose(anti + 2 * METRIC[mu, nu] * I4, 0, atol=1e-14)
    np.testing.assert_allclose(g[0].conj().T, g[0], atol=1e-15)
    for i in (1, 2, 3):
        np.testing.assert_allclose(g[i].conj().T, -g[i], atol=1e-15)
    g5 = gamma5(rep)
    np.testing.assert_allclose(g5.conj().T, g5, atol=1e-15)
    for mu in range(4):
        np.testing.assert_allclose(g5 @ g[mu] + g[mu] @ g5, 0, atol=1e-14)


@pytest.mark.parametrize("rep", REPS)
def test_alpha_beta_family(rep):
    mats = [beta(rep)] + [alpha(rep, i) for i in (1, 2, 3)]
    for a, b in itertools.combinations(mats, 2):
        np.testing.assert_allclose(a @ b + b @ a, 0, atol=1e-14)
    for a in mats:
        np.testing.assert_allclose(a @ a, I4, atol=1e-14)
        np.testing.assert_allclose(a.conj().T, a, atol=1e-15)


@pytest.mark.parametrize("rep", REPS)
def test_lorentz_algebra_brackets(rep):
    # [S^{mn}, S^{rs}] with S = sigma/2 closes on the so(1,3) structure constants
    S = lambda a, b: 0.5 * sigma(rep, a, b)
    g = METRIC
    for (a, b), (c, d) in [((0, 1), (0, 2)), ((0, 1), (1, 2)), ((1, 2), (2, 3)),
                           ((0, 3), (1, 3)), ((1, 2), (0, 1)), ((2, 3), (0, 2))]:
        lhs = S(a, b) @ S(c, d) - S(c, d) @ S(a, b)
        rhs = -1j * (g[b, c] * S(a, d) - g[a, c] * S(b, d) - g[b, d] * S(a, c) + g[a, d] * S(b, c))
        np.testing.assert_allclose(lhs, rhs, atol=1e-14)


@pytest.mark.parametrize("rep", REPS)
def test_slash_examples(rep, rng):
    np.testing.assert_array_equal(slash(np.zeros(4), rep), np.zeros((4, 4)))
    np.testing.assert_array_equal(slash([1, 0, 0, 0], rep), -gammas(rep)[0])
    a = rng.normal(size=4) + 1j * rng.normal(size=4)
    aa = -a[0] ** 2 + a[1:] @ a[1:]
    np.testing.assert_allclose(slash(a, rep) @ slash(a, rep), -aa * I4, atol=1e-13)


@pytest.mark.parametrize("rep", REPS)
def test_trace_examples(rep, rng):
    assert trace_slash_product([], rep) == 4
    e1 = [0, 1, 0, 0]
    assert trace_slash_product([e1, e1], rep) == pytest.approx(-4)
    abc = rng.normal(size=(3, 4))
    assert trace_slash_product(list(abc), rep) == 0
    assert trace_slash_product(list(abc), rep, method="identity") == 0


@pytest.mark.parametrize("rep", REPS)
def test_trace_identities_random(rep, rng):
    for n in (2, 4):
        for _ in range(200):
            vs = list(rng.normal(size=(n, 4)) + 1j * rng.normal(size=(n, 4)))
            a = trace_slash_product(vs, rep, "matrix")
            b = trace_slash_product(vs, rep, "identity")
            assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


def test_trace_rejects_long_closed_form():
    with pytest.raises(ValueError):
        trace_slash_product([np.ones(4)] * 6, method="identity")


@pytest.mark.parametrize("rep", REPS)
def test_kappa_relations(rep):
    k = charge_conjugation_kappa(rep)
    np.testing.assert_allclose(k @ k.conj().T, I4, atol=1e-15)
    np.testing.assert_allclose(k @ k.conj(), I4, atol=1e-15)
    kinv = np.linalg.inv(k)
    for g in gammas(rep):
        np.testing.assert_allclose(k @ g @ kinv + g.conj(), 0, atol=1e-14)


def test_kappa_special_forms():
    np.testing.assert_array_equal(charge_conjugation_kappa("majorana"), I4)
    k = charge_conjugation_kappa("dirac")
    np.testing.assert_allclose(k, 1j * gammas("dirac")[2], atol=0)
    np.testing.assert_allclose(k, k.conj(), atol=0)
    np.testing.assert_allclose(k, k.conj().T, atol=0)


def test_majorana_gammas_are_imaginary():
    np.testing.assert_array_equal(gammas("majorana").real, 0)
