"""Dirac matrices in the Dirac, Majorana and spinor representations.

Conventions: ``{gamma^mu, gamma^nu} = -2 g^{mu nu}``, ``gamma^0`` hermitian,
``gamma^i`` antihermitian, ``gamma^5 = -i gamma^0 gamma^1 gamma^2 gamma^3``.
"""
from __future__ import annotations

from enum import Enum
from typing import Sequence

import numpy as np

from .core import METRIC, as_four

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)
PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class GammaRepresentation(Enum):
    DIRAC = "dirac"
    MAJORANA = "majorana"
    SPINOR = "spinor"

    @classmethod
    def parse(cls, rep) -> "GammaRepresentation":
        if isinstance(rep, cls):
            return rep
        try:
            return cls(str(rep).lower())
        except ValueError:
            raise ValueError(f"unknown gamma representation {rep!r}") from None


def _blk(a, b, c, d):
    return np.block([[a, b], [c, d]])


_TABLES = {
    GammaRepresentation.DIRAC: np.array(
        [_blk(_I2, _Z2, _Z2, -_I2)] + [_blk(_Z2, s, -s, _Z2) for s in PAULI]),
    GammaRepresentation.MAJORANA: 1j * np.array([
        _blk(_Z2, -_I2, _I2, _Z2),
        _blk(_Z2, PAULI[0], PAULI[0], _Z2),
        _blk(-_I2, _Z2, _Z2, _I2),
        _blk(_Z2, PAULI[2], PAULI[2], _Z2),
    ]),
    GammaRepresentation.SPINOR: np.array(
        [_blk(_Z2, _I2, _I2, _Z2)] + [_blk(_Z2, -s, s, _Z2) for s in PAULI]),
}

# i sigma_2 blocks; the Dirac and spinor representations share this kappa
_KAPPA_OFFDIAG = _blk(_Z2, 1j * PAULI[1], -1j * PAULI[1], _Z2)


def gammas(rep=GammaRepresentation.DIRAC) -> np.ndarray:
    """Return the stacked ``gamma^mu`` (upper index), shape (4, 4, 4)."""
    return _TABLES[GammaRepresentation.parse(rep)].copy()


def gamma5(rep=GammaRepresentation.DIRAC) -> np.ndarray:
    g = _TABLES[GammaRepresentation.parse(rep)]
    return -1j * g[0] @ g[1] @ g[2] @ g[3]


def beta(rep=GammaRepresentation.DIRAC) -> np.ndarray:
    return gammas(rep)[0]


def alpha(rep, i: int) -> np.ndarray:
    if i not in (1, 2, 3):
        raise IndexError("alpha index must be 1, 2 or 3")
    g = _TABLES[GammaRepresentation.parse(rep)]
    return g[0] @ g[i]


def sigma(rep, mu: int, nu: int) -> np.ndarray:
    """Spin matrix ``(i/2)[gamma^mu, gamma^nu]``."""
    if not (0 <= mu <= 3 and 0 <= nu <= 3):
        raise IndexError("Lorentz indices must lie in 0..3")
    g = _TABLES[GammaRepresentation.parse(rep)]
    return 0.5j * (g[mu] @ g[nu] - g[nu] @ g[mu])


def gamma_matrix(rep, which) -> np.ndarray:
    """Look up an element of the Clifford algebra.

    Parameters
    ----------
    rep : GammaRepresentation or str
    which : tuple or str
        One of ``("gamma", mu)``, ``"gamma5"``, ``"beta"``, ``("alpha", i)``
        or ``("sigma", mu, nu)``.
    """
    if isinstance(which, str):
        which = (which,)
    name, *idx = which
    name = name.lower()
    if name == "gamma":
        (mu,) = idx
        if not 0 <= mu <= 3:
            raise IndexError("gamma index must lie in 0..3")
        return gammas(rep)[mu]
    if name == "gamma5":
        return gamma5(rep)
    if name == "beta":
        return beta(rep)
    if name == "alpha":
        return alpha(rep, *idx)
    if name == "sigma":
        return sigma(rep, *idx)
    raise ValueError(f"unknown Clifford element {which!r}")


def slash(a, rep=GammaRepresentation.DIRAC) -> np.ndarray:
    """``a_mu gamma^mu`` with the index lowered by the metric; batches allowed."""
    a = as_four(a)
    al = a * np.diag(METRIC)
    return np.einsum("...m,mij->...ij", al, _TABLES[GammaRepresentation.parse(rep)])


def trace_slash_product(vectors: Sequence, rep=GammaRepresentation.DIRAC,
                        method: str = "matrix") -> complex:
    """Trace of a product of slashed vectors.

    ``method="matrix"`` multiplies the 4x4 matrices; ``method="identity"``
    uses the closed forms for 0, 2 and 4 factors. Odd lengths give 0.
    """
    vs = [as_four(v) for v in vectors]
    n = len(vs)
    if n % 2 == 1:
        return 0j
    if method == "matrix":
        prod = np.eye(4, dtype=complex)
        for v in vs:
            prod = prod @ slash(v, rep)
        return complex(np.trace(prod))
    if method != "identity":
        raise ValueError("method must be 'matrix' or 'identity'")
    if n == 0:
        return 4.0 + 0j
    dot = lambda x, y: -x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3]
    if n == 2:
        return complex(-4 * dot(vs[0], vs[1]))
    if n == 4:
        a, b, c, d = vs
        return complex(4 * dot(a, b) * dot(c, d) - 4 * dot(a, c) * dot(b, d)
                       + 4 * dot(a, d) * dot(b, c))
    raise ValueError("closed-form traces are implemented for 0, 2 or 4 factors")


def charge_conjugation_kappa(rep=GammaRepresentation.DIRAC) -> np.ndarray:
    """Unitary ``kappa`` with ``kappa conj(kappa) = 1`` and ``kappa gamma kappa^-1 = -conj(gamma)``."""
    rep = GammaRepresentation.parse(rep)
    if rep is GammaRepresentation.MAJORANA:
        return np.eye(4, dtype=complex)
    if rep is GammaRepresentation.DIRAC:
        return 1j * _TABLES[rep][2]
    return _KAPPA_OFFDIAG.copy()
