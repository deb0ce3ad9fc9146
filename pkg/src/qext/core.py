"""Kinematics, metric conventions and analytic source profiles.

Metric signature is (-,+,+,+) and units are natural (hbar = c = 1).

Fourier conventions are mixed: space uses ``exp(-i k.x)`` while time uses
``exp(+i k0 t)``, so that

    f(k) = int exp(-i k x) f(x) d^4x,   k x = -k0 t + kvec . xvec,

and derivatives act as ``d_mu -> i k_mu`` (index lowered by the metric).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])


class ProfileError(ValueError):
    """Raised for invalid source profiles or unsupported profile operations."""


@dataclass(frozen=True)
class FourVector:
    """Real four-vector ``(t, x, y, z)`` with upper indices."""

    t: float
    x: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        xs = tuple(float(v) for v in self.x)
        if len(xs) != 3:
            raise ValueError("spatial part must have three components")
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "t", float(self.t))
        if not np.all(np.isfinite(self.as_array())):
            raise ValueError("four-vector components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.t, *self.x])

    @classmethod
    def from_array(cls, a) -> "FourVector":
        a = np.asarray(a, dtype=float)
        return cls(a[0], tuple(a[1:4]))

    def square(self) -> float:
        return float(minkowski_dot(self, self))

    def __neg__(self):
        return FourVector.from_array(-self.as_array())


def as_four(a) -> np.ndarray:
    """Return ``a`` as an array whose last axis has length 4."""
    if isinstance(a, FourVector):
        return a.as_array()
    if isinstance(a, OnShellMomentum):
        return a.four_vector()
    arr = np.asarray(a)
    if arr.shape[-1] != 4:
        raise ValueError("expected a four-vector (last axis of length 4)")
    return arr


def lower(a) -> np.ndarray:
    """Lower the index of a (batch of) four-vector(s)."""
    a = as_four(a)
    out = np.array(a, dtype=np.result_type(a, float), copy=True)
    out[..., 0] = -out[..., 0]
    return out


def minkowski_dot(a, b):
    """Minkowski product ``-a0 b0 + avec.bvec`` (bilinear, no conjugation).

    Works on single vectors or broadcast batches along the last axis.
    """
    a = as_four(a)
    b = as_four(b)
    return -a[..., 0] * b[..., 0] + np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def on_shell_energy(spatial, m: float):
    """Return ``sqrt(k^2 + m^2)`` for spatial momentum ``k``.

    Raises
    ------
    ValueError
        If ``m`` is negative.
    """
    if m < 0:
        raise ValueError("mass must be non-negative")
    k = np.asarray(spatial, dtype=float)
    return np.sqrt(np.sum(k * k, axis=-1) + m * m)


@dataclass(frozen=True)
class OnShellMomentum:
    """Momentum on the mass shell with positive energy."""

    mass: float
    spatial: tuple

    def __post_init__(self):
        if self.mass < 0:
            raise ValueError("mass must be non-negative")
        sp = tuple(float(v) for v in self.spatial)
        if len(sp) != 3:
            raise ValueError("spatial momentum must have three components")
        object.__setattr__(self, "spatial", sp)

    @property
    def energy(self) -> float:
        return float(on_shell_energy(self.spatial, self.mass))

    def four_vector(self) -> np.ndarray:
        return np.array([self.energy, *self.spatial])


@dataclass(frozen=True)
class ChargeAssignments:
    """Coupling constant and species masses."""

    e: float = 1.0
    masses: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, m in self.masses.items():
            if m < 0:
                raise ValueError(f"mass of {name!r} must be non-negative")


# ---------------------------------------------------------------- profiles


def _check_pd(a: np.ndarray, dim: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (dim, dim):
        raise ProfileError(f"width matrix must be {dim}x{dim}")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ProfileError("width matrix must be symmetric")
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise ProfileError("width matrix must be positive definite") from None
    return a


def _width(w, dim: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim == 0:
        return float(w) * np.eye(dim)
    if w.ndim == 1:
        return np.diag(w)
    return w


@dataclass(frozen=True)
class GaussianTerm:
    """``weight * exp(-(x - center)^T A (x - center))`` in ``dim`` dimensions."""

    weight: complex
    center: np.ndarray
    width: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        dim = c.size
        a = _check_pd(_width(self.width, dim), dim)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "width", a)
        object.__setattr__(self, "weight", complex(self.weight))
        object.__setattr__(self, "_ainv", np.linalg.inv(a))
        object.__setattr__(self, "_norm", np.pi ** (dim / 2) / np.sqrt(np.linalg.det(a)))

    @property
    def dim(self) -> int:
        return self.center.size

    def value(self, x) -> np.ndarray:
        d = np.asarray(x, dtype=float) - self.center
        return self.weight * np.exp(-np.einsum("...i,ij,...j->...", d, self.width, d))

    def fourier(self, q) -> np.ndarray:
        """Transform with kernel ``exp(-i q.x)`` (Euclidean dot)."""
        q = np.asarray(q, dtype=float)
        quad = np.sum((q @ self._ainv) * q, axis=-1)
        return self.weight * self._norm * np.exp(-0.25 * quad - 1j * (q @ self.center))


class SourceProfile:
    """Base class of the analytic source families."""

    kind: str = "abstract"

    @property
    def is_real(self) -> bool:
        return False


@dataclass(frozen=True)
class GaussianSum(SourceProfile):
    """Spacetime Gaussian superposition ``j(x) = sum_i c_i exp(-(x-x_i)^T A_i (x-x_i))``."""

    terms: tuple
    kind: str = "gaussian_sum"

    def __post_init__(self):
        terms = tuple(self.terms)
        for t in terms:
            if not isinstance(t, GaussianTerm) or t.dim != 4:
                raise ProfileError("GaussianSum terms must be 4D GaussianTerm objects")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls, weight=1.0, center=(0, 0, 0, 0), width=1.0) -> "GaussianSum":
        return cls((GaussianTerm(weight, center, width),))

    @property
    def is_real(self) -> bool:
        return all(abs(t.weight.imag) == 0.0 for t in self.terms)

    def value(self, x) -> np.ndarray:
        x = as_four(x)
        return sum(t.value(x) for t in self.terms) if self.terms else np.zeros(x.shape[:-1])

    def scaled(self, factor: float) -> "GaussianSum":
        return GaussianSum(tuple(GaussianTerm(factor * t.weight, t.center, t.width) for t in self.terms))


@dataclass(frozen=True)
class Static(SourceProfile):
    """Time-independent spatial Gaussian sum ``rho(xvec)``."""

    terms: tuple
    kind: str = "static"

    def __post_init__(self):
        terms = tuple(self.terms)
        for t in terms:
            if not isinstance(t, GaussianTerm) or t.dim != 3:
                raise ProfileError("Static terms must be 3D GaussianTerm objects")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls, weight=1.0, center=(0, 0, 0), width=1.0) -> "Static":
        return cls((GaussianTerm(weight, center, width),))

    @property
    def is_real(self) -> bool:
        return all(abs(t.weight.imag) == 0.0 for t in self.terms)

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return sum(t.value(x) for t in self.terms) if self.terms else np.zeros(x.shape[:-1])

    def fourier(self, k) -> np.ndarray:
        """Spatial transform ``int exp(-i k.x) rho(x) d^3x``."""
        k = np.asarray(k, dtype=float)
        if not self.terms:
            return np.zeros(k.shape[:-1], dtype=complex)
        return sum(t.fourier(k) for t in self.terms)

    def total_charge(self) -> complex:
        return complex(self.fourier(np.zeros(3)))

    def scaled(self, factor: float) -> "Static":
        return Static(tuple(GaussianTerm(factor * t.weight, t.center, t.width) for t in self.terms))


def _check_velocity(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    if not np.linalg.norm(v) < 1.0:
        raise ProfileError("velocity must satisfy |v| < 1")
    return v


@dataclass(frozen=True)
class Travelling(SourceProfile):
    """Profile ``q`` moving rigidly with velocity ``v``: ``J = q(x - v t)(1, v)``."""

    q: Static
    velocity: np.ndarray
    kind: str = "travelling"

    def __post_init__(self):
        object.__setattr__(self, "velocity", _check_velocity(self.velocity))

    def as_two_epoch(self) -> "TwoEpochCurrent":
        return TwoEpochCurrent(self.q, self.velocity, self.q, self.velocity)


@dataclass(frozen=True)
class TwoEpochCurrent(SourceProfile):
    """Profile ``q_plus`` moving with ``v_plus`` for t > 0 and ``q_minus`` with ``v_minus`` for t < 0."""

    q_plus: Static
    v_plus: np.ndarray
    q_minus: Static
    v_minus: np.ndarray
    kind: str = "two_epoch"

    def __post_init__(self):
        object.__setattr__(self, "v_plus", _check_velocity(self.v_plus))
        object.__setattr__(self, "v_minus", _check_velocity(self.v_minus))


def profile_fourier(p: SourceProfile, k) -> np.ndarray:
    """Closed-form Fourier transform of a Gaussian profile.

    Parameters
    ----------
    p : GaussianSum or Static
        For a ``Static`` profile the factor ``2 pi delta(k0)`` is stripped
        and the spatial transform at ``kvec`` is returned.
    k : FourVector or array_like (..., 4)

    Returns
    -------
    ndarray of complex
    """
    k = as_four(k).astype(float)
    if isinstance(p, GaussianSum):
        q = np.concatenate([-k[..., :1], k[..., 1:]], axis=-1)
        if not p.terms:
            return np.zeros(k.shape[:-1], dtype=complex)
        return sum(t.fourier(q) for t in p.terms)
    if isinstance(p, Static):
        return p.fourier(k[..., 1:])
    raise ProfileError(
        f"profile_fourier is defined for gaussian_sum and static profiles, not {p.kind!r}; "
        "use travelling_current_fourier for moving sources")


def travelling_current_fourier(p: SourceProfile, k, pole_offset: float) -> np.ndarray:
    """Four-current transform of a two-epoch travelling source.

    ``J(k) = -i q+(k)(1, v+)/(k.v+ - k0 - i eta) + i q-(k)(1, v-)/(k.v- - k0 + i eta)``

    The finite ``eta`` realises the ``i0`` prescription; the result is the
    exact transform of the current damped by ``exp(-eta |t|)``.

    Returns
    -------
    ndarray, shape (..., 4)
        Upper-index components.
    """
    if pole_offset <= 0:
        raise ValueError("pole_offset must be positive")
    if isinstance(p, Travelling):
        p = p.as_two_epoch()
    if not isinstance(p, TwoEpochCurrent):
        raise ProfileError("travelling_current_fourier needs a two_epoch or travelling profile")
    k = as_four(k).astype(float)
    kv = k[..., 1:]
    out = np.zeros(k.shape[:-1] + (4,), dtype=complex)
    for q, v, sgn in ((p.q_plus, p.v_plus, 1.0), (p.q_minus, p.v_minus, -1.0)):
        qk = q.fourier(kv)
        a = kv @ v - k[..., 0]
        amp = -1j * sgn * qk / (a - 1j * sgn * pole_offset)
        u = np.concatenate([[1.0], v])
        out += amp[..., None] * u
    return out


@dataclass(frozen=True)
class ConservedCurrent:
    """Conserved Gaussian current ``J^mu = d_nu (C^{nu mu} g(x))`` with antisymmetric ``C``."""

    c_matrix: np.ndarray
    profile: GaussianSum

    def __post_init__(self):
        c = np.asarray(self.c_matrix, dtype=float)
        if c.shape != (4, 4) or not np.allclose(c, -c.T):
            raise ProfileError("C must be an antisymmetric 4x4 matrix")
        object.__setattr__(self, "c_matrix", c)

    def fourier(self, k) -> np.ndarray:
        k = as_four(k).astype(float)
        g = profile_fourier(self.profile, k)
        kl = lower(k)
        return 1j * (kl @ self.c_matrix) * g[..., None]


@dataclass(frozen=True)
class TransverseStaticCurrent:
    """Divergence-free static current ``Jvec = curl(a g(xvec))``."""

    axis: np.ndarray
    profile: Static

    def __post_init__(self):
        object.__setattr__(self, "axis", np.asarray(self.axis, dtype=float).reshape(3))

    def fourier(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        g = self.profile.fourier(k)
        return 1j * np.cross(k, np.broadcast_to(self.axis, k.shape)) * g[..., None]


@dataclass(frozen=True)
class FourPotential:
    """External four-potential ``A_mu`` given component-wise by Gaussian profiles.

    Components carry lower indices. All components share a family: either all
    ``GaussianSum`` (spacetime) or all ``Static``.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != 4:
            raise ProfileError("a four-potential needs four components")
        kinds = {type(c) for c in comps}
        if len(kinds) != 1 or not kinds <= {GaussianSum, Static}:
            raise ProfileError("four-potential components must all be gaussian_sum or all static")
        object.__setattr__(self, "components", comps)

    @property
    def is_static(self) -> bool:
        return isinstance(self.components[0], Static)

    def fourier(self, k) -> np.ndarray:
        """Lower-index transform ``A_mu(k)``; ``k`` is a four-vector (static: spatial 3-vector)."""
        k = np.asarray(k, dtype=float)
        if self.is_static:
            return np.stack([c.fourier(k) for c in self.components], axis=-1)
        return np.stack([profile_fourier(c, k) for c in self.components], axis=-1)


Number = Union[int, float, complex]


def gaussian_sum(terms: Sequence[tuple]) -> GaussianSum:
    """Build a ``GaussianSum`` from ``(weight, center, width)`` tuples."""
    return GaussianSum(tuple(GaussianTerm(*t) for t in terms))


def static(terms: Sequence[tuple]) -> Static:
    """Build a ``Static`` profile from ``(weight, center, width)`` tuples."""
    return Static(tuple(GaussianTerm(*t) for t in terms))
