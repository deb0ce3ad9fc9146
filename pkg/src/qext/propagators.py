"""Klein-Gordon, Dirac and photon propagators in momentum and position space.

Position-space values are the smooth (Bessel/Hankel/MacDonald) parts off
the light cone; the ``delta(x^2)`` shell is reported separately as a
coefficient. Momentum-space ``i0`` prescriptions use a finite pole offset.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from .core import METRIC, as_four, lower, minkowski_dot
from .gamma_algebra import GammaRepresentation, slash

LIGHT_CONE_TOL = 1e-10


class PropagatorKind(Enum):
    WIGHTMAN_PLUS = "wightman_plus"
    WIGHTMAN_MINUS = "wightman_minus"
    PAULI_JORDAN = "pauli_jordan"
    RETARDED = "retarded"
    ADVANCED = "advanced"
    CAUSAL = "causal"

    @classmethod
    def parse(cls, kind) -> "PropagatorKind":
        if isinstance(kind, cls):
            return kind
        try:
            return cls(str(kind).lower())
        except ValueError:
            raise ValueError(f"unknown propagator kind {kind!r}") from None


class LightConeError(ValueError):
    """Position-space evaluation requested on (or too near) the light cone."""


@dataclass
class SmoothPartValue:
    """Smooth part of a distribution plus the coefficient of ``delta(x^2)``."""

    value: complex
    delta_coefficient: float


def _on_shell_weight(kind, p, m, rtol=1e-12):
    p0 = p[..., 0]
    eps = np.sqrt(np.sum(p[..., 1:] ** 2, axis=-1) + m * m)
    near = np.abs(np.abs(p0) - eps) <= rtol * np.maximum(eps, 1.0)
    w = np.where(eps > 0, 1j * np.pi / np.where(eps > 0, eps, 1.0), 0.0)
    if kind is PropagatorKind.WIGHTMAN_PLUS:
        return np.where(near & (p0 > 0), w, 0.0)
    if kind is PropagatorKind.WIGHTMAN_MINUS:
        return np.where(near & (p0 < 0), -w, 0.0)
    return np.where(near, np.sign(p0) * w, 0.0)


def kg_momentum(kind, p, m: float, pole_offset: float = 1e-6):
    """Momentum-space Klein-Gordon propagator.

    Causal uses ``1/(p^2+m^2-i eta)``; retarded/advanced use
    ``1/(p^2+m^2 -/+ i eta sgn p0)``. The Wightman functions and the
    Pauli-Jordan function are supported on the mass shell; we return the
    coefficient of ``delta(p0 -/+ eps)``, namely ``+i pi/eps`` (plus),
    ``-i pi/eps`` (minus) and their sum (Pauli-Jordan), and 0 off shell.
    """
    if pole_offset <= 0:
        raise ValueError("pole_offset must be positive")
    kind = PropagatorKind.parse(kind)
    p = as_four(p).astype(float)
    den = minkowski_dot(p, p) + m * m
    if kind is PropagatorKind.CAUSAL:
        return 1.0 / (den - 1j * pole_offset)
    if kind is PropagatorKind.RETARDED:
        return 1.0 / (den - 1j * pole_offset * np.sign(p[..., 0]))
    if kind is PropagatorKind.ADVANCED:
        return 1.0 / (den + 1j * pole_offset * np.sign(p[..., 0]))
    return _on_shell_weight(kind, p, m)


_DELTA = {
    PropagatorKind.WIGHTMAN_PLUS: lambda s: s / (4 * np.pi),
    PropagatorKind.WIGHTMAN_MINUS: lambda s: s / (4 * np.pi),
    PropagatorKind.PAULI_JORDAN: lambda s: s / (2 * np.pi),
    PropagatorKind.RETARDED: lambda s: (s > 0) / (2 * np.pi),
    PropagatorKind.ADVANCED: lambda s: (s < 0) / (2 * np.pi),
    PropagatorKind.CAUSAL: lambda s: np.ones_like(s) / (4 * np.pi),
}


def _kg_position_parts(kind, x, m, derivative=False):
    kind = PropagatorKind.parse(kind)
    x = as_four(x).astype(float)
    x2 = minkowski_dot(x, x)
    scale = x[..., 0] ** 2 + np.sum(x[..., 1:] ** 2, axis=-1)
    if np.any(np.abs(x2) <= LIGHT_CONE_TOL * np.maximum(scale, 1e-300)):
        raise LightConeError("position-space propagators are not pointwise defined on the light cone")
    x0 = x[..., 0]
    sg = np.sign(x0)
    space = x2 > 0
    r = np.sqrt(np.where(space, x2, 1.0))
    s = np.sqrt(np.where(space, 1.0, -x2))

    # spacelike base B = m K1(mr)/(4 pi^2 r)
    if m == 0:
        bval = 1.0 / (4 * np.pi ** 2 * r * r)
        bder = -1.0 / (4 * np.pi ** 2 * r ** 4)
    else:
        bval = m * special.k1(m * r) / (4 * np.pi ** 2 * r)
        bder = -m * m * special.kv(2, m * r) / (8 * np.pi ** 2 * r * r)

    def tl(z):
        if m == 0:
            lead = {"h1": -2j / np.pi, "h2": 2j / np.pi, "j": 0.0}[z]
            v = -lead / (8 * np.pi * s * s)
            return v, v / (s * s)
        f = {"h1": special.hankel1, "h2": special.hankel2, "j": special.jv}[z]
        return (-m * f(1, m * s) / (8 * np.pi * s),
                -m * m * f(2, m * s) / (16 * np.pi * s * s))

    h1, dh1 = tl("h1")
    h2, dh2 = tl("h2")
    jj, dj = tl("j")
    fut = x0 > 0
    zero = np.zeros_like(bval)
    if kind is PropagatorKind.WIGHTMAN_PLUS:
        sv, sd = 1j * bval, 1j * bder
        tv, td = np.where(fut, h2, -h1), np.where(fut, dh2, -dh1)
    elif kind is PropagatorKind.WIGHTMAN_MINUS:
        sv, sd = -1j * bval, -1j * bder
        tv, td = np.where(fut, h1, -h2), np.where(fut, dh1, -dh2)
    elif kind is PropagatorKind.CAUSAL:
        sv, sd = 1j * bval, 1j * bder
        tv, td = h2, dh2
    elif kind is PropagatorKind.PAULI_JORDAN:
        sv, sd = zero, zero
        tv, td = 2 * sg * jj, 2 * sg * dj
    elif kind is PropagatorKind.RETARDED:
        sv, sd = zero, zero
        tv, td = np.where(fut, 2 * jj, 0.0), np.where(fut, 2 * dj, 0.0)
    else:
        sv, sd = zero, zero
        tv, td = np.where(fut, 0.0, 2 * jj), np.where(fut, 0.0, 2 * dj)
    val = np.where(space, sv, tv) + 0j
    der = np.where(space, sd, td) + 0j
    delta = _DELTA[kind](sg)
    return val, der, delta


def kg_position(kind, x, m: float) -> SmoothPartValue:
    """Position-space Klein-Gordon propagator off the light cone.

    Parameters
    ----------
    kind : PropagatorKind or str
    x : FourVector or array_like (..., 4)
    m : float
        Mass (``m = 0`` uses the massless limits).

    Raises
    ------
    LightConeError
        If ``|x^2|`` is below ``LIGHT_CONE_TOL`` times ``t^2 + |xvec|^2``.
    """
    val, _, delta = _kg_position_parts(kind, x, m)
    if np.ndim(val) == 0:
        return SmoothPartValue(complex(val), float(delta))
    return SmoothPartValue(val, np.asarray(delta, dtype=float))


def dirac_propagator(kind, x_or_p, m: float, rep=GammaRepresentation.DIRAC,
                     pole_offset: float | None = None, domain: str = "position"):
    """Dirac propagator ``S = (i gamma.d + m) D``.

    In momentum space (``domain="momentum"``) this is ``(-pslash + m)`` times
    the scalar kernel of the same kind. In position space the derivative is
    applied analytically: ``S = 2i xslash D'(x^2) + m D`` with Bessel
    recurrences for ``D'``.

    Returns
    -------
    ndarray (..., 4, 4)
    """
    if domain == "momentum":
        p = as_four(x_or_p).astype(float)
        ker = kg_momentum(kind, p, m, 1e-6 if pole_offset is None else pole_offset)
        num = -slash(p, rep) + m * np.eye(4)
        return num * np.asarray(ker)[..., None, None]
    if domain != "position":
        raise ValueError("domain must be 'position' or 'momentum'")
    x = as_four(x_or_p).astype(float)
    val, der, _ = _kg_position_parts(kind, x, m)
    return (2j * slash(x, rep) * np.asarray(der)[..., None, None]
            + m * np.eye(4) * np.asarray(val)[..., None, None])


# ------------------------------------------------------------------ photons


_GAUGES = ("dzero", "alpha", "feynman", "landau", "yukawa", "temporal", "coulomb", "fried_yennie")


@dataclass(frozen=True)
class PhotonGauge:
    """Gauge selector; ``alpha`` is used only by the alpha family."""

    name: str
    alpha: float | None = None

    def __post_init__(self):
        if self.name not in _GAUGES:
            raise ValueError(f"unknown photon gauge {self.name!r}")
        if (self.name == "alpha") != (self.alpha is not None):
            raise ValueError("alpha must be given exactly for the alpha family")

    @classmethod
    def parse(cls, text) -> "PhotonGauge":
        if isinstance(text, cls):
            return text
        text = str(text).lower()
        if text.startswith("alpha"):
            return cls("alpha", float(text.split(":", 1)[1]))
        return cls(text)

    def __str__(self):
        return f"alpha:{self.alpha:g}" if self.name == "alpha" else self.name


DZERO = PhotonGauge("dzero")
FEYNMAN = PhotonGauge("feynman")
LANDAU = PhotonGauge("landau")
YUKAWA = PhotonGauge("yukawa")
TEMPORAL = PhotonGauge("temporal")
COULOMB = PhotonGauge("coulomb")
FRIED_YENNIE = PhotonGauge("fried_yennie")


def alpha_family(alpha: float) -> PhotonGauge:
    return PhotonGauge("alpha", float(alpha))


def photon_parts(gauge, k, m: float):
    """Split a photon propagator as ``P/(k^2+m^2-i0) + R``.

    Returns ``(P, R)`` with lower indices, each of shape (..., 4, 4).
    """
    gauge = PhotonGauge.parse(gauge)
    if m < 0:
        raise ValueError("mass must be non-negative")
    if gauge.name in ("dzero", "yukawa") and m <= 0:
        raise ValueError(f"{gauge} gauge requires m > 0")
    if gauge.name in ("coulomb", "fried_yennie") and m != 0:
        raise ValueError(f"{gauge} gauge is defined for massless photons")
    k = as_four(k).astype(float)
    kl = lower(k)
    ksq = minkowski_dot(k, k)[..., None, None]
    kk = kl[..., :, None] * kl[..., None, :]
    g = np.broadcast_to(METRIC, kk.shape).astype(complex)
    R = np.zeros(kk.shape, dtype=complex)
    n = gauge.name
    if n == "feynman" or (n == "alpha" and gauge.alpha == 1.0):
        return g.copy(), R
    if n == "dzero":
        return g + kk / m ** 2, R
    if n == "alpha":
        a = gauge.alpha
        return g + (1 - a) * kk / (a * ksq + m * m), R
    if n == "landau":
        return g - kk / ksq, R
    if n == "fried_yennie":
        return g + 2 * kk / ksq, R
    kv = k[..., 1:]
    k3 = np.sum(kv * kv, axis=-1)[..., None, None]
    P = np.zeros(kk.shape, dtype=complex)
    if n == "temporal":
        k0sq = (k[..., 0] ** 2)[..., None, None]
        P[..., 1:, 1:] = np.eye(3) - kk[..., 1:, 1:] / k0sq
        return P, R
    if n == "coulomb" and np.any(k3 == 0):
        raise ValueError("Coulomb gauge propagator is singular at kvec = 0")
    denom = k3 + (m * m if n == "yukawa" else 0.0)
    P[..., 1:, 1:] = np.eye(3) - kk[..., 1:, 1:] / denom
    R[..., 0, 0] = -1.0 / denom[..., 0, 0]
    return P, R


def photon_momentum(gauge, k, m: float, pole_offset: float = 1e-6) -> np.ndarray:
    """Photon propagator ``D_{mu nu}(k)`` (lower indices) in the requested gauge."""
    if pole_offset <= 0:
        raise ValueError("pole_offset must be positive")
    P, R = photon_parts(gauge, k, m)
    k = as_four(k).astype(float)
    den = (minkowski_dot(k, k) + m * m - 1j * pole_offset)[..., None, None]
    return P / den + R


def gauge_shift_vector(gauge, k, m: float, pole_offset: float = 1e-6) -> np.ndarray:
    """``f_mu`` with ``D^gauge = D^Feynman + k_mu f_nu + f_mu k_nu``.

    Available for the Coulomb, Yukawa and temporal gauges.
    """
    gauge = PhotonGauge.parse(gauge)
    k = as_four(k).astype(float)
    kl = lower(k)
    den = minkowski_dot(k, k) + m * m - 1j * pole_offset
    k3 = np.sum(k[..., 1:] ** 2, axis=-1)
    f = np.zeros(k.shape, dtype=complex)
    if gauge.name in ("coulomb", "yukawa"):
        d = 2 * den * (k3 + (m * m if gauge.name == "yukawa" else 0.0))
        f[..., 0] = kl[..., 0] / d
        f[..., 1:] = -kl[..., 1:] / d[..., None]
        return f
    if gauge.name == "temporal":
        k0 = kl[..., 0]
        f[..., 0] = 1.0 / (2 * den * k0)
        f[..., 1:] = -kl[..., 1:] / (2 * den * k0 * k0)[..., None]
        return f
    raise ValueError(f"no shift vector tabulated for gauge {gauge}")
