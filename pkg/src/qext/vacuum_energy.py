"""Renormalized one-loop vacuum-energy functions and second-order energies.

All four species share the Feynman-parameter form
``int_0^1 w(v) log(1 + a (1 - v^2) - i0) dv`` with ``a = k^2/(4 m^2)`` and
``log(t - i0) = log|t| - i pi theta(-t)``.
"""
from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .core import GaussianSum, FourPotential, Static, profile_fourier
from .quadrature import (QuadratureError, gauss_legendre, once_subtracted_dispersion,
                         tanh_sinh, tanh_sinh_rule, twice_subtracted_dispersion)

FOUR_PI_SQ = (4 * np.pi) ** 2


class LoopSpecies(Enum):
    NEUTRAL_SCALAR = "neutral_scalar"
    CHARGED_BOSON = "charged_boson"
    DIRAC_FERMION = "dirac_fermion"
    MAJORANA = "majorana"

    @classmethod
    def parse(cls, s) -> "LoopSpecies":
        if isinstance(s, cls):
            return s
        try:
            return cls(str(s).lower())
        except ValueError:
            raise ValueError(f"unknown loop species {s!r}") from None


class LoopMethod(Enum):
    CLOSED_FORM = "closed_form"
    FEYNMAN_PARAMETER = "feynman_parameter"
    DISPERSION = "dispersion"
    EUCLIDEAN_BRANCH = "euclidean_branch"

    @classmethod
    def parse(cls, s) -> "LoopMethod":
        if isinstance(s, cls):
            return s
        try:
            return cls(str(s).lower())
        except ValueError:
            raise ValueError(f"unknown loop method {s!r}") from None


# ------------------------------------------------------------ v-integrals

_SERIES_RADIUS = 0.05
_N_SERIES = 40


def _moments(n_max: int):
    """``c_n = int_0^1 (1-v^2)^n dv`` for n = 0..n_max."""
    c = [1.0]
    for n in range(1, n_max + 2):
        c.append(c[-1] * 2 * n / (2 * n + 1))
    return np.array(c)


_C = _moments(_N_SERIES + 1)


def _log_integrals_series(a: float):
    """``(L0, L2)`` from the Taylor series of ``log(1 + a(1-v^2))`` for small ``|a|``."""
    l0 = l2 = 0.0
    p = 1.0
    for n in range(1, _N_SERIES + 1):
        p *= -a
        coef = -p / n
        l0 += coef * _C[n]
        l2 += coef * (_C[n] - _C[n + 1])
    return l0, l2


def _log_integrals_closed(a: float):
    """``L0 = int log(1+a(1-v^2)-i0)``, ``L2 = int v^2 log(...)`` over ``[0, 1]``.

    With ``r^2 = (1+a)/a``: ``L0 = G - 2`` and ``L2 = r^2 G/3 - 2/9 - 2 r^2/3``
    where ``G`` is ``r log((r+1)/(r-1))`` continued to the three branches.
    """
    if a == 0:
        return 0.0, 0.0
    if abs(a) < _SERIES_RADIUS:
        return _log_integrals_series(a)
    r2 = (1 + a) / a
    if a > 0:
        r = math.sqrt(r2)
        G = complex(r * math.log((r + 1) / (r - 1)))
    elif a > -1:
        rho = math.sqrt(-r2)
        G = complex(2 * rho * math.atan(1 / rho))
    elif a == -1:
        G = 0j
    else:
        r = math.sqrt(r2)
        G = r * complex(math.log((1 + r) / (1 - r)), -math.pi)
    return G - 2, r2 * G / 3 - 2 / 9 - 2 * r2 / 3


def _combine(species: LoopSpecies, a: float, L0, L2, m: float, e: float):
    if species is LoopSpecies.NEUTRAL_SCALAR:
        return L0 / (4 * FOUR_PI_SQ)
    if species is LoopSpecies.CHARGED_BOSON:
        return e * e * L2 / (2 * FOUR_PI_SQ)
    if species is LoopSpecies.DIRAC_FERMION:
        return e * e * (L0 - L2) / FOUR_PI_SQ
    return -m * m / FOUR_PI_SQ * (0.5 * L0 + 0.5 * a * (L0 - L2))


def _weight(species: LoopSpecies, a: float, m: float, e: float):
    """Feynman-parameter weight ``w(v)`` multiplying the logarithm."""
    if species is LoopSpecies.NEUTRAL_SCALAR:
        return lambda v: np.full_like(v, 1 / (4 * FOUR_PI_SQ))
    if species is LoopSpecies.CHARGED_BOSON:
        return lambda v: e * e * v * v / (2 * FOUR_PI_SQ)
    if species is LoopSpecies.DIRAC_FERMION:
        return lambda v: e * e * (1 - v * v) / FOUR_PI_SQ
    return lambda v: -m * m / FOUR_PI_SQ * (0.5 + 0.5 * a * (1 - v * v))


def _threshold_v(a: float) -> float | None:
    """Zero of ``1 + a(1-v^2)`` in ``(0, 1)``; exists only for ``a < -1``."""
    if a < -1:
        return math.sqrt(1 + 1 / a)
    return None


def _feynman_parameter(species, a, m, e, tol=1e-13):
    w = _weight(species, a, m, e)

    def integrand(v):
        t = 1 + a * (1 - v * v)
        return w(v) * (np.log(np.abs(t)) - 1j * np.pi * (t < 0))

    v0 = _threshold_v(a)
    pieces = [(0.0, 1.0)] if v0 is None else [(0.0, v0), (v0, 1.0)]
    total = 0j
    for lo, hi in pieces:
        total += tanh_sinh(integrand, lo, hi, tol=tol).value
    return complex(total)


def _euclidean(species, a, m, e):
    # real logarithm only; nodes on 16 panels with the log mass term resolved
    w = _weight(species, a, m, e)
    v, wv = gauss_legendre(0.0, 1.0, 24, 16)
    return complex(np.sum(wv * w(v) * np.log(1 + a * (1 - v * v))))


def loop_imaginary_part(species, k2: float, m: float, e: float = 1.0) -> float:
    """Analytic ``Im`` of the renormalized loop function.

    Zero above the threshold ``k^2 = -4 m^2``; below it, with
    ``v0 = sqrt(1 - 4m^2/(-k^2))``:
    scalar ``-pi v0/(4(4pi)^2)``; charged boson ``-e^2 pi v0^3/(6(4pi)^2)``;
    Dirac ``-e^2 pi (v0 - v0^3/3)/(4pi)^2``; Majorana
    ``pi m^2/(4pi)^2 (v0/2 + a(v0 - v0^3/3)/2)``.
    """
    species = LoopSpecies.parse(species)
    if m <= 0:
        raise ValueError("m must be positive")
    a = k2 / (4 * m * m)
    v0 = _threshold_v(a)
    if v0 is None:
        return 0.0
    if species is LoopSpecies.NEUTRAL_SCALAR:
        return -np.pi * v0 / (4 * FOUR_PI_SQ)
    if species is LoopSpecies.CHARGED_BOSON:
        return -e * e * np.pi * v0 ** 3 / (6 * FOUR_PI_SQ)
    if species is LoopSpecies.DIRAC_FERMION:
        return -e * e * np.pi * (v0 - v0 ** 3 / 3) / FOUR_PI_SQ
    return np.pi * m * m / FOUR_PI_SQ * (0.5 * v0 + 0.5 * a * (v0 - v0 ** 3 / 3))


def majorana_slope(m: float) -> float:
    """``d pi/d k^2`` at 0 for the Majorana loop function: ``-1/(12 (4pi)^2)``."""
    return -1.0 / (12 * FOUR_PI_SQ)


def _dispersion(species, k2, m, e, tol=1e-11):
    thr = -4 * m * m
    im = lambda s: loop_imaginary_part(species, s, m, e)
    if species is LoopSpecies.MAJORANA:
        re = twice_subtracted_dispersion(im, thr, k2, majorana_slope(m), tol)
    else:
        re = once_subtracted_dispersion(im, thr, k2, tol)
    return complex(re, loop_imaginary_part(species, k2, m, e))


def loop_function(species, method, k2: float, m: float, e: float = 1.0) -> complex:
    """Renormalized vacuum-energy function of one species.

    Parameters
    ----------
    species : LoopSpecies or str
    method : LoopMethod or str
        ``closed_form`` (per-branch elementary functions), ``feynman_parameter``
        (tanh-sinh quadrature of the complex-log integrand),
        ``dispersion`` (real part from the imaginary part) or
        ``euclidean_branch`` (real-log integral, ``k2 > 0`` only).
    k2 : float
        Minkowski square ``k^2`` (metric -+++).
    e : float
        Coupling; multiplies the charged species as ``e^2``.

    Raises
    ------
    ValueError
        If ``m <= 0`` or the Euclidean branch is asked for ``k2 <= 0``.
    """
    species = LoopSpecies.parse(species)
    method = LoopMethod.parse(method)
    if m <= 0:
        raise ValueError("m must be positive")
    k2 = float(k2)
    a = k2 / (4 * m * m)
    if method is LoopMethod.EUCLIDEAN_BRANCH:
        if k2 <= 0:
            raise ValueError("the Euclidean branch requires k2 > 0")
        return _euclidean(species, a, m, e)
    if k2 == 0:
        return 0j
    if method is LoopMethod.CLOSED_FORM:
        L0, L2 = _log_integrals_closed(a)
        return complex(_combine(species, a, L0, L2, m, e))
    if method is LoopMethod.FEYNMAN_PARAMETER:
        return _feynman_parameter(species, a, m, e)
    return _dispersion(species, k2, m, e)


def loop_function_array(species, k2, m: float, e: float = 1.0) -> np.ndarray:
    """Vectorised closed form over an array of ``k^2`` values."""
    k2 = np.asarray(k2, dtype=float)
    out = np.empty(k2.shape, dtype=complex)
    for idx, v in np.ndenumerate(k2):
        out[idx] = loop_function(species, LoopMethod.CLOSED_FORM, v, m, e)
    return out


def boson_fermion_consistency(k2: float, m: float, e: float = 1.0) -> float:
    """``|2 Pi_b + Pi_f - 4 e^2 pi|`` from the closed forms (complex modulus)."""
    cf = LoopMethod.CLOSED_FORM
    pb = loop_function(LoopSpecies.CHARGED_BOSON, cf, k2, m, e)
    pf = loop_function(LoopSpecies.DIRAC_FERMION, cf, k2, m, e)
    ps = loop_function(LoopSpecies.NEUTRAL_SCALAR, cf, k2, m, e)
    return abs(2 * pb + pf - 4 * e * e * ps)


# ------------------------------------------------ second-order energies


class _LoopTable:
    """Closed-form loop function evaluated on arrays of ``k^2`` (cached per value)."""

    def __init__(self, species, m, e):
        self.species, self.m, self.e = species, m, e

    def __call__(self, k2):
        k2 = np.asarray(k2, dtype=float)
        flat = k2.reshape(-1)
        uniq, inv = np.unique(flat, return_inverse=True)
        vals = np.array([loop_function(self.species, LoopMethod.CLOSED_FORM, x, self.m, self.e)
                         for x in uniq])
        return vals[inv].reshape(k2.shape)


class PureGaugePotential:
    """``A_mu = d_mu chi``; its field tensor vanishes identically."""

    def __init__(self, chi):
        if not isinstance(chi, (GaussianSum, Static)):
            raise TypeError("chi must be a GaussianSum or Static profile")
        self.chi = chi

    @property
    def is_static(self) -> bool:
        return isinstance(self.chi, Static)

    def fourier(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if self.is_static:
            g = self.chi.fourier(k)[..., None]
            return np.concatenate([np.zeros_like(g), 1j * k * g], -1)
        kl = k * np.array([-1.0, 1, 1, 1])
        return 1j * kl * profile_fourier(self.chi, k)[..., None]


def _field_contraction(A_lower, k):
    """``conj(F_{mu nu}) F^{mu nu} = 2 (k^2 |A|^2 - |k.A|^2)`` for ``F = i(k_mu A_nu - k_nu A_mu)``."""
    eta = np.array([-1.0, 1, 1, 1])
    k2 = np.sum(eta * k * k, -1)
    a2 = np.sum(eta * np.abs(A_lower) ** 2, -1)
    ka = np.sum(k * A_lower, -1)
    return 2 * (k2 * a2 - np.abs(ka) ** 2)


def _perturbation_density(perturbation, species):
    """Return ``(weight(k) on four-vectors, prefactor)`` of the ``E_2`` integrand."""
    if species in (LoopSpecies.NEUTRAL_SCALAR, LoopSpecies.MAJORANA):
        if not isinstance(perturbation, GaussianSum):
            raise TypeError("scalar and Majorana loops need a GaussianSum mass-like perturbation")
        return (lambda k: np.abs(profile_fourier(perturbation, k)) ** 2), 1.0
    if isinstance(perturbation, (FourPotential, PureGaugePotential)) and not perturbation.is_static:
        return (lambda k: _field_contraction(perturbation.fourier(k), k)), -1.0
    raise TypeError("charged loops need a spacetime FourPotential")


def _profiles_of(perturbation):
    if isinstance(perturbation, GaussianSum):
        return [perturbation]
    if isinstance(perturbation, FourPotential):
        return list(perturbation.components)
    if isinstance(perturbation, PureGaugePotential):
        return [perturbation.chi]
    raise TypeError("unsupported perturbation")


def _k_scale(profiles):
    lam = 1e-300
    shift = 0.0
    for p in profiles:
        for t in p.terms:
            lam = max(lam, float(np.linalg.eigvalsh(t.width).max()))
            shift = max(shift, float(np.linalg.norm(t.center)))
    return math.sqrt(lam), shift


def _sphere_rule(n):
    c, wc = np.polynomial.legendre.leggauss(n)
    phi = 2 * np.pi * np.arange(2 * n) / (2 * n)
    C, P = np.meshgrid(c, phi, indexing="ij")
    S = np.sqrt(1 - C * C)
    dirs = np.stack([S * np.cos(P), S * np.sin(P), C], -1).reshape(-1, 3)
    w = (wc[:, None] * np.full(phi.size, np.pi / n)[None, :]).reshape(-1)
    return dirs, w


def _spectral_e2(dens, loop, m, scale, n_mu=48, n_eta=64, n_ang=16, factor=9.0):
    """Hyperbolic reduction ``E = int dmu pi(+-mu^2) rho_+-(mu)``.

    Timelike ``k = mu(+-cosh eta, sinh eta n)`` and spacelike
    ``k = mu(sinh eta, cosh eta n)``; the loop function depends on ``mu``
    only, so the threshold ``mu = 2m`` is a panel edge.
    """
    K = factor * scale
    dirs, wd = _sphere_rule(n_ang)
    total = 0j
    # timelike: both cones; eta up to where mu sinh(eta) exceeds K
    edges = [0.0, 2 * m, K] if 2 * m < K else [0.0, K]
    for lo, hi in zip(edges[:-1], edges[1:]):
        mu, wmu = tanh_sinh_rule(lo, hi, level=5, tmax=3.0)
        for sgn in (1.0, -1.0):
            rho = np.zeros(mu.size, dtype=complex)
            for i, (x, wx) in enumerate(zip(mu, wmu)):
                eta_max = math.acosh(max(K / x, 1.0)) if x < K else 0.0
                if eta_max <= 0:
                    continue
                eta, we = gauss_legendre(0.0, eta_max, n_eta // 4, 4)
                ch, sh = np.cosh(eta), np.sinh(eta)
                k = np.concatenate([
                    np.broadcast_to((sgn * x * ch)[:, None, None], (eta.size, dirs.shape[0], 1)),
                    x * sh[:, None, None] * dirs[None, :, :]], -1)
                vals = dens(k)
                rho[i] = x ** 3 * np.sum(we[:, None] * sh[:, None] ** 2 * wd[None, :] * vals)
            total += np.sum(wmu * loop(-mu * mu) * rho)
    # spacelike
    mu, wmu = gauss_legendre(0.0, K, n_mu // 6, 6)
    rho = np.zeros(mu.size, dtype=complex)
    for i, x in enumerate(mu):
        eta_max = math.asinh(max(K / x, 0.0))
        eta, we = gauss_legendre(-eta_max, eta_max, n_eta // 4, 8)
        ch, sh = np.cosh(eta), np.sinh(eta)
        k = np.concatenate([
            np.broadcast_to((x * sh)[:, None, None], (eta.size, dirs.shape[0], 1)),
            x * ch[:, None, None] * dirs[None, :, :]], -1)
        rho[i] = x ** 3 * np.sum(we[:, None] * ch[:, None] ** 2 * wd[None, :] * dens(k))
    total += np.sum(wmu * loop(mu * mu) * rho)
    return total


def _tensor_e2(dens, loop, m, scale, n_r=40, n_ang=16, level=5, factor=9.0):
    """Tensor-product rule: spatial product grid times k0 tanh-sinh panels split at threshold."""
    K = factor * scale
    dirs, wd = _sphere_rule(n_ang)
    r, wr = gauss_legendre(0.0, K, n_r // 5, 5)
    total = 0j
    for x, wx in zip(r, wr):
        kt = math.sqrt(x * x + 4 * m * m)  # k^2 = -4m^2 at |k0| = kt
        cuts = sorted({-K - kt, -kt, -x, 0.0, x, kt, K + kt})
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            k0, w0 = tanh_sinh_rule(lo, hi, level=level, tmax=3.0)
            k2 = x * x - k0 * k0
            kk = np.concatenate([np.broadcast_to(k0[:, None, None], (k0.size, dirs.shape[0], 1)),
                                 x * np.broadcast_to(dirs[None], (k0.size,) + dirs.shape)], -1)
            vals = dens(kk)
            total += wx * x * x * np.sum(w0[:, None] * wd[None, :] * loop(k2)[:, None] * vals)
    return total


def second_order_vacuum_energy(perturbation, species, m: float, e: float = 1.0,
                               method: str = "spectral", **opts) -> complex:
    """Second-order renormalized vacuum energy.

    Scalar and Majorana loops: ``int pi(k^2) |kappa(k)|^2 d^4k/(2pi)^4`` for a
    mass-like ``GaussianSum`` ``kappa``. Charged loops:
    ``-int Pi(k^2) conj(F) F d^4k/(2pi)^4`` for a spacetime four-potential.

    Parameters
    ----------
    method : {"spectral", "tensor"}
        Hyperbolic (mass-shell) reduction or the tensor-product rule.
    """
    species = LoopSpecies.parse(species)
    if m <= 0:
        raise ValueError("m must be positive")
    profiles = _profiles_of(perturbation)
    if all(not p.terms for p in profiles):
        return 0j
    dens, pref = _perturbation_density(perturbation, species)
    scale, _ = _k_scale(profiles)
    loop = _LoopTable(species, m, e)
    if method == "spectral":
        val = _spectral_e2(dens, loop, m, scale, **opts)
    elif method == "tensor":
        val = _tensor_e2(dens, loop, m, scale, **opts)
    else:
        raise ValueError("method must be 'spectral' or 'tensor'")
    if not np.isfinite(val):
        raise QuadratureError("second-order vacuum energy quadrature produced a non-finite value")
    return complex(pref * val / (2 * np.pi) ** 4)


def static_second_order_energy_shift(field, species, m: float, e: float = 1.0,
                                     n_r: int = 96, n_ang: int = 24) -> float:
    """Renormalized static energy shift ``-+ e^2 int Pi(p^2) conj(F) F d^3p/(2pi)^3``.

    Minus for charged bosons, plus for Dirac fermions, with ``Pi`` the
    species' loop function (which already carries ``e^2``).
    """
    species = LoopSpecies.parse(species)
    if species not in (LoopSpecies.CHARGED_BOSON, LoopSpecies.DIRAC_FERMION):
        raise ValueError("static energy shifts are defined for charged bosons and Dirac fermions")
    if m <= 0:
        raise ValueError("m must be positive")
    if not getattr(field, "is_static", False):
        raise TypeError("field must be a static four-potential")
    profiles = _profiles_of(field)
    if all(not p.terms for p in profiles):
        return 0.0
    scale, shift = _k_scale(profiles)
    K = 9.0 * scale
    dirs, wd = _sphere_rule(n_ang)
    r, wr = gauss_legendre(0.0, K, max(2, (n_r + int(4 * K * shift)) // 8), 8)
    pts = r[:, None, None] * dirs[None, :, :]
    A = field.fourier(pts)
    k4 = np.concatenate([np.zeros(pts.shape[:-1] + (1,)), pts], -1)
    ff = _field_contraction(A, k4)
    loop = _LoopTable(species, m, e)(r * r)
    val = np.sum(wr[:, None] * (r * r)[:, None] * wd[None, :] * loop[:, None] * ff)
    sign = -1.0 if species is LoopSpecies.CHARGED_BOSON else 1.0
    return float(np.real(sign * e * e * val / (2 * np.pi) ** 3))


__all__ = [
    "LoopSpecies", "LoopMethod", "loop_function", "loop_function_array", "loop_imaginary_part",
    "boson_fermion_consistency", "majorana_slope", "second_order_vacuum_energy",
    "static_second_order_energy_shift", "PureGaugePotential",
]
