"""Exact scattering data for linear sources and external four-currents.

Exponent convention: ``<Omega|S Omega> = exp(i W)`` with
``W = 1/2 int conj(J) D J d^4k/(2pi)^4``; ``Im W >= 0`` and the vacuum
persistence probability is ``exp(-2 Im W)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .core import (GaussianSum, OnShellMomentum, ConservedCurrent, ProfileError, Static,
                   TransverseStaticCurrent, Travelling, TwoEpochCurrent, lower,
                   on_shell_energy, profile_fourier)
from .propagators import FEYNMAN, PhotonGauge, photon_parts
from .quadrature import (cross_correlation_terms, gauss_legendre, gaussian_density,
                         kernel_rule, oriented_ball_integral, position_kernel_energy, spherical_rule, yukawa_pair_energy)

TWO_PI3 = (2 * np.pi) ** 3


class ConservationError(ValueError):
    """Current is not conserved within tolerance."""


class IRClassification(Enum):
    FINITE = "finite"
    DIVERGENT_CHARGE_MISMATCH = "divergent_charge_mismatch"
    DIVERGENT_VELOCITY_CHANGE = "divergent_velocity_change"

    @property
    def is_finite(self) -> bool:
        return self is IRClassification.FINITE


@dataclass
class CoherentScatteringData:
    """Displacement amplitudes plus the vacuum exponent ``W``.

    ``displacement(k, label)`` evaluates the amplitude of mode ``(k, label)``;
    ``samples`` caches it on requested momenta.
    """

    model: str
    exponent: complex
    displacement: Callable | None = None
    samples: dict = field(default_factory=dict)

    @property
    def persistence_probability(self) -> float:
        if not np.isfinite(self.exponent.imag):
            return 0.0
        return float(np.exp(-2 * self.exponent.imag))

    @property
    def vacuum_amplitude(self) -> complex:
        if not np.isfinite(self.exponent.imag):
            return 0j
        return complex(np.exp(1j * self.exponent))

    def sample(self, momenta, labels=(None,)):
        for k in momenta:
            kk = tuple(float(v) for v in np.asarray(k, dtype=float).reshape(3))
            for lab in labels:
                self.samples[(kk, lab)] = complex(self.displacement(np.array(kk), lab))
        return self.samples


# ------------------------------------------------------ 4D exponent engine


@dataclass(frozen=True)
class Resolution:
    """Quadrature orders of the exponent engine."""

    n_r: int = 72
    r_panels: int = 8
    n_theta: int = 24
    n_phi: int = 24
    n_u: int = 10
    u_panels: int = 5
    chunk: int = 512
    width_factor: float = 9.0


def _gaussian_scale(profiles) -> tuple[float, float]:
    """``(sqrt of the largest width eigenvalue, largest center norm)`` over the terms."""
    lam, shift = 1e-300, 0.0
    for p in profiles:
        for t in p.terms:
            lam = max(lam, float(np.linalg.eigvalsh(t.width).max()))
            shift = max(shift, float(np.linalg.norm(t.center)))
    return math.sqrt(lam), shift


def _sum_chunks(fn, n, chunk, threads):
    bounds = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda b: fn(*b), bounds))
    else:
        parts = [fn(*b) for b in bounds]
    return sum(parts)  # fixed order, deterministic


def _pv_exponent(pole_fn, reg_fn, m: float, scale: float, shift: float,
                 res: Resolution = Resolution(), threads: int = 1) -> complex:
    """``1/2 int [g(k)/(k^2+m^2-i0) + r(k)] d^4k/(2pi)^4`` by Sochocki splitting.

    ``pole_fn`` and ``reg_fn`` take arrays of four-vectors (..., 4). Per
    spatial node the k0 principal value uses the partial fractions
    ``1/(eps^2-k0^2) = (1/2eps)(1/(eps-k0) + 1/(eps+k0))`` folded about each
    pole; the delta part gives the on-shell term.
    """
    T = res.width_factor * scale
    n_r = res.n_r + int(4 * T * shift)
    pts, w = spherical_rule(T, n_r, res.n_theta, res.n_phi, r_panels=res.r_panels)
    s, ws = gauss_legendre(0.0, 1.0, max(2, res.n_u), res.u_panels)
    x0, w0 = gauss_legendre(-T, T, max(2, res.n_u), 2 * res.u_panels)

    def chunk(i0, i1):
        kv = pts[i0:i1]
        wk = w[i0:i1]
        eps = np.sqrt(np.sum(kv * kv, -1) + m * m)
        lo = np.maximum(eps - T, 0.0)
        span = eps + T - lo
        u = lo[:, None] + span[:, None] * s[None, :]
        wu = span[:, None] * ws[None, :]

        def g(k0):
            k = np.concatenate([k0[..., None], np.broadcast_to(kv[:, None, :], k0.shape + (3,))], -1)
            return pole_fn(k)

        fold = 0.0
        for a, sign in ((eps, -1.0), (-eps, 1.0)):
            diff = g(a[:, None] + u) - g(a[:, None] - u)
            fold = fold + sign * np.sum(wu * diff / u, axis=1)
        kfull = np.concatenate([np.zeros((len(kv), 1)), kv], -1)
        on = (pole_fn(kfull + np.outer(eps, [1, 0, 0, 0])) + pole_fn(kfull - np.outer(eps, [1, 0, 0, 0])))
        val = fold / (2 * eps) + 1j * np.pi * on / (2 * eps)
        if reg_fn is not None:
            k0 = np.broadcast_to(x0, (len(kv), x0.size))
            kr = np.concatenate([k0[..., None], np.broadcast_to(kv[:, None, :], k0.shape + (3,))], -1)
            val = val + np.sum(w0 * reg_fn(kr), axis=1)
        return np.sum(wk * val)

    total = _sum_chunks(chunk, len(w), res.chunk, threads)
    return complex(0.5 * total / (2 * np.pi) ** 4)


def _on_shell_integral(fn, m: float, scale: float, shift: float, k_min: float = 0.0,
                       k_max: float | None = None, n_ang: int = 40, tol: float = 1e-13) -> float:
    """``int_{k_min <= |k| <= k_max} fn(kvec) d^3k`` with adaptive radial and product angular rules."""
    c, wc = np.polynomial.legendre.leggauss(n_ang)
    phi = 2 * np.pi * np.arange(2 * n_ang) / (2 * n_ang)
    C, P = np.meshgrid(c, phi, indexing="ij")
    S = np.sqrt(1 - C * C)
    dirs = np.stack([S * np.cos(P), S * np.sin(P), C], -1).reshape(-1, 3)
    wd = (wc[:, None] * np.full(phi.size, 2 * np.pi / phi.size)[None, :]).reshape(-1)
    if k_max is None:
        k_max = 14.0 * scale
    if k_max <= k_min:
        return 0.0

    def radial(r):
        return r * r * np.sum(wd * fn(r * dirs))

    pts = [p for p in np.linspace(k_min, k_max, 9)[1:-1]]
    val, _ = integrate.quad(radial, k_min, k_max, points=pts, epsabs=0.0, epsrel=tol, limit=400)
    return float(val)


# ---------------------------------------------------------- scalar source


def _check_gaussian_source(j):
    if not isinstance(j, GaussianSum):
        raise ProfileError("a spacetime GaussianSum source is required")


def vacuum_persistence_exponent(j: GaussianSum, m: float, res: Resolution = Resolution(),
                                threads: int = 1) -> complex:
    """Exponent ``W = 1/2 int |j(k)|^2/(k^2+m^2-i0) d^4k/(2pi)^4`` of a real Gaussian source.

    The real part is a principal value, the imaginary part the on-shell
    strength ``1/2 int |j(eps,k)|^2/(2eps) d^3k/(2pi)^3``. ``m = 0`` is
    allowed: for a Schwartz source both parts converge.
    """
    _check_gaussian_source(j)
    if m < 0:
        raise ValueError("mass must be non-negative")
    if not j.terms:
        return 0j
    if not j.is_real:
        raise ProfileError("the source must be real-valued")
    scale, shift = _gaussian_scale([j])
    return _pv_exponent(lambda k: np.abs(profile_fourier(j, k)) ** 2, None, m, scale, shift,
                        res, threads)


def on_shell_strength(j: GaussianSum, m: float, k_min: float = 0.0, k_max: float | None = None,
                      tol: float = 1e-13) -> float:
    """``int |j(eps,k)|^2/(2eps) d^3k/(2pi)^3`` over a shell ``k_min <= |k| < k_max``.

    Equals ``2 Im W``.
    """
    _check_gaussian_source(j)
    if not j.terms:
        return 0.0
    scale, shift = _gaussian_scale([j])

    def fn(kv):
        eps = on_shell_energy(kv, m)
        k = np.concatenate([eps[:, None], kv], -1)
        return np.abs(profile_fourier(j, k)) ** 2 / (2 * eps)

    return _on_shell_integral(fn, m, scale, shift, k_min, k_max, tol=tol) / TWO_PI3


def _leg(j, p: OnShellMomentum, incoming: bool) -> complex:
    if not isinstance(p, OnShellMomentum):
        raise TypeError("momenta must be OnShellMomentum instances")
    jk = complex(profile_fourier(j, p.four_vector()))
    if incoming:
        jk = np.conj(jk)
    return -1j * jk / math.sqrt(TWO_PI3 * 2 * p.energy)


def scattering_amplitude(j: GaussianSum, m: float, out: Sequence = (), in_: Sequence = (),
                         exponent: complex | None = None) -> complex:
    """Vacuum factor times ``-i j(eps,k)/sqrt((2pi)^3 2eps)`` per outgoing and the conjugate per incoming leg."""
    _check_gaussian_source(j)
    for p in list(out) + list(in_):
        if not isinstance(p, OnShellMomentum) or abs(p.mass - m) > 1e-12 * max(1.0, m):
            raise ValueError("momenta must be on the mass shell of m")
    if exponent is None:
        exponent = vacuum_persistence_exponent(j, m)
    amp = complex(np.exp(1j * exponent))
    for p in out:
        amp *= _leg(j, p, False)
    for p in in_:
        amp *= _leg(j, p, True)
    return amp


@dataclass
class CrossSectionTable:
    """Cross-sections (densities in the final and initial momenta).

    With a soft cutoff ``delta`` the table also holds the soft vacuum factor
    ``sigma_soft = exp(-S(|k| < delta))`` and the hard table ``sigma_hard``
    so that ``sigma = sigma_soft * sigma_hard``.
    """

    configs: list
    sigma: np.ndarray
    total_strength: float
    delta: float | None = None
    soft_strength: float | None = None
    sigma_soft: float | None = None
    sigma_hard: np.ndarray | None = None


def _legs_squared(j, config):
    out, in_ = config
    val = 1.0
    for p in list(out) + list(in_):
        val *= abs(complex(profile_fourier(j, p.four_vector()))) ** 2 / (TWO_PI3 * 2 * p.energy)
    return val


def cross_section_table(j: GaussianSum, m: float, configs: Sequence, soft_cutoff: float | None = None,
                        tol: float = 1e-13) -> CrossSectionTable:
    """Cross-sections ``exp(-S) prod |j(eps,k)|^2/((2pi)^3 2eps)`` for ``(out, in)`` configurations.

    ``S = int |j(eps,k)|^2/(2eps) d^3k/(2pi)^3``. With ``soft_cutoff`` the
    soft (``|k| < delta``) and hard parts of ``S`` are integrated separately.
    """
    configs = [(list(o), list(i)) for o, i in configs]
    if soft_cutoff is not None:
        hard = [np.linalg.norm(p.spatial) for o, i in configs for p in o + i]
        if hard and soft_cutoff >= min(hard):
            raise ValueError("soft cutoff must lie below every hard momentum")
    S = on_shell_strength(j, m, tol=tol)
    legs = np.array([_legs_squared(j, c) for c in configs])
    table = CrossSectionTable(configs, math.exp(-S) * legs, S)
    if soft_cutoff is not None:
        s_soft = on_shell_strength(j, m, 0.0, soft_cutoff, tol=tol)
        s_hard = on_shell_strength(j, m, soft_cutoff, None, tol=tol)
        table.delta = soft_cutoff
        table.soft_strength = s_soft
        table.sigma_soft = math.exp(-s_soft)
        table.sigma_hard = math.exp(-s_hard) * legs
    return table


def inclusive_cross_section(j: GaussianSum, m: float, hard_out: Sequence, delta: float,
                            tail_tol: float = 1e-12, n_r: int = 48, n_ang: int = 32) -> tuple[float, int]:
    """Poisson sum ``sum_n 1/n! int_soft^n sigma(hard + n soft quanta)``.

    The soft leg integral uses a fixed product rule independent of the
    adaptive one in :func:`cross_section_table`. Returns ``(value, terms)``.
    """
    pts, w = spherical_rule(delta, n_r, n_ang, n_ang, r_panels=4)
    eps = on_shell_energy(pts, m)
    k = np.concatenate([eps[:, None], pts], -1)
    leg = float(np.sum(w * np.abs(profile_fourier(j, k)) ** 2 / (2 * eps)) / TWO_PI3)
    base = math.exp(-on_shell_strength(j, m)) * _legs_squared(j, (list(hard_out), []))
    total, term, n = 0.0, base, 0
    while True:
        total += term
        n += 1
        term = term * leg / n
        if term < tail_tol * total or n > 200:
            break
    return total, n


# -------------------------------------------------------- stationary shift


def stationary_energy_shift(j: Static, m: float, method: str = "momentum") -> float:
    """Ground-energy shift ``-1/2 int int j(x) exp(-m|x-y|)/(4pi|x-y|) j(y)`` of a static source."""
    if not isinstance(j, Static):
        raise ProfileError("stationary_energy_shift needs a Static profile")
    if m <= 0:
        raise ValueError("stationary_energy_shift requires m > 0")
    return -0.5 * yukawa_pair_energy(j, j, m, method=method)


# --------------------------------------------------------- two-epoch GL


def classify_ir(q_plus: Static, v_plus, q_minus: Static, v_minus, m: float,
                tol: float = 1e-12) -> IRClassification:
    """Analytic infrared classification of a two-epoch source."""
    if m > 0:
        return IRClassification.FINITE
    qp, qm = q_plus.total_charge(), q_minus.total_charge()
    sc = max(abs(qp), abs(qm), 1e-300)
    if abs(qp - qm) > tol * sc:
        return IRClassification.DIVERGENT_CHARGE_MISMATCH
    if abs(qp) > tol * sc and np.linalg.norm(np.asarray(v_plus) - np.asarray(v_minus)) > tol:
        return IRClassification.DIVERGENT_VELOCITY_CHANGE
    return IRClassification.FINITE


def two_epoch_displacement(q_plus: Static, v_plus, q_minus: Static, v_minus, m: float, kv):
    """``(q+(k)/(eps - v+.k) - q-(k)/(eps - v-.k))/sqrt(2eps (2pi)^3)``."""
    kv = np.asarray(kv, dtype=float)
    eps = on_shell_energy(kv, m)
    vp, vm = np.asarray(v_plus, dtype=float), np.asarray(v_minus, dtype=float)
    num = q_plus.fourier(kv) / (eps - kv @ vp) - q_minus.fourier(kv) / (eps - kv @ vm)
    return num / np.sqrt(2 * eps * TWO_PI3)


def two_epoch_gl_scattering(q_plus: Static, v_plus, q_minus: Static, v_minus, m: float,
                            tol: float = 1e-13):
    """Gell-Mann-Low scattering data of a two-epoch scalar source.

    Returns ``(CoherentScatteringData, IRClassification)``. The exponent is
    ``(i/2) int |d(k)|^2 d^3k``; divergent cases report ``Im W = inf``.
    """
    if m < 0:
        raise ValueError("mass must be non-negative")
    v_plus = np.asarray(v_plus, dtype=float)
    v_minus = np.asarray(v_minus, dtype=float)
    for v in (v_plus, v_minus):
        if not np.linalg.norm(v) < 1:
            raise ProfileError("velocities must satisfy |v| < 1")
    cls = classify_ir(q_plus, v_plus, q_minus, v_minus, m)
    disp = lambda k, label=None: two_epoch_displacement(q_plus, v_plus, q_minus, v_minus, m, k)
    if not cls.is_finite:
        return CoherentScatteringData("scalar", complex(0.0, np.inf), disp), cls
    scale, shift = _gaussian_scale([q_plus, q_minus])
    if not q_plus.terms and not q_minus.terms:
        return CoherentScatteringData("scalar", 0j, disp), cls
    val = _on_shell_integral(lambda kv: np.abs(disp(kv)) ** 2, m, scale, shift, tol=tol)
    return CoherentScatteringData("scalar", complex(0.0, 0.5 * val), disp), cls


# ------------------------------------------------------------ photons


def _gauge_contractions(gauge, k, J, m):
    """``(conj(J) P J, conj(J) R J)`` for the split ``D = P/(k^2+m^2-i0) + R``.

    Evaluated from invariants rather than 4x4 matrices. ``gauge`` may be
    ``"transversal"``: the massive propagator with the Coulomb projector.
    """
    k0 = k[..., 0]
    kv = k[..., 1:]
    k3 = np.sum(kv * kv, -1)
    ksq = k3 - k0 * k0
    J0 = J[..., 0]
    Jv = J[..., 1:]
    jv2 = np.sum(np.abs(Jv) ** 2, -1)
    j02 = np.abs(J0) ** 2
    a = jv2 - j02
    kvj = np.sum(kv * Jv, -1)
    kj2 = np.abs(kvj - k0 * J0) ** 2
    kvj2 = np.abs(kvj) ** 2
    name = gauge if gauge == "transversal" else gauge.name

    def ratio(num, den):
        # num vanishes wherever den does for conserved currents (light cone, k0 = 0)
        return np.divide(num, den, out=np.zeros_like(num), where=den != 0)

    if name == "feynman" or (name == "alpha" and gauge.alpha == 1.0):
        return a, None
    if name == "dzero":
        return a + kj2 / m ** 2, None
    if name == "alpha":
        return a + (1 - gauge.alpha) * ratio(kj2, gauge.alpha * ksq + m * m), None
    if name == "landau":
        return a - ratio(kj2, ksq), None
    if name == "fried_yennie":
        return a + 2 * ratio(kj2, ksq), None
    if name == "temporal":
        return jv2 - ratio(kvj2, k0 * k0), None
    if name in ("yukawa", "coulomb"):
        return jv2 - kvj2 / (k3 + m * m), -j02 / (k3 + m * m)
    if name == "transversal":
        return jv2 - ratio(kvj2, k3), -j02 / (k3 + m * m)
    raise ValueError(f"unsupported gauge {gauge}")


def photon_scattering_exponent(J, m: float, gauge=FEYNMAN, conservation_tol: float = 1e-8,
                               gauge_check_tol: float | None = 1e-12,
                               res: Resolution = Resolution(), threads: int = 1) -> complex:
    """Photon exponent ``W = 1/2 int conj(J)^mu D_{mu nu} J^nu d^4k/(2pi)^4``.

    Parameters
    ----------
    J : ConservedCurrent or TwoEpochCurrent/Travelling
        For two-epoch currents the Gell-Mann-Low exponent
        ``(i/2) int conj(J) P J (eps,k)/(2eps) d^3k/(2pi)^3`` is returned
        (``Im W = inf`` when infrared divergent).
    gauge : PhotonGauge, str or ``"transversal"``
        ``"transversal"`` is the massive propagator with the massless
        Coulomb projector, used for the ``m -> 0`` limit.
    gauge_check_tol : float or None
        If set, the difference to the Feynman-gauge integrand is checked on
        every grid point against this relative tolerance.

    Raises
    ------
    ConservationError
        If ``k.J`` exceeds ``conservation_tol`` relative to ``|k||J|``.
    """
    if m < 0:
        raise ValueError("mass must be non-negative")
    if gauge != "transversal":
        gauge = PhotonGauge.parse(gauge)
    if isinstance(J, Travelling):
        J = J.as_two_epoch()
    if isinstance(J, TwoEpochCurrent):
        return _two_epoch_photon_exponent(J, m, conservation_tol)
    if not isinstance(J, ConservedCurrent):
        raise ProfileError("photon_scattering_exponent needs a ConservedCurrent or two-epoch current")
    if not J.profile.terms or not np.any(J.c_matrix):
        return 0j
    scale, shift = _gaussian_scale([J.profile])
    check = gauge_check_tol is not None and gauge != "transversal" and gauge != FEYNMAN
    if gauge != "transversal":
        photon_parts(gauge, np.ones(4), m)  # validates the gauge/mass combination

    def currents(k):
        Jk = J.fourier(k)
        kj = np.abs(np.sum(lower(k) * Jk, -1))
        bound = np.linalg.norm(k, axis=-1) * np.linalg.norm(Jk, axis=-1)
        if np.any(kj > conservation_tol * np.maximum(bound, 1e-300)):
            raise ConservationError("current is not conserved on the quadrature grid")
        return Jk

    def pole(k):
        Jk = currents(k)
        g, r = _gauge_contractions(gauge, k, Jk, m)
        if check:
            # D - D_Feynman contracted with J: (g - g_F)/(k^2+m^2) + r must vanish
            a = np.sum(np.abs(Jk[..., 1:]) ** 2, -1) - np.abs(Jk[..., 0]) ** 2
            den = np.sum(k[..., 1:] ** 2, -1) - k[..., 0] ** 2 + m * m
            diff = g - a + (0.0 if r is None else r * den)
            ref = np.sum(np.abs(Jk) ** 2, -1)
            if np.any(np.abs(diff) > gauge_check_tol * np.maximum(ref, 1e-300) * (1 + np.abs(den))):
                raise AssertionError("gauge-difference integrand does not vanish on the grid")
        return g

    has_reg = gauge == "transversal" or gauge.name in ("yukawa", "coulomb")

    def reg(k):
        return _gauge_contractions(gauge, k, J.fourier(k), m)[1]

    return _pv_exponent(pole, reg if has_reg else None, m, scale, shift, res, threads)


def _two_epoch_on_shell_current(J: TwoEpochCurrent, m, kv):
    """Exact on-shell four-current ``i q+(1,v+)/(eps - v+.k) - i q-(1,v-)/(eps - v-.k)``."""
    eps = on_shell_energy(kv, m)
    out = np.zeros(kv.shape[:-1] + (4,), dtype=complex)
    for q, v, sg in ((J.q_plus, J.v_plus, 1.0), (J.q_minus, J.v_minus, -1.0)):
        amp = 1j * sg * q.fourier(kv) / (eps - kv @ v)
        out += amp[..., None] * np.concatenate([[1.0], v])
    return out, eps


def _two_epoch_photon_exponent(J: TwoEpochCurrent, m, conservation_tol):
    qdiff = Static(tuple(J.q_plus.terms) + tuple(t.__class__(-t.weight, t.center, t.width)
                                                 for t in J.q_minus.terms))
    scale, shift = _gaussian_scale([J.q_plus, J.q_minus])
    # conservation: k.J = -i (q+ - q-) on shell; require q+ == q- as functions
    probe = np.random.default_rng(0).normal(size=(64, 3)) * scale
    qsc = np.max(np.abs(J.q_plus.fourier(probe))) + 1e-300
    if np.max(np.abs(qdiff.fourier(probe))) > conservation_tol * qsc:
        raise ConservationError("two-epoch current is conserved only if q+ equals q-")
    cls = classify_ir(J.q_plus, J.v_plus, J.q_minus, J.v_minus, m)
    if not cls.is_finite:
        return complex(0.0, np.inf)

    def fn(kv):
        Jk, eps = _two_epoch_on_shell_current(J, m, kv)
        if m > 0:
            g = np.sum(np.abs(Jk[..., 1:]) ** 2, -1) - np.abs(Jk[..., 0]) ** 2
        else:
            g, _ = _gauge_contractions("transversal", np.concatenate([eps[:, None], kv], -1), Jk, 0.0)
        return g / (2 * eps)

    val = _on_shell_integral(fn, m, scale, shift)
    return complex(0.0, 0.5 * val / TWO_PI3)


# --------------------------------------------------- static current shift


def _curl_pair(A: TransverseStaticCurrent, B: TransverseStaticCurrent, m: float, method: str,
               n_r: int = 96, n_ang: int = 48) -> float:
    """``int int J_A(x) . K_m(x-y) J_B(y)`` for curl currents."""
    if method == "momentum":
        total = 0.0
        for ta in A.profile.terms:
            for tb in B.profile.terms:
                a = TransverseStaticCurrent(A.axis, Static((ta,)))
                b = TransverseStaticCurrent(B.axis, Static((tb,)))
                scale, _ = _gaussian_scale([a.profile, b.profile])

                def fn(k, a=a, b=b):
                    return np.sum(a.fourier(k).conj() * b.fourier(k), -1) / (np.sum(k * k, -1) + m * m)

                total += oriented_ball_integral(fn, 2 * scale * math.sqrt(45.0) * 1.3,
                                                ta.center - tb.center, n_r, n_ang, inner_scale=m).real
        return total / TWO_PI3
    a, b = A.axis, B.axis
    total = 0.0
    for amp, mean, cov in cross_correlation_terms(A.profile, B.profile):
        icov = np.linalg.inv(cov)

        def corr(r, amp=amp, mean=mean, icov=icov, cov=cov):
            d = r - mean
            nd = amp * gaussian_density(r, mean, cov)
            y = d @ icov
            lap = np.sum(y * y, -1) - np.trace(icov)
            hab = (y @ a) * (y @ b) - a @ icov @ b
            return np.real(-(a @ b) * lap * nd + hab * nd)

        sd = math.sqrt(np.linalg.eigvalsh(cov).max())
        rule = kernel_rule(mean, sd, n_r, n_ang, pad=12.0)
        total += position_kernel_energy(corr, m, 0.0, rule=rule)
    return total


def static_current_energy_shift(J0: Static | None, Jvec, m: float, method: str = "momentum",
                                transversality_tol: float = 1e-10) -> float:
    """Ground-energy shift ``-1/2 (Jvec, K_m Jvec) + 1/2 (J0, K_m J0)`` of a static four-current.

    ``Jvec`` is a :class:`TransverseStaticCurrent` (or a sequence of them,
    summed), or a triple of ``Static`` components which is checked for
    transversality. ``m = 0`` uses the Coulomb kernel.
    """
    if m < 0:
        raise ValueError("mass must be non-negative")
    e0 = 0.0
    if J0 is not None and J0.terms:
        e0 = 0.5 * yukawa_pair_energy(J0, J0, m, method=method)
    if Jvec is None:
        return e0
    if isinstance(Jvec, TransverseStaticCurrent):
        Jvec = [Jvec]
    Jvec = list(Jvec)
    if len(Jvec) == 3 and all(isinstance(c, Static) for c in Jvec):
        comps = Jvec
        scale, shift = _gaussian_scale(comps)
        probe = np.random.default_rng(1).normal(size=(64, 3)) * scale
        Jk = np.stack([c.fourier(probe) for c in comps], -1)
        div = np.abs(np.sum(probe * Jk, -1))
        if np.any(div > transversality_tol * np.linalg.norm(probe, axis=-1) * np.linalg.norm(Jk, axis=-1).max()):
            raise ValueError("spatial current is not transversal")
        if method != "momentum":
            raise ValueError("component currents support only the momentum method")
        ev = sum(yukawa_pair_energy(comps[i], comps[i], m) for i in range(3))
        return e0 - 0.5 * ev
    if not all(isinstance(c, TransverseStaticCurrent) for c in Jvec):
        raise TypeError("Jvec must be TransverseStaticCurrent objects or three Static components")
    ev = sum(_curl_pair(a, b, m, method) for a in Jvec for b in Jvec)
    return e0 - 0.5 * ev


__all__ = [
    "CoherentScatteringData", "IRClassification", "ConservationError", "Resolution",
    "vacuum_persistence_exponent", "on_shell_strength", "scattering_amplitude",
    "CrossSectionTable", "cross_section_table", "inclusive_cross_section",
    "stationary_energy_shift", "classify_ir", "two_epoch_displacement",
    "two_epoch_gl_scattering", "photon_scattering_exponent", "static_current_energy_shift",
]
