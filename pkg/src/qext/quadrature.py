"""Numerical integration backbone.

Adaptive 1D integration delegates to QUADPACK (``scipy.integrate.quad``)
after an explicit rational compactification of infinite ranges. Endpoint
singular integrals can use the double-exponential (tanh-sinh) rule, and
principal values use symmetric pole excision.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .core import Static


class QuadratureError(RuntimeError):
    """Quadrature failed to meet its tolerance; ``partial`` holds the last estimate."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass
class IntegrandHandle:
    """Callable with declared singular points and decay class.

    ``decay`` is one of ``"compact"``, ``"exponential"`` or ``"algebraic"``
    and is informational; singular points are used as breakpoints.
    """

    fn: Callable
    singular_points: tuple = ()
    decay: str = "exponential"
    is_complex: bool = False

    def __post_init__(self):
        self.singular_points = tuple(sorted(float(p) for p in self.singular_points))

    def __call__(self, *x):
        return self.fn(*x)


@dataclass
class QuadratureResult:
    value: complex
    error_estimate: float
    evaluations: int = 0

    def __post_init__(self):
        self.error_estimate = abs(float(self.error_estimate))


def _as_handle(f) -> IntegrandHandle:
    return f if isinstance(f, IntegrandHandle) else IntegrandHandle(f)


def _compactify(f, a, b):
    """Map an (semi-)infinite interval onto a finite one.

    Returns ``(g, a', b', to_u)`` with ``int_a^b f = int_a'^b' g`` and
    ``to_u`` mapping breakpoints into the new variable.
    """
    if np.isfinite(a) and np.isfinite(b):
        return f, a, b, lambda x: x
    if np.isfinite(a):
        def g(u):
            return f(a + u / (1 - u)) / (1 - u) ** 2
        return g, 0.0, 1.0, lambda x: (x - a) / (1 + x - a)
    if np.isfinite(b):
        def g(u):
            return f(b - u / (1 - u)) / (1 - u) ** 2
        return g, 0.0, 1.0, lambda x: (b - x) / (1 + b - x)

    def g(u):
        return f(u / (1 - u * u)) * (1 + u * u) / (1 - u * u) ** 2

    def to_u(x):
        if x == 0:
            return 0.0
        return (-1 + math.sqrt(1 + 4 * x * x)) / (2 * x)
    return g, -1.0, 1.0, to_u


def _quad_real(g, a, b, tol, points, limit):
    counter = [0]

    def wrapped(x):
        counter[0] += 1
        v = g(x)
        return float(v) if np.isfinite(v) else 0.0

    pts = [p for p in (points or ()) if a < p < b]
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(wrapped, a, b, epsabs=tol, epsrel=tol,
                                      limit=limit, points=pts or None)
        except integrate.IntegrationWarning as exc:
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(wrapped, a, b, epsabs=tol, epsrel=tol,
                                      limit=limit, points=pts or None)
            if err > max(tol, tol * abs(val)) * 10:
                raise QuadratureError(f"quad did not converge: {exc}",
                                      QuadratureResult(val, err, counter[0])) from None
    return val, err, counter[0]


def _integrate_1d(f, a, b, tol, points=(), limit=400) -> QuadratureResult:
    g, ua, ub, to_u = _compactify(f, a, b)
    pts = sorted(to_u(p) for p in points if a < p < b)
    probe = g(0.5 * (ua + ub))
    if np.iscomplexobj(probe) or isinstance(probe, complex):
        re = _quad_real(lambda u: np.real(g(u)), ua, ub, tol, pts, limit)
        im = _quad_real(lambda u: np.imag(g(u)), ua, ub, tol, pts, limit)
        return QuadratureResult(re[0] + 1j * im[0], math.hypot(re[1], im[1]), re[2] + im[2])
    val, err, n = _quad_real(g, ua, ub, tol, pts, limit)
    return QuadratureResult(val, err, n)


def adaptive_integrate(f, domain, tol: float = 1e-10, limit: int = 400) -> QuadratureResult:
    """Adaptive integration over an interval or a product of up to four intervals.

    Parameters
    ----------
    f : callable or IntegrandHandle
        For a product domain ``f`` receives one scalar argument per axis.
    domain : (a, b) or sequence of (a, b)
        Infinite endpoints are compactified by ``x = a + u/(1-u)``.
    tol : float
        Absolute and relative target.

    Raises
    ------
    QuadratureError
        When the error budget is not met; ``partial`` carries the estimate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    h = _as_handle(f)
    dom = np.asarray(domain, dtype=float)
    if dom.ndim == 1:
        return _integrate_1d(h, dom[0], dom[1], tol, h.singular_points, limit)
    if len(dom) > 4:
        raise ValueError("at most four dimensions are supported")
    total = [0]

    def nested(prefix, depth):
        a, b = dom[depth]
        if depth == len(dom) - 1:
            r = _integrate_1d(lambda x: h(*prefix, x), a, b, tol, (), limit)
        else:
            r = _integrate_1d(lambda x: nested(prefix + (x,), depth + 1), a, b, tol, (), limit)
        total[0] += r.evaluations
        return r.value

    val = nested((), 0)
    return QuadratureResult(val, tol * max(1.0, abs(val)), total[0])


# ------------------------------------------------------------- fixed rules


def gauss_legendre(a: float, b: float, n: int, panels: int = 1):
    """Composite Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def tanh_sinh_rule(a: float, b: float, level: int = 6, tmax: float = 3.5):
    """Double-exponential nodes/weights on ``[a, b]`` with step ``2^-level``.

    Nodes cluster at both endpoints, so integrable endpoint singularities
    (logarithmic, algebraic) converge at the double-exponential rate.
    """
    h = 2.0 ** -level
    t = np.arange(-tmax, tmax + h / 2, h)
    s = 0.5 * np.pi * np.sinh(t)
    x = np.tanh(s)
    w = 0.5 * np.pi * np.cosh(t) / np.cosh(s) ** 2 * h
    half = 0.5 * (b - a)
    # distance to the nearest endpoint, computed without cancellation
    dist = half / (np.exp(2 * np.abs(s)) + 1) * 2
    nodes = np.where(x < 0, a + dist, b - dist)
    keep = (dist > 0) & (nodes > a) & (nodes < b)
    return nodes[keep], half * w[keep]


def tanh_sinh(f, a: float, b: float, tol: float = 1e-12, max_level: int = 10) -> QuadratureResult:
    """Integrate a vectorised ``f`` on a finite interval by tanh-sinh with level doubling."""
    prev = None
    evals = 0
    for level in range(3, max_level + 1):
        x, w = tanh_sinh_rule(a, b, level)
        val = np.sum(w * f(x))
        evals += x.size
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return QuadratureResult(val, abs(val - prev), evals)
        prev = val
    raise QuadratureError("tanh-sinh did not converge", QuadratureResult(prev, np.inf, evals))


def spherical_rule(r_max: float, n_r: int = 64, n_theta: int = 32, n_phi: int = 32,
                   r_panels: int = 4, center=(0.0, 0.0, 0.0)):
    """Product rule on the ball of radius ``r_max`` (Gauss radial/polar, trapezoid azimuth).

    Returns ``(points (N, 3), weights (N,))`` including the ``r^2 sin(theta)`` Jacobian.
    """
    r, wr = gauss_legendre(0.0, r_max, max(2, n_r // r_panels), r_panels)
    c, wc = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    wp = np.full(n_phi, 2 * np.pi / n_phi)
    R, C, P = np.meshgrid(r, c, phi, indexing="ij")
    S = np.sqrt(1 - C * C)
    pts = np.stack([R * S * np.cos(P), R * S * np.sin(P), R * C], axis=-1).reshape(-1, 3)
    w = (wr[:, None, None] * r[:, None, None] ** 2 * wc[None, :, None] * wp[None, None, :])
    return pts + np.asarray(center, dtype=float), w.reshape(-1)


# -------------------------------------------------------- principal values


def principal_value(f, pole: float, domain, tol: float = 1e-10) -> QuadratureResult:
    """Cauchy principal value of ``int f(x)/(x - pole) dx`` over ``domain``.

    The symmetric window ``[pole - d, pole + d]`` is folded into
    ``int_0^d (f(pole+u) - f(pole-u))/u du``, which is regular; the rest is an
    ordinary integral.

    Raises
    ------
    ValueError
        If the pole is not strictly inside the domain.
    """
    a, b = float(domain[0]), float(domain[1])
    if not a < pole < b:
        raise ValueError("pole must lie strictly inside the domain")
    h = _as_handle(f)
    d = min(pole - a, b - pole)

    def folded(u):
        if u == 0:
            return 0.0
        return (h(pole + u) - h(pole - u)) / u

    res = _integrate_1d(folded, 0.0, d, tol)
    value, err, n = res.value, res.error_estimate, res.evaluations
    for lo, hi in ((a, pole - d), (pole + d, b)):
        if hi > lo:
            r = _integrate_1d(lambda x: h(x) / (x - pole), lo, hi, tol,
                              [p for p in h.singular_points if lo < p < hi])
            value += r.value
            err += r.error_estimate
            n += r.evaluations
    return QuadratureResult(value, err, n)


def once_subtracted_dispersion(im_fn, threshold: float, s: float, tol: float = 1e-10) -> float:
    """Real part from the imaginary part by a dispersion relation subtracted at 0.

    ``Re f(s) = -(1/pi) PV int_{-inf}^{threshold} Im f(xi) (1/(xi - s) - 1/xi) d xi``

    ``im_fn`` is supported on ``(-inf, threshold]`` with ``threshold < 0``; the
    substitution ``xi = threshold - w^2`` removes square-root threshold
    behaviour. Points inside the support are routed through the PV path.
    """
    if threshold >= 0:
        raise ValueError("threshold must be negative")
    if s == 0:
        return 0.0
    im = _as_handle(im_fn)
    gap = threshold - s

    def base(w):
        xi = threshold - w * w
        return -(1 / np.pi) * im(xi) * 2 * w * s / xi

    if gap <= 0:
        res = _integrate_1d(lambda w: base(w) / (gap - w * w), 0.0, np.inf, tol)
        return float(np.real(res.value))
    w0 = math.sqrt(gap)
    # 1/(w0^2 - w^2) = -1/((w - w0)(w + w0))
    res = principal_value(lambda w: -base(w) / (w + w0), w0, (0.0, np.inf), tol)
    return float(np.real(res.value))


def twice_subtracted_dispersion(im_fn, threshold: float, s: float, slope: float,
                                tol: float = 1e-10) -> float:
    """Twice-subtracted dispersion relation with ``f(0) = 0`` and ``f'(0) = slope``.

    ``Re f(s) = s slope - (s^2/pi) PV int_{-inf}^{threshold} Im f(xi)/(xi^2 (xi - s)) d xi``

    Needed when ``Im f`` grows linearly so the once-subtracted integral diverges.
    """
    if threshold >= 0:
        raise ValueError("threshold must be negative")
    if s == 0:
        return 0.0
    im = _as_handle(im_fn)
    gap = threshold - s

    def base(w):
        xi = threshold - w * w
        return -(1 / np.pi) * im(xi) * 2 * w * s * s / (xi * xi)

    if gap <= 0:
        res = _integrate_1d(lambda w: base(w) / (gap - w * w), 0.0, np.inf, tol)
    else:
        w0 = math.sqrt(gap)
        res = principal_value(lambda w: -base(w) / (w + w0), w0, (0.0, np.inf), tol)
    return float(s * slope + np.real(res.value))


# ---------------------------------------------------------- pair energies


def _profile_scales(*profiles: Static):
    lam, shift = 1e-300, 0.0
    for p in profiles:
        for t in p.terms:
            lam = max(lam, np.linalg.eigvalsh(t.width).max())
            shift = max(shift, np.linalg.norm(t.center))
    return lam, shift


def _check_static(p, name):
    if not isinstance(p, Static):
        raise TypeError(f"{name} must be a Static profile")


def yukawa_pair_energy(rho1: Static, rho2: Static, m: float, method: str = "momentum",
                       n_r: int = 96, n_ang: int = 48) -> float:
    """Pair energy ``int int conj(rho1)(x) exp(-m|x-y|)/(4 pi |x-y|) rho2(y)``.

    ``method="momentum"`` integrates ``conj(rho1^)(k) rho2^(k)/(k^2+m^2)`` over
    ``d^3k/(2pi)^3``; ``method="position"`` integrates the kernel against the
    closed-form cross-correlation of the two Gaussian sums.
    """
    _check_static(rho1, "rho1")
    _check_static(rho2, "rho2")
    if m < 0:
        raise ValueError("mass must be non-negative")
    if not rho1.terms or not rho2.terms:
        return 0.0
    if method == "momentum":
        total = 0.0
        for t1 in rho1.terms:
            for t2 in rho2.terms:
                a, b = Static((t1,)), Static((t2,))
                lam, _ = _profile_scales(a, b)

                def fn(k, a=a, b=b):
                    return np.conj(a.fourier(k)) * b.fourier(k) / (np.sum(k * k, -1) + m * m)

                total += oriented_ball_integral(fn, math.sqrt(4 * lam * 45.0), t1.center - t2.center,
                                                n_r, n_ang, inner_scale=m).real
        return total / (2 * np.pi) ** 3
    if method == "position":
        return float(np.real(_pair_energy_position(rho1, rho2, m, n_r, n_ang)))
    raise ValueError("method must be 'momentum' or 'position'")


def oriented_ball_integral(fn: Callable, k_max: float, displacement, n_r: int = 96,
                           n_ang: int = 48, polar_factor: float = 0.4, block: int = 16,
                           inner_scale: float = 0.0) -> complex:
    """``int_{|k| < k_max} fn(k) d^3k`` for Gaussian-damped ``fn`` carrying ``exp(i k.d)``.

    The polar axis is turned onto ``d`` so the phase depends on ``cos(theta)``
    only; the radial and polar orders grow with ``k_max |d|``. Radial shells
    are summed in blocks to bound memory. A small ``inner_scale`` (a light
    mass) adds geometrically graded panels near the origin.
    """
    d = np.asarray(displacement, dtype=float)
    dist = float(np.linalg.norm(d))
    phase = k_max * dist
    r, wr = gauss_legendre(0.0, k_max, max(2, (2 * n_r + 2 * int(phase)) // 8), 8)
    if 0 < inner_scale < k_max / 64:
        edges = [0.0]
        while edges[-1] < k_max / 16:
            edges.append(inner_scale if edges[-1] == 0 else 4 * edges[-1])
        parts = [gauss_legendre(a, b, 16 + int(2 * (b - a) * dist)) for a, b in zip(edges[:-1], edges[1:])]
        head, tail = gauss_legendre(edges[-1], k_max, max(2, (2 * n_r + 2 * int(phase)) // 8), 8)
        r = np.concatenate([p[0] for p in parts] + [head])
        wr = np.concatenate([p[1] for p in parts] + [tail])
    c, wc = np.polynomial.legendre.leggauss(n_ang + int(polar_factor * phase))
    phi = 2 * np.pi * np.arange(n_ang) / n_ang
    C, P = np.meshgrid(c, phi, indexing="ij")
    S = np.sqrt(1 - C * C)
    dirs = np.stack([S * np.cos(P), S * np.sin(P), C], -1).reshape(-1, 3)
    wd = np.repeat(wc, n_ang) * (2 * np.pi / n_ang)
    if dist > 0:
        # Householder reflection taking e_z onto d/|d|
        u = np.array([0.0, 0.0, 1.0]) - d / dist
        nu = np.linalg.norm(u)
        if nu > 1e-14:
            u /= nu
            dirs = dirs - 2 * np.outer(dirs @ u, u)
    total = 0j
    for i0 in range(0, r.size, block):
        rb = r[i0:i0 + block]
        pts = rb[:, None, None] * dirs[None, :, :]
        vals = fn(pts)
        total += np.sum((wr[i0:i0 + block] * rb * rb)[:, None] * wd[None, :] * vals)
    return complex(total)


def cross_correlation_terms(rho1: Static, rho2: Static):
    """Gaussian pieces of ``C(r) = int conj(rho1(y + r)) rho2(y) dy``.

    Yields ``(amplitude, mean, covariance)`` so that ``C`` is the sum of
    ``amplitude * N(r; mean, covariance)`` with ``N`` a normalised density.
    """
    for t1 in rho1.terms:
        for t2 in rho2.terms:
            n1 = np.pi ** 1.5 / math.sqrt(np.linalg.det(t1.width))
            n2 = np.pi ** 1.5 / math.sqrt(np.linalg.det(t2.width))
            cov = 0.5 * (np.linalg.inv(t1.width) + np.linalg.inv(t2.width))
            yield np.conj(t1.weight) * t2.weight * n1 * n2, t1.center - t2.center, cov


def gaussian_density(r, mean, cov):
    d = r - mean
    icov = np.linalg.inv(cov)
    norm = 1.0 / math.sqrt((2 * np.pi) ** 3 * np.linalg.det(cov))
    return norm * np.exp(-0.5 * np.einsum("...i,ij,...j->...", d, icov, d))


def kernel_rule(mean, sd: float, n_r: int, n_ang: int, pad: float = 10.0):
    """Ball rule for ``int K_m(r) N(r; mean, .) d^3r`` with a Gaussian of spread ``sd``.

    Near the origin the rule is centred there so the ``1/r`` singularity sits
    on the radial endpoint. A Gaussian far from the origin (``|mean| > 8 sd``)
    is integrated on a ball around its mean that excludes the origin; an
    origin-centred rule would under-resolve it in angle.
    """
    dist = float(np.linalg.norm(mean))
    if dist > 8 * sd:
        return spherical_rule(min(pad * sd, 0.95 * dist), n_r, n_ang, n_ang, r_panels=8,
                              center=mean)
    return spherical_rule(dist + pad * sd, n_r, n_ang, n_ang, r_panels=8)


def _pair_energy_position(rho1, rho2, m, n_r, n_ang):
    total = 0j
    for amp, mean, cov in cross_correlation_terms(rho1, rho2):
        sd = math.sqrt(np.linalg.eigvalsh(cov).max())
        pts, w = kernel_rule(mean, sd, n_r, n_ang)
        r = np.linalg.norm(pts, axis=-1)
        kern = np.exp(-m * r) / (4 * np.pi * r)
        total += amp * np.sum(w * kern * gaussian_density(pts, mean, cov))
    return total


def position_kernel_energy(corr_fn: Callable, m: float, r_max: float, n_r: int = 96,
                           n_ang: int = 48, rule=None) -> float:
    """``int K_m(r) C(r) d^3r`` for a vectorised correlation function ``C``.

    ``rule`` overrides the origin-centred ball of radius ``r_max`` with a
    ``(points, weights)`` pair, e.g. from :func:`kernel_rule`.
    """
    pts, w = rule if rule is not None else spherical_rule(r_max, n_r, n_ang, n_ang, r_panels=8)
    r = np.linalg.norm(pts, axis=-1)
    return float(np.real(np.sum(w * np.exp(-m * r) / (4 * np.pi * r) * corr_fn(pts))))
