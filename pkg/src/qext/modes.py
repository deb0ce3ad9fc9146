"""Plane-wave spinors, polarization vectors and Klein-Gordon Cauchy evolution."""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt

from .core import METRIC, OnShellMomentum, as_four, lower, minkowski_dot, on_shell_energy
from .gamma_algebra import PAULI, GammaRepresentation, beta, gammas, slash

# ------------------------------------------------------------------ spinors

_CHI = {0.5: np.array([1.0, 0.0], dtype=complex), -0.5: np.array([0.0, 1.0], dtype=complex)}


@dataclass(frozen=True)
class DiracSpinor:
    """Dirac-representation plane-wave spinor.

    ``momentum`` is the on-shell momentum with spatial part ``p``; the
    spinor's four-momentum is ``(frequency_sign * E, p)``.
    """

    components: np.ndarray
    momentum: OnShellMomentum
    frequency_sign: int
    s: float

    def four_momentum(self) -> np.ndarray:
        return np.array([self.frequency_sign * self.momentum.energy, *self.momentum.spatial])

    def bar(self) -> np.ndarray:
        """Row vector ``u* beta``."""
        return self.components.conj() @ beta(GammaRepresentation.DIRAC)


def _sigma_dot(p):
    return p[0] * PAULI[0] + p[1] * PAULI[1] + p[2] * PAULI[2]


def dirac_u(p_spatial, m: float, frequency_sign: int = 1, s: float = 0.5) -> DiracSpinor:
    """Plane-wave spinor with spatial momentum ``p`` and spin label ``s``.

    Positive frequency: ``N (chi_s, sigma.p chi_s/(E+m))``; negative frequency
    (four-momentum ``(-E, p)``): ``N (2s sigma.p chi_s/(E+m), -2s chi_s)``
    with ``N = sqrt((E+m)/(2E))``. Unit norm. The negative-frequency phase is
    fixed so that ``kappa conj(u(p,s)) = u(-p,-s)``.

    Raises
    ------
    ValueError
        If ``m <= 0`` or the labels are invalid.
    """
    if m <= 0:
        raise ValueError("dirac_u requires m > 0")
    if frequency_sign not in (1, -1):
        raise ValueError("frequency_sign must be +1 or -1")
    if s not in _CHI:
        raise ValueError("spin label must be +1/2 or -1/2")
    p = np.asarray(p_spatial, dtype=float).reshape(3)
    e = float(on_shell_energy(p, m))
    n = np.sqrt((e + m) / (2 * e))
    chi = _CHI[s]
    sp = _sigma_dot(p) @ chi / (e + m)
    if frequency_sign == 1:
        comps = n * np.concatenate([chi, sp])
    else:
        sg = 2 * s
        comps = n * np.concatenate([sg * sp, -sg * chi])
    return DiracSpinor(comps, OnShellMomentum(m, tuple(p)), frequency_sign, s)


def spin_projector(p_spatial, m: float, frequency_sign: int = 1) -> np.ndarray:
    """Closed form of ``sum_s u u~`` for the given frequency.

    ``(-pslash + sign*m)/(2E)`` with ``p = (E, p)``. For negative frequency
    the sum runs over the spinors ``u(-p, s)`` attached to the physical
    momentum ``p``.
    """
    p = np.asarray(p_spatial, dtype=float)
    e = float(on_shell_energy(p, m))
    pv = np.array([e, *p])
    return (-slash(pv) + frequency_sign * m * np.eye(4)) / (2 * e)


def spinor_completeness(p_spatial, m: float, frequency_sign: int = 1) -> np.ndarray:
    """Explicit ``sum_s u(p,s) u~(p,s)`` (``u~ = u* beta``) at the given frequency."""
    p = np.asarray(p_spatial, dtype=float)
    if frequency_sign == 1:
        us = [dirac_u(p, m, 1, s) for s in (0.5, -0.5)]
    else:
        us = [dirac_u(-p, m, -1, s) for s in (0.5, -0.5)]
    return sum(np.outer(u.components, u.bar()) for u in us)


def casimir_spin_sum(B: np.ndarray, sign_plus: int, sign_minus: int, p_plus, p_minus,
                     method: str = "trace") -> float:
    """``sum_{s+,s-} |u~(p+,s+) B u(p-,s-)|^2`` by the trace formula or explicit sum.

    A sign of -1 means the negative-frequency spinors ``u(-p,-s)`` of the
    physical momentum ``p``. Trace formula:
    ``Tr B~ (-p+ slash + sign+ m) B (-p- slash + sign- m)/(4 E+ E-)``, ``B~ = beta B* beta``.

    Parameters
    ----------
    p_plus, p_minus : OnShellMomentum
        Must have equal positive masses.
    """
    if not (isinstance(p_plus, OnShellMomentum) and isinstance(p_minus, OnShellMomentum)):
        raise TypeError("momenta must be OnShellMomentum instances")
    if p_plus.mass != p_minus.mass or p_plus.mass <= 0:
        raise ValueError("masses must be equal and positive")
    m = p_plus.mass
    B = np.asarray(B, dtype=complex)
    if method == "trace":
        b = beta()
        bt = b @ B.conj().T @ b
        pp, pm = p_plus.four_vector(), p_minus.four_vector()
        lhs = -slash(pp) + sign_plus * m * np.eye(4)
        rhs = -slash(pm) + sign_minus * m * np.eye(4)
        return float(np.real(np.trace(bt @ lhs @ B @ rhs)) / (4 * p_plus.energy * p_minus.energy))
    if method != "explicit":
        raise ValueError("method must be 'trace' or 'explicit'")

    def spinors(p, sign):
        sp = np.asarray(p.spatial)
        if sign == 1:
            return [dirac_u(sp, m, 1, s) for s in (0.5, -0.5)]
        return [dirac_u(-sp, m, -1, -s) for s in (0.5, -0.5)]

    total = 0.0
    for up in spinors(p_plus, sign_plus):
        for um in spinors(p_minus, sign_minus):
            total += abs(up.bar() @ B @ um.components) ** 2
    return float(total)


# ------------------------------------------------------- polarizations


@dataclass(frozen=True)
class PolarizationVector:
    """Polarization four-vector (upper index) with its label."""

    components: np.ndarray
    momentum: OnShellMomentum
    label: object


def transverse_frame(k_spatial):
    """Right-handed orthonormal ``(e1, e2)`` orthogonal to ``k``.

    ``e1`` is Gram-Schmidt of the axis where ``|k_i|`` is smallest (first on
    ties); ``e2 = khat x e1``.
    """
    k = np.asarray(k_spatial, dtype=float).reshape(3)
    nk = np.linalg.norm(k)
    if nk == 0:
        raise ValueError("polarization basis undefined at k = 0")
    kh = k / nk
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(k)))] = 1.0
    e1 = axis - (axis @ kh) * kh
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(kh, e1)
    return e1, e2


def polarization_vector(k_spatial, m: float, sigma) -> PolarizationVector:
    """Photon/Proca polarization ``u(k, sigma)``.

    ``sigma = +-1``: ``(0, e(k,+-1))`` with ``e(+-1) = (e1 -/+ i e2)/sqrt(2)``
    so that ``k x e = +-i|k| e``. ``sigma = 0`` (needs ``m > 0``):
    ``(|k|/m, eps khat/m)``. ``sigma = "sc"`` (needs ``m > 0``): the scalar
    mode ``(eps, k)/m`` of Minkowski norm ``-1``.
    """
    k = np.asarray(k_spatial, dtype=float).reshape(3)
    if m < 0:
        raise ValueError("mass must be non-negative")
    e1, e2 = transverse_frame(k)
    eps = float(on_shell_energy(k, m))
    mom = OnShellMomentum(m, tuple(k))
    nk = np.linalg.norm(k)
    if sigma in (1, -1):
        e = (e1 - 1j * sigma * e2) / np.sqrt(2)
        comps = np.concatenate([[0.0], e]).astype(complex)
    elif sigma == 0 or sigma == "sc":
        if m <= 0:
            raise ValueError("longitudinal and scalar modes need m > 0")
        if sigma == 0:
            comps = np.concatenate([[nk / m], eps * k / (m * nk)]).astype(complex)
        else:
            comps = np.concatenate([[eps / m], k / m]).astype(complex)
    else:
        raise ValueError(f"invalid polarization label {sigma!r}")
    return PolarizationVector(comps, mom, sigma)


def polarization_completeness(k_spatial, m: float) -> np.ndarray:
    """Explicit ``sum_sigma conj(u_mu) u_nu`` over physical polarizations (lower indices)."""
    labels = (1, -1, 0) if m > 0 else (1, -1)
    tot = np.zeros((4, 4), dtype=complex)
    for s in labels:
        u = lower(polarization_vector(k_spatial, m, s).components)
        tot += np.outer(u.conj(), u)
    return tot


def polarization_completeness_closed(k_spatial, m: float) -> np.ndarray:
    """``g + k k/m^2`` (massive) or ``g + delta_0 delta_0 - kvec kvec/|k|^2`` (massless)."""
    k = np.asarray(k_spatial, dtype=float)
    if m > 0:
        kl = lower(np.array([on_shell_energy(k, m), *k]))
        return METRIC + np.outer(kl, kl) / m ** 2
    out = METRIC.copy()
    out[0, 0] += 1.0
    out[1:, 1:] -= np.outer(k, k) / (k @ k)
    return out


def spin_sum_boson(M, N, k: OnShellMomentum, massless: bool | None = None,
                   method: str = "closed", atol: float = 1e-10) -> complex:
    """``sum_sigma conj(M^mu u_mu) u_nu N^nu`` for ``k``-transversal ``M, N``.

    The closed form is ``conj(M) . N`` (Minkowski); ``method="explicit"``
    sums over the polarization basis.

    Raises
    ------
    ValueError
        If ``M`` or ``N`` is not orthogonal to ``k`` within ``atol``.
    """
    M = np.asarray(M, dtype=complex)
    N = np.asarray(N, dtype=complex)
    if massless is None:
        massless = k.mass == 0
    kv = k.four_vector()
    scale = np.linalg.norm(kv)
    for name, v in (("M", M), ("N", N)):
        if abs(minkowski_dot(v, kv)) > atol * max(scale * np.linalg.norm(v), 1.0):
            raise ValueError(f"{name} is not transversal to k")
    if method == "closed":
        return complex(minkowski_dot(M.conj(), N))
    labels = (1, -1) if massless else (1, -1, 0)
    total = 0j
    for s in labels:
        u = polarization_vector(k.spatial, k.mass, s).components
        ul = lower(u)
        total += np.conj(M @ ul) * (ul @ N)
    return complex(total)


# ------------------------------------------------------- Cauchy evolution


class BoundaryDecayError(ValueError):
    """Cauchy data does not decay at the grid boundary (periodic aliasing risk)."""


@dataclass
class CauchyData:
    """Field value ``varsigma`` and time derivative ``vartheta`` on a uniform periodic grid.

    ``origin`` is the coordinate of index (0, 0, 0); ``spacing`` is per axis.
    """

    varsigma: np.ndarray
    vartheta: np.ndarray
    spacing: tuple
    origin: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        self.varsigma = np.asarray(self.varsigma)
        self.vartheta = np.asarray(self.vartheta)
        if self.varsigma.ndim != 3 or self.varsigma.shape != self.vartheta.shape:
            raise ValueError("fields must be 3D arrays of equal shape")
        self.spacing = tuple(float(h) for h in np.broadcast_to(self.spacing, 3))
        self.origin = tuple(float(o) for o in np.broadcast_to(self.origin, 3))
        if min(self.spacing) <= 0:
            raise ValueError("grid spacing must be positive")

    @property
    def shape(self):
        return self.varsigma.shape

    def axes(self):
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.shape)]

    def mesh(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def wavevectors(self):
        ks = [2 * np.pi * np.fft.fftfreq(n, d=h) for n, h in zip(self.shape, self.spacing)]
        return np.meshgrid(*ks, indexing="ij")

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def boundary_max(self) -> float:
        out = 0.0
        for f in (self.varsigma, self.vartheta):
            a = np.abs(f)
            for ax in range(3):
                out = max(out, np.take(a, 0, axis=ax).max(), np.take(a, -1, axis=ax).max())
        return out


def check_boundary_decay(data: CauchyData, tol: float = 1e-10):
    peak = max(np.abs(data.varsigma).max(), np.abs(data.vartheta).max(), 1e-300)
    if data.boundary_max() > tol * peak:
        raise BoundaryDecayError("fields do not decay at the grid boundary")


def evolve_kg_cauchy(data: CauchyData, t: float, m: float, check: bool = True) -> CauchyData:
    """Evolve Klein-Gordon Cauchy data by ``t`` with exact mode multipliers.

    ``zeta^(t) = cos(t eps) varsigma^ + sin(t eps)/eps vartheta^`` and
    ``dzeta^/dt = -eps sin(t eps) varsigma^ + cos(t eps) vartheta^``.

    Raises
    ------
    BoundaryDecayError
        If the input does not decay to ``1e-10`` of its peak at the boundary.
    """
    if m < 0:
        raise ValueError("mass must be non-negative")
    if t == 0:
        return CauchyData(data.varsigma.copy(), data.vartheta.copy(), data.spacing, data.origin)
    if check:
        check_boundary_decay(data)
    kx, ky, kz = data.wavevectors()
    eps = np.sqrt(kx ** 2 + ky ** 2 + kz ** 2 + m * m)
    c = np.cos(t * eps)
    sn = np.sin(t * eps)
    sinc = np.where(eps > 0, sn / np.where(eps > 0, eps, 1.0), t)
    fs = np.fft.fftn(data.varsigma)
    ft = np.fft.fftn(data.vartheta)
    real = np.isrealobj(data.varsigma) and np.isrealobj(data.vartheta)
    z = np.fft.ifftn(c * fs + sinc * ft)
    zd = np.fft.ifftn(-eps * sn * fs + c * ft)
    if real:
        z, zd = z.real, zd.real
    return CauchyData(z, zd, data.spacing, data.origin)


def kg_energy(data: CauchyData, m: float) -> float:
    """``int (|vartheta|^2 + |grad varsigma|^2 + m^2 |varsigma|^2)/2`` with spectral gradients."""
    kx, ky, kz = data.wavevectors()
    n = data.varsigma.size
    fs = np.fft.fftn(data.varsigma)
    grad2 = np.sum((kx ** 2 + ky ** 2 + kz ** 2) * np.abs(fs) ** 2) / n
    kin = np.sum(np.abs(data.vartheta) ** 2)
    mass = m * m * np.sum(np.abs(data.varsigma) ** 2)
    return float(0.5 * data.cell_volume * (kin + grad2 + mass))


def symplectic_form(a: CauchyData, b: CauchyData) -> complex:
    """``int (-vartheta_a varsigma_b + varsigma_a vartheta_b) d^3x``."""
    return complex(a.cell_volume * np.sum(-a.vartheta * b.varsigma + a.varsigma * b.vartheta))


def causal_shadow_leakage(initial: CauchyData, evolved: CauchyData, t: float,
                          support_tol: float = 1e-12, margin: float | None = None) -> float:
    """Largest ``|zeta(t)|`` outside the causal shadow, relative to the initial peak.

    The support is where ``|varsigma|`` or ``|vartheta|`` exceeds
    ``support_tol`` times the peak; the shadow is every point within
    ``|t| + margin`` of it (``margin`` defaults to two grid spacings).
    """
    a = np.maximum(np.abs(initial.varsigma), np.abs(initial.vartheta))
    peak = float(a.max())
    if peak == 0:
        return 0.0
    supp = a >= support_tol * peak
    dist = distance_transform_edt(~supp, sampling=initial.spacing)
    if margin is None:
        margin = 2 * max(initial.spacing)
    outside = dist > abs(t) + margin
    if not outside.any():
        raise ValueError("causal shadow covers the whole grid")
    return float(np.abs(evolved.varsigma)[outside].max() / peak)


# Binary layout (little endian):
#   8s magic b"QEXTCD01", 3*u4 dims, 3*f8 spacing, 3*f8 origin, u1 complex flag,
#   then per grid point (C order) the interleaved pair (varsigma, vartheta)
#   as f8 or c16.
_MAGIC = b"QEXTCD01"
_HEADER = struct.Struct("<8s3I3d3dB")


def write_cauchy(path, data: CauchyData):
    cplx = np.iscomplexobj(data.varsigma) or np.iscomplexobj(data.vartheta)
    dt = np.dtype("<c16" if cplx else "<f8")
    inter = np.stack([data.varsigma.astype(dt), data.vartheta.astype(dt)], axis=-1)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, *data.shape, *data.spacing, *data.origin, int(cplx)))
        fh.write(np.ascontiguousarray(inter).tobytes())


def read_cauchy(path) -> CauchyData:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError("truncated Cauchy grid header")
        magic, nx, ny, nz, hx, hy, hz, ox, oy, oz, cplx = _HEADER.unpack(head)
        if magic != _MAGIC:
            raise ValueError("not a Cauchy grid file")
        dt = np.dtype("<c16" if cplx else "<f8")
        raw = np.frombuffer(fh.read(), dtype=dt)
    if raw.size != 2 * nx * ny * nz:
        raise ValueError("Cauchy grid payload has the wrong size")
    arr = raw.reshape(nx, ny, nz, 2)
    return CauchyData(arr[..., 0].copy(), arr[..., 1].copy(), (hx, hy, hz), (ox, oy, oz))


def gaussian_cauchy_data(n: int, half_width: float, sigma: float = 1.0, center=(0, 0, 0),
                         amplitude=(1.0, 0.0)) -> CauchyData:
    """Gaussian bump Cauchy data on an ``n^3`` grid over ``[-L, L)^3``."""
    h = 2 * half_width / n
    data = CauchyData(np.zeros((n, n, n)), np.zeros((n, n, n)), h, (-half_width,) * 3)
    X, Y, Z = data.mesh()
    c = np.asarray(center, dtype=float)
    g = np.exp(-((X - c[0]) ** 2 + (Y - c[1]) ** 2 + (Z - c[2]) ** 2) / (2 * sigma ** 2))
    data.varsigma = amplitude[0] * g
    data.vartheta = amplitude[1] * g
    return data


__all__ = [
    "DiracSpinor", "dirac_u", "spin_projector", "spinor_completeness", "casimir_spin_sum",
    "PolarizationVector", "polarization_vector", "polarization_completeness",
    "polarization_completeness_closed", "spin_sum_boson", "transverse_frame",
    "CauchyData", "evolve_kg_cauchy", "kg_energy", "symplectic_form", "read_cauchy",
    "write_cauchy", "gaussian_cauchy_data", "causal_shadow_leakage", "BoundaryDecayError",
    "check_boundary_decay",
]
