"""Numerics for exactly solvable quadratic quantum field models.

Submodules: ``core`` (vectors, sources), ``gamma_algebra``, ``propagators``,
``modes``, ``quadrature``, ``scattering``, ``vacuum_energy``, ``fock_oracle``
and the ``cli`` front end.
"""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from . import core, gamma_algebra, propagators, modes, quadrature, scattering, vacuum_energy, fock_oracle
from .core import FourVector, GaussianSum, OnShellMomentum, Static
from .gamma_algebra import GammaRepresentation
from .propagators import PropagatorKind, PhotonGauge
from .vacuum_energy import LoopMethod, LoopSpecies
from .fock_oracle import TruncatedFock, QuadraticHamiltonianSpec, BornKernelSpec

__all__ = [
    "core", "gamma_algebra", "propagators", "modes", "quadrature", "scattering",
    "vacuum_energy", "fock_oracle", "FourVector", "GaussianSum", "OnShellMomentum", "Static",
    "GammaRepresentation", "PropagatorKind", "PhotonGauge", "LoopMethod", "LoopSpecies",
    "TruncatedFock", "QuadraticHamiltonianSpec", "BornKernelSpec", "__version__",
]
