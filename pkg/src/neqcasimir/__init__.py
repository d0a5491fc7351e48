"""Radiative heat exchange and non-equilibrium Casimir forces between
objects described by their scattering (T-operator) matrices."""

__version__ = "0.1.0"

from . import dynamics, forces, materials, quadrature, radiation, scattering, special, transfer, waves  # noqa: E402

__all__ = [
    "__version__",
    "materials",
    "special",
    "scattering",
    "waves",
    "radiation",
    "transfer",
    "forces",
    "quadrature",
    "dynamics",
]
