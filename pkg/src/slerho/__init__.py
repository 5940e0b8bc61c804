"""slerho: simulation and verification laboratory for SLE(kappa,rho) processes."""

__version__ = "0.1.0"

from . import exponents  # noqa: F401
