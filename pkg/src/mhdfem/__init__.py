"""Continuous-Galerkin solver for ideal MHD with parabolic regularization,
entropy-viscosity shock capturing, projection divergence cleaning, and an
entropy-principle diagnostics suite."""

__version__ = "0.1.0"

from . import (  # noqa: F401
    diagnostics,
    divclean,
    errors,
    fespace,
    fluxes,
    problems,
    thermo,
    timeint,
    viscosity,
)
