"""First-order and entropy-residual-based artificial viscosity coefficients.

Both coefficients live as nodal scalar fields.  The first-order coefficient
caps the entropy-based one node by node, so shocks see first-order
dissipation while smooth regions see a coefficient that vanishes like the
square of the local mesh size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import InsufficientHistory
from .fespace import FESpace
from .thermo import GasModel
from .timeint import nodal_max_speed

NORMALIZATION_GUARD = 1e-14


@dataclass(frozen=True)
class FirstOrder:
    """epsilon = c_max * h * (max wave speed), nodal."""

    c_max: float = 0.5


@dataclass(frozen=True)
class EntropyViscosity:
    """min(first-order coefficient, residual-proportional coefficient)."""

    c_max: float = 0.5
    c_E: float = 1.0


ViscosityModel = (FirstOrder, EntropyViscosity)


def first_order_viscosity(
    space: FESpace,
    U: np.ndarray,
    h_field: np.ndarray,
    gas: GasModel,
    c_max: float = 0.5,
) -> np.ndarray:
    """eps_L,i = c_max * h_i * (largest directional wave speed at node i)."""
    return c_max * h_field * nodal_max_speed(space, U, gas)


def _time_derivative(history: Sequence[Tuple[float, np.ndarray]]) -> np.ndarray:
    """BDF approximation of dS/dt from the most recent nodal levels.

    Uses BDF2 on three levels with variable steps, BDF1 on two.
    """
    if len(history) < 2:
        raise InsufficientHistory("entropy residual needs two time levels")
    (t0, s0), (t1, s1) = history[-2], history[-1]
    tau1 = t1 - t0
    if len(history) == 2:
        return (s1 - s0) / tau1
    tm, sm = history[-3]
    tau2 = t0 - tm
    a = (2.0 * tau1 + tau2) / (tau1 * (tau1 + tau2))
    b = -(tau1 + tau2) / (tau1 * tau2)
    c = tau1 / (tau2 * (tau1 + tau2))
    return a * s1 + b * s0 + c * sm


def entropy_residual(
    space: FESpace,
    S_history: Sequence[Tuple[float, np.ndarray]],
    u: np.ndarray,
) -> np.ndarray:
    """Nodal residual R_i = sum_K (1/|K|) int_K |dS/dt + div(u S)| phi_i.

    ``S_history`` holds (time, nodal S) pairs, most recent last; ``u`` is the
    nodal velocity (2, n_dofs).  Raises InsufficientHistory on the first step.
    """
    S_dot = _time_derivative(S_history)
    S = S_history[-1][1]
    ref_measure = 1.0 if space.mesh.dim == 1 else 0.5
    out = np.zeros(space.n_dofs)
    _kernels.entropy_residual_nodal(
        space.conn,
        space.basis_val,
        space.basis_grad,
        space.inv_jac_T,
        space.qweights / ref_measure,
        np.ascontiguousarray(S_dot),
        np.ascontiguousarray(S),
        np.ascontiguousarray(u),
        out,
    )
    return out


LOCAL_NORMALIZATION_FLOOR = 0.05


def patch_entropy_variation(space: FESpace, S: np.ndarray) -> np.ndarray:
    """Per node, max minus min of S over the one-ring element patch."""
    Sc = S[space.conn]
    cmax = Sc.max(axis=1)
    cmin = Sc.min(axis=1)
    nmax = np.full(space.n_dofs, -np.inf)
    nmin = np.full(space.n_dofs, np.inf)
    nb = space.conn.shape[1]
    flat = space.conn.ravel()
    np.maximum.at(nmax, flat, np.repeat(cmax, nb))
    np.minimum.at(nmin, flat, np.repeat(cmin, nb))
    return nmax - nmin


def high_order_viscosity(
    space: FESpace,
    R: np.ndarray,
    h_field: np.ndarray,
    S: np.ndarray,
    lumped: np.ndarray,
    c_E: float = 1.0,
    local_floor: float = LOCAL_NORMALIZATION_FLOOR,
) -> np.ndarray:
    """Residual-proportional coefficient eps_H,i = c_E h_i^2 |R_i| / n_i.

    The normalization n_i carries the entropy unit (which gives eps_H the
    units of a diffusivity): the one-ring variation of S floored by a
    fraction of the global variation ||S - mean(S)||_inf (lumped-mass
    mean).  The local part makes the coefficient saturate its first-order
    cap across discontinuities of any strength; the global floor keeps
    smooth extrema from dividing by a vanishing variation.  A globally
    uniform entropy (variation below the guard) gives eps_H = 0.
    """
    mean_S = float(lumped @ S) / float(lumped.sum())
    global_var = float(np.max(np.abs(S - mean_S)))
    if global_var < NORMALIZATION_GUARD:
        return np.zeros_like(R)
    denom = np.maximum(patch_entropy_variation(space, S), local_floor * global_var)
    # the quadratic length scale is the element diameter (per basis order),
    # twice the circumradius the nodal h field carries
    return c_E * (2.0 * h_field) ** 2 * np.abs(R) / denom


def entropy_viscosity(
    space: FESpace,
    R: np.ndarray,
    h_field: np.ndarray,
    eps_low: np.ndarray,
    S: np.ndarray,
    lumped: np.ndarray,
    c_E: float = 1.0,
) -> np.ndarray:
    """Nodal min of the low-order cap and the residual-based coefficient."""
    return np.minimum(eps_low, high_order_viscosity(space, R, h_field, S, lumped, c_E))
