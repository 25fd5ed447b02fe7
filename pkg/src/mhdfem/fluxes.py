"""Pointwise MHD fluxes and the semi-discrete weak-form residual.

The inviscid flux splits into a gas-dynamic part and a magnetic part; two
viscous flux families regularize the system: the parabolic flux (equal
Laplacian weights on every conserved variable, optionally without the mass
row) and the physically-motivated resistive flux (shear stress, heat
conduction, magnetic diffusion).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels
from .errors import InadmissibleState
from .fespace import FESpace, MassOperators, build_mass_operators
from .thermo import ConservedState, GasModel, primitive_from_conserved

# component indices of the stacked nodal state array (6, n_dofs)
RHO, MX, MY, EN, BX, BY = range(6)

CoefField = Union[float, np.ndarray]


@dataclass(frozen=True)
class Monolithic:
    """Equal-weight parabolic flux: eps * grad of every conserved variable."""

    eps: CoefField


@dataclass(frozen=True)
class MonolithicNoMass:
    """Parabolic flux with the mass-equation regularization dropped."""

    eps: CoefField


@dataclass(frozen=True)
class Resistive:
    """Resistive flux: shear stress, heat conduction, magnetic diffusion."""

    mu: CoefField
    kappa: CoefField
    eta: CoefField
    lam: CoefField = 0.0


ViscousFluxChoice = Union[Monolithic, MonolithicNoMass, Resistive]


@dataclass(frozen=True)
class FluxTensors:
    """Inviscid flux pair; each is (components, d) at a point state."""

    F_E: np.ndarray
    F_B: np.ndarray


@dataclass(frozen=True)
class Gradients:
    """Spatial gradients at an evaluation point (rows = components)."""

    grad_rho: Optional[np.ndarray] = None
    grad_m: Optional[np.ndarray] = None
    grad_E: Optional[np.ndarray] = None
    grad_B: Optional[np.ndarray] = None
    grad_u: Optional[np.ndarray] = None
    grad_T: Optional[np.ndarray] = None


def maxwell_stress(B) -> np.ndarray:
    """-(1/2)|B|^2 I + B x B (symmetric)."""
    B = np.asarray(B, dtype=float)
    d = B.shape[-1]
    return np.outer(B, B) - 0.5 * (B @ B) * np.eye(d)


def inviscid_flux(U: ConservedState, gas: GasModel) -> FluxTensors:
    """Gas-dynamic and magnetic flux tensors at one point state.

    Rows are components, columns are spatial directions, and divergences
    contract the second index.  F_E rows: (m; m x u + p I; u (E+p); 0).
    F_B rows: (0; -MS; -MS.u; induction) with MS the Maxwell stress and
    the induction block B_i u_j - u_i B_j, the antisymmetric tensor whose
    row divergence reproduces Faraday's law with the ideal electric field.
    """
    prim = primitive_from_conserved(U, gas)
    m = np.asarray(U.m, dtype=float)
    B = np.asarray(U.B, dtype=float)
    u = np.asarray(prim.u)
    d = m.shape[-1]
    E = float(np.asarray(U.E))
    p = float(np.asarray(prim.p))

    F_E = np.zeros((2 + 2 * d, d))
    F_E[0] = m
    F_E[1:1 + d] = np.outer(m, u) + p * np.eye(d)
    F_E[1 + d] = u * (E + p)

    ms = maxwell_stress(B)
    F_B = np.zeros((2 + 2 * d, d))
    F_B[1:1 + d] = -ms
    F_B[1 + d] = -(ms @ u)
    F_B[2 + d:] = np.outer(B, u) - np.outer(u, B)
    return FluxTensors(F_E=F_E, F_B=F_B)


def viscous_flux(choice: ViscousFluxChoice, state: ConservedState,
                 gradients: Gradients, gas: Optional[GasModel] = None) -> np.ndarray:
    """Viscous flux tensor (components, d) at one point.

    The parabolic variants need gradients of all conserved variables; the
    resistive variant needs grad_u, grad_T, grad_B plus the state's u, B.
    """
    if isinstance(choice, (Monolithic, MonolithicNoMass)):
        need = ("grad_rho", "grad_m", "grad_E", "grad_B")
        if any(getattr(gradients, n) is None for n in need):
            raise ValueError(f"parabolic flux needs gradients {need}")
        gm = np.asarray(gradients.grad_m, dtype=float)
        d = gm.shape[-1]
        F = np.zeros((2 + gm.shape[0] * 2, d))
        F[0] = gradients.grad_rho
        F[1:1 + gm.shape[0]] = gm
        F[1 + gm.shape[0]] = gradients.grad_E
        F[2 + gm.shape[0]:] = gradients.grad_B
        F *= float(choice.eps)
        if isinstance(choice, MonolithicNoMass):
            F[0] = 0.0
        return F

    need = ("grad_u", "grad_T", "grad_B")
    if any(getattr(gradients, n) is None for n in need):
        raise ValueError(f"resistive flux needs gradients {need}")
    gu = np.asarray(gradients.grad_u, dtype=float)
    gB = np.asarray(gradients.grad_B, dtype=float)
    gT = np.asarray(gradients.grad_T, dtype=float)
    nvec, d = gu.shape
    u = np.asarray(state.m, dtype=float) / float(np.asarray(state.rho))
    B = np.asarray(state.B, dtype=float)

    full_gu = np.zeros((nvec, nvec))
    full_gu[:, :d] = gu
    div_u = np.trace(gu[:d, :d])
    tau = float(choice.mu) * (full_gu + full_gu.T) - float(choice.lam) * div_u * np.eye(nvec)
    full_gB = np.zeros((nvec, nvec))
    full_gB[:, :d] = gB
    curl = full_gB - full_gB.T

    F = np.zeros((2 + 2 * nvec, d))
    F[1:1 + nvec] = tau[:, :d]
    F[1 + nvec] = u @ tau[:, :d] + float(choice.kappa) * gT + float(choice.eta) * (B @ curl[:, :d])
    F[2 + nvec:] = float(choice.eta) * curl[:, :d]
    return F


# ---------------------------------------------------------------------------
# semi-discrete residual
# ---------------------------------------------------------------------------

def _coefficient_fields(choice: ViscousFluxChoice, n: int):
    """Stack nodal coefficient fields (eps/mu, lam, kappa, eta) and variant code."""
    def expand(v):
        arr = np.asarray(v, dtype=float)
        return np.full(n, float(arr)) if arr.ndim == 0 else arr

    visc = np.zeros((4, n))
    if isinstance(choice, Monolithic):
        visc[0] = expand(choice.eps)
        code = _kernels.MONOLITHIC
    elif isinstance(choice, MonolithicNoMass):
        visc[0] = expand(choice.eps)
        code = _kernels.MONOLITHIC_NO_MASS
    elif isinstance(choice, Resistive):
        visc[0] = expand(choice.mu)
        visc[1] = expand(choice.lam)
        visc[2] = expand(choice.kappa)
        visc[3] = expand(choice.eta)
        code = _kernels.RESISTIVE
    else:
        raise TypeError(f"unknown viscous flux choice {choice!r}")
    return visc, code


def assemble_weak_residual(
    space: FESpace, U: np.ndarray, choice: ViscousFluxChoice, gas: GasModel,
    form: str = "ibp", strict: bool = True,
) -> np.ndarray:
    """Weak-form right side of the regularized system.

    ``form="ibp"`` integrates the inviscid divergence by parts,
    (F, grad phi_i) - (F_visc, grad phi_i), which keeps the totals of all
    conserved components constant to roundoff under periodic boundaries.
    ``form="strong"`` keeps the volume term -(div F, phi_i); the two differ
    by quadrature aliasing of the rational flux only.  Boundary integrals
    are omitted: periodic boundaries have none, and Dirichlet values are
    injected strongly each stage.

    ``strict=False`` tolerates nonpositive interpolated internal energy at
    quadrature points (the flux stays algebraic in the state); density
    must be positive either way.
    """
    if form not in ("ibp", "strong"):
        raise ValueError(f"form must be 'ibp' or 'strong', got {form!r}")
    visc, code = _coefficient_fields(choice, space.n_dofs)
    out = np.zeros((6, space.n_dofs))
    status, cell, qp = _kernels.rhs_volume(
        space.conn,
        space.basis_val,
        space.basis_grad,
        space.inv_jac_T,
        space.abs_det_jac,
        space.qweights,
        np.ascontiguousarray(U),
        visc,
        gas.gamma,
        code,
        form == "ibp",
        strict,
        out,
    )
    if status != 0:
        what = "density" if status == 1 else "internal energy"
        raise InadmissibleState(
            f"nonpositive {what} at cell {cell}, quadrature point {qp}",
            cell=cell,
            qpoint=qp,
        )
    return out


def semidiscrete_rhs(
    space: FESpace,
    U: np.ndarray,
    choice: ViscousFluxChoice,
    gas: GasModel,
    mass: str = "lumped",
    mass_ops: Optional[MassOperators] = None,
    form: str = "ibp",
    strict: bool = True,
) -> np.ndarray:
    """Time derivative of the nodal state: M^{-1} applied to the weak residual."""
    r = assemble_weak_residual(space, U, choice, gas, form=form, strict=strict)
    mass_ops = mass_ops or build_mass_operators(space)
    if mass == "lumped":
        return r / mass_ops.lumped
    if mass == "consistent":
        out = np.empty_like(r)
        for comp in range(6):
            out[comp] = mass_ops.solve_consistent(r[comp])
        return out
    raise ValueError(f"mass must be 'lumped' or 'consistent', got {mass!r}")
