"""Ideal-gas thermodynamics for MHD states.

Closures (pressure, temperature, specific entropy), wave speed bounds, and
numeric verifiers for the convexity/definiteness properties of the entropy
that underpin the parabolic-regularization analysis.  All operations accept
scalars or numpy arrays and are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    NonpositiveDensity,
    NonpositiveInternalEnergy,
    NonpositivePressure,
)


@dataclass(frozen=True)
class GasModel:
    """Ideal gas with adiabatic constant ``gamma`` and heat capacity ``c_v``.

    ``c_p = gamma * c_v``.  Entropy diagnostics conventionally use c_v = 1;
    the convexity checkers honor whatever c_v the model carries.
    """

    gamma: float
    c_v: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must be > 1, got {self.gamma}")
        if not self.c_v > 0.0:
            raise ValueError(f"c_v must be > 0, got {self.c_v}")

    @property
    def c_p(self) -> float:
        return self.gamma * self.c_v


@dataclass(frozen=True)
class ConservedState:
    """Conserved variables (rho, m, E, B); m and B have d components.

    Fields may be scalars/(d,) vectors for a point state, or arrays with a
    leading sample axis for batches of states.
    """

    rho: np.ndarray
    m: np.ndarray
    E: np.ndarray
    B: np.ndarray


@dataclass(frozen=True)
class PrimitiveState:
    """Derived quantities (rho, u, p, T, e, s) of an admissible state."""

    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray
    T: np.ndarray
    e: np.ndarray
    s: np.ndarray


@dataclass(frozen=True)
class EntropyPairValue:
    """Mathematical entropy S = rho*s/(gamma-1) and its flux u*S."""

    S: np.ndarray
    F_S: np.ndarray


def _vec_sq(v: np.ndarray) -> np.ndarray:
    """Squared Euclidean norm along the last (component) axis."""
    v = np.asarray(v, dtype=float)
    return np.sum(v * v, axis=-1)


def internal_energy_density(U: ConservedState) -> np.ndarray:
    """rho*e = E - |m|^2/(2 rho) - |B|^2/2."""
    rho = np.asarray(U.rho, dtype=float)
    return np.asarray(U.E, dtype=float) - 0.5 * _vec_sq(U.m) / rho - 0.5 * _vec_sq(U.B)


def primitive_from_conserved(U: ConservedState, gas: GasModel) -> PrimitiveState:
    """Recover (rho, u, p, T, e, s) from a conserved state.

    Raises NonpositiveDensity / NonpositiveInternalEnergy when the state is
    not admissible; the caller decides whether that aborts the run.
    """
    rho = np.asarray(U.rho, dtype=float)
    if np.any(rho <= 0.0) or np.any(np.isnan(rho)):
        raise NonpositiveDensity(f"min rho = {np.min(rho)}")
    rhoe = internal_energy_density(U)
    if np.any(rhoe <= 0.0) or np.any(np.isnan(rhoe)):
        raise NonpositiveInternalEnergy(f"min rho*e = {np.min(rhoe)}")
    u = np.asarray(U.m, dtype=float) / rho[..., None]
    e = rhoe / rho
    p = (gas.gamma - 1.0) * rhoe
    T = p / rho
    s = gas.c_v * np.log(p / rho**gas.gamma)
    return PrimitiveState(rho=rho, u=u, p=p, T=T, e=e, s=s)


def conserved_from_primitive(rho, u, p, B, gas: GasModel) -> ConservedState:
    """Assemble (rho, m, E, B) from primitive inputs.

    E = p/(gamma-1) + rho|u|^2/2 + |B|^2/2.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0):
        raise NonpositiveDensity(f"min rho = {np.min(rho)}")
    u = np.asarray(u, dtype=float)
    B = np.asarray(B, dtype=float)
    p = np.asarray(p, dtype=float)
    m = rho[..., None] * u
    E = p / (gas.gamma - 1.0) + 0.5 * rho * _vec_sq(u) + 0.5 * _vec_sq(B)
    return ConservedState(rho=rho, m=m, E=E, B=B)


def specific_entropy(rho, p, gas: GasModel) -> np.ndarray:
    """s = c_v ln(p / rho^gamma); requires rho > 0 and p > 0."""
    rho = np.asarray(rho, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(rho <= 0.0):
        raise NonpositiveDensity(f"min rho = {np.min(rho)}")
    if np.any(p <= 0.0) or np.any(np.isnan(p)):
        raise NonpositivePressure(f"min p = {np.min(p)}")
    return gas.c_v * np.log(p / rho**gas.gamma)


def entropy_pair(U: ConservedState, gas: GasModel) -> EntropyPairValue:
    """Entropy S = rho*s/(gamma-1) with the c_v = 1 convention, flux u*S."""
    prim = primitive_from_conserved(U, gas)
    s_unit = np.log(prim.p / prim.rho**gas.gamma)
    S = prim.rho * s_unit / (gas.gamma - 1.0)
    F_S = prim.u * np.asarray(S)[..., None]
    return EntropyPairValue(S=S, F_S=F_S)


def fast_speed(rho, p, B, n, gas: GasModel) -> np.ndarray:
    """Fast magnetosonic speed in unit direction n.

    c_f^2 = (a^2 + b^2 + sqrt((a^2+b^2)^2 - 4 a^2 b_n^2)) / 2 with
    a^2 = gamma p / rho, b^2 = |B|^2/rho, b_n^2 = (B.n)^2/rho.
    """
    rho = np.asarray(rho, dtype=float)
    p = np.asarray(p, dtype=float)
    a2 = gas.gamma * p / rho
    b2 = _vec_sq(B) / rho
    bn2 = np.sum(np.asarray(B, dtype=float) * n, axis=-1) ** 2 / rho
    disc = (a2 + b2) ** 2 - 4.0 * a2 * bn2
    cf2 = 0.5 * (a2 + b2 + np.sqrt(np.maximum(disc, 0.0)))
    return np.sqrt(cf2)


def max_wave_speed(U: ConservedState, n, gas: GasModel) -> np.ndarray:
    """|u.n| + c_f(n): dominates every characteristic speed in direction n."""
    n = np.asarray(n, dtype=float)
    if abs(n @ n - 1.0) > 1e-12:
        raise ValueError(f"direction must be a unit vector, |n|^2 = {n @ n}")
    prim = primitive_from_conserved(U, gas)
    if np.any(prim.p <= 0.0):
        raise NonpositivePressure(f"min p = {np.min(prim.p)}")
    un = np.sum(prim.u * n, axis=-1)
    return np.abs(un) + fast_speed(prim.rho, prim.p, U.B, n, gas)


# --- entropy partial derivatives of s(rho, e) = c_v ln((gamma-1) e rho^(1-gamma)) ---

def entropy_partials(rho, e, gas: GasModel) -> dict:
    """First and second partials of s(rho, e) for the ideal gas."""
    rho = np.asarray(rho, dtype=float)
    e = np.asarray(e, dtype=float)
    cv, g = gas.c_v, gas.gamma
    return {
        "s_rho": cv * (1.0 - g) / rho,
        "s_e": cv / e,
        "s_rhorho": cv * (g - 1.0) / rho**2,
        "s_ee": -cv / e**2,
        "s_rhoe": np.zeros(np.broadcast(rho, e).shape),
    }


def j1_matrix(state: ConservedState, gas: GasModel, epsilon: float) -> np.ndarray:
    """2x2 coefficient matrix of the entropy-dissipation quadratic form.

    [[eps/rho * d_rho(rho^2 s_rho), eps rho s_rhoe],
     [eps rho s_rhoe,               eps rho s_ee ]]
    Negative definite for any admissible ideal-gas state.
    """
    prim = primitive_from_conserved(state, gas)
    d = entropy_partials(prim.rho, prim.e, gas)
    # d_rho(rho^2 s_rho) = 2 rho s_rho + rho^2 s_rhorho
    drho_rho2srho = 2.0 * prim.rho * d["s_rho"] + prim.rho**2 * d["s_rhorho"]
    j11 = epsilon / prim.rho * drho_rho2srho
    j12 = epsilon * prim.rho * d["s_rhoe"]
    j22 = epsilon * prim.rho * d["s_ee"]
    return np.array([[j11, j12], [j12, j22]], dtype=float)


@dataclass(frozen=True)
class EntropyFunction:
    """Twice differentiable f(s) with its first two derivatives."""

    f: Callable[[float], float]
    df: Callable[[float], float]
    d2f: Callable[[float], float]
    name: str = "f"


@dataclass(frozen=True)
class ConvexityReport:
    """Outcome of the generalized-entropy convexity test at one state."""

    cond1: bool                 # f'(s) > 0
    cond2: bool                 # f'(s)/c_p - f''(s) > 0
    hessian_pd: bool            # transformed Hessian positive definite
    eigenvalues: np.ndarray = field(repr=False, default=None)
    transformed_hessian: np.ndarray = field(repr=False, default=None)


def _hessian_blocks(prim: PrimitiveState, gas: GasModel, fn: EntropyFunction):
    """Pieces of the congruence-transformed Hessian of -rho f(s)."""
    d = entropy_partials(prim.rho, prim.e, gas)
    s = float(prim.s)
    fp, fpp = fn.df(s), fn.d2f(s)
    rho = float(prim.rho)
    # 2x2 block over the (rho, E) directions after the transformation
    h2 = np.array(
        [
            [2.0 * d["s_rho"] + rho * d["s_rhorho"], rho * d["s_rhoe"]],
            [rho * d["s_rhoe"], rho * d["s_ee"]],
        ]
    )
    grad = np.array([d["s_rho"], d["s_e"]], dtype=float)
    m2 = -fp * h2 - fpp * rho * np.outer(grad, grad)
    return m2, fp * rho * d["s_e"], fp * d["s_e"]


def generalized_entropy_convexity_check(
    state: ConservedState, gas: GasModel, fn: EntropyFunction
) -> ConvexityReport:
    """Test strict convexity of -rho f(s) in the conserved variables.

    Assembles the congruence-transformed Hessian: a 2x2 coupling block plus
    detached eigenvalues f'(s) rho s_e (momentum directions, multiplicity d)
    and f'(s) s_e (magnetic directions), checks positive definiteness
    numerically, and reports it next to the two closed-form inequalities
    (f' > 0 and f'/c_p - f'' > 0) that characterize convexity.
    """
    prim = primitive_from_conserved(state, gas)
    m2, lam_m, lam_b = _hessian_blocks(prim, gas, fn)
    d = np.asarray(state.B, dtype=float).shape[-1]
    n = 2 + 2 * d
    H = np.zeros((n, n))
    H[0, 0], H[0, 1 + d], H[1 + d, 0], H[1 + d, 1 + d] = (
        m2[0, 0], m2[0, 1], m2[1, 0], m2[1, 1],
    )
    for i in range(d):
        H[1 + i, 1 + i] = lam_m
        H[2 + d + i, 2 + d + i] = lam_b
    eigs = np.linalg.eigvalsh(H)
    s = float(prim.s)
    cond1 = fn.df(s) > 0.0
    cond2 = fn.df(s) / gas.c_p - fn.d2f(s) > 0.0
    return ConvexityReport(
        cond1=bool(cond1),
        cond2=bool(cond2),
        hessian_pd=bool(np.all(eigs > 0.0)),
        eigenvalues=eigs,
        transformed_hessian=H,
    )


def generalized_entropy_hessian(
    state: ConservedState, gas: GasModel, fn: EntropyFunction
) -> np.ndarray:
    """Full Hessian of -rho f(s) in conserved variables (untransformed).

    Used to cross-check the transformed form against finite differences.
    """
    prim = primitive_from_conserved(state, gas)
    rho = float(prim.rho)
    u = np.asarray(prim.u, dtype=float)
    B = np.asarray(state.B, dtype=float)
    e = float(prim.e)
    d = B.shape[-1]
    n = 2 + 2 * d
    par = entropy_partials(rho, e, gas)

    rho_U = np.zeros(n)
    rho_U[0] = 1.0
    e_U = np.concatenate(([0.5 * u @ u - e], -u, [1.0], -B)) / rho
    m = rho * u
    E = float(np.asarray(state.E))
    e_UU = np.zeros((n, n))
    e_UU[0, 0] = 2.0 * E / rho**3 - 3.0 * (m @ m) / rho**4 - (B @ B) / rho**3
    e_UU[0, 1:1 + d] = 2.0 * m / rho**3
    e_UU[1:1 + d, 0] = 2.0 * m / rho**3
    e_UU[0, 1 + d] = -1.0 / rho**2
    e_UU[1 + d, 0] = -1.0 / rho**2
    e_UU[0, 2 + d:] = B / rho**2
    e_UU[2 + d:, 0] = B / rho**2
    for i in range(d):
        e_UU[1 + i, 1 + i] = -1.0 / rho**2
        e_UU[2 + d + i, 2 + d + i] = -1.0 / rho

    s_U = par["s_rho"] * rho_U + par["s_e"] * e_U
    s_UU = (
        par["s_rhorho"] * np.outer(rho_U, rho_U)
        + par["s_rhoe"] * (np.outer(rho_U, e_U) + np.outer(e_U, rho_U))
        + par["s_ee"] * np.outer(e_U, e_U)
        + par["s_e"] * e_UU
    )
    Hmat = np.outer(rho_U, s_U) + np.outer(s_U, rho_U) + rho * s_UU
    s = float(prim.s)
    return -fn.df(s) * Hmat - fn.d2f(s) * rho * np.outer(s_U, s_U)


def sample_admissible_states(
    rng: np.random.Generator, n: int, d: int = 2
) -> ConservedState:
    """Random admissible states spanning the benchmark regimes.

    rho and e log-uniform in [0.05, 10], |u| and |B| uniform in [0, 5].
    """
    rho = np.exp(rng.uniform(np.log(0.05), np.log(10.0), size=n))
    e = np.exp(rng.uniform(np.log(0.05), np.log(10.0), size=n))
    udir = rng.normal(size=(n, d))
    udir /= np.linalg.norm(udir, axis=1, keepdims=True)
    u = udir * rng.uniform(0.0, 5.0, size=(n, 1))
    bdir = rng.normal(size=(n, d))
    bdir /= np.linalg.norm(bdir, axis=1, keepdims=True)
    B = bdir * rng.uniform(0.0, 5.0, size=(n, 1))
    m = rho[:, None] * u
    E = rho * e + 0.5 * rho * np.sum(u * u, axis=1) + 0.5 * np.sum(B * B, axis=1)
    return ConservedState(rho=rho, m=m, E=E, B=B)
