"""Explicit SSP Runge-Kutta integration with CFL-adaptive time steps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .fespace import FESpace
from .thermo import ConservedState, GasModel, max_wave_speed


@dataclass(frozen=True)
class SSPScheme:
    """Shu-Osher form: stage i is a convex combination of earlier iterates
    plus forward-Euler pieces, Y_i = sum_j alpha[i,j] Y_j + dt beta[i,j] L(Y_j).
    """

    id: str
    order: int
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def n_stages(self) -> int:
        return self.alpha.shape[0]


def _ssprk33() -> SSPScheme:
    a = np.zeros((3, 3))
    b = np.zeros((3, 3))
    a[0, 0] = 1.0
    b[0, 0] = 1.0
    a[1, 0], a[1, 1] = 3.0 / 4.0, 1.0 / 4.0
    b[1, 1] = 1.0 / 4.0
    a[2, 0], a[2, 2] = 1.0 / 3.0, 2.0 / 3.0
    b[2, 2] = 2.0 / 3.0
    return SSPScheme(id="SSPRK33", order=3, alpha=a, beta=b)


def _ssprk54() -> SSPScheme:
    # five-stage fourth-order optimal SSP scheme (Spiteri-Ruuth coefficients)
    a = np.zeros((5, 5))
    b = np.zeros((5, 5))
    a[0, 0] = 1.0
    b[0, 0] = 0.391752226571890
    a[1, 0], a[1, 1] = 0.444370493651235, 0.555629506348765
    b[1, 1] = 0.368410593050371
    a[2, 0], a[2, 2] = 0.620101851488403, 0.379898148511597
    b[2, 2] = 0.251891774271694
    a[3, 0], a[3, 3] = 0.178079954393132, 0.821920045606868
    b[3, 3] = 0.544974750228521
    a[4, 2], a[4, 3], a[4, 4] = 0.517231671970585, 0.096059710526147, 0.386708617503269
    b[4, 3], b[4, 4] = 0.063692468666290, 0.226007483236906
    return SSPScheme(id="SSPRK54", order=4, alpha=a, beta=b)


SSPRK33 = _ssprk33()
SSPRK54 = _ssprk54()


def scheme_for_degree(degree: int) -> SSPScheme:
    """Pairing rule: P1/P2 run third order, P3 runs fourth order."""
    return SSPRK54 if degree >= 3 else SSPRK33


@dataclass
class TimeController:
    """CFL number and clock for an adaptive explicit run."""

    cfl: float = 0.3
    t: float = 0.0
    t_final: float = np.inf
    dt_history: list = field(default_factory=list)

    def advance(self, dt: float):
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.t += dt
        self.dt_history.append(dt)

    @property
    def done(self) -> bool:
        return self.t >= self.t_final * (1.0 - 1e-12)


def nodal_max_speed(space: FESpace, U: np.ndarray, gas: GasModel) -> np.ndarray:
    """Per node, the largest directional wave speed over coordinate axes."""
    state = ConservedState(rho=U[0], m=U[1:3].T, E=U[3], B=U[4:6].T)
    speeds = max_wave_speed(state, np.array([1.0, 0.0]), gas)
    if space.mesh.dim == 2:
        speeds = np.maximum(speeds, max_wave_speed(state, np.array([0.0, 1.0]), gas))
    return speeds


def compute_dt(
    space: FESpace,
    U: np.ndarray,
    h_field: np.ndarray,
    cfl: float,
    gas: GasModel,
    t: float = 0.0,
    t_final: Optional[float] = None,
) -> float:
    """dt = cfl * min(h) / max(wave speed), clipped so t + dt <= t_final."""
    speed = nodal_max_speed(space, U, gas)
    dt = cfl * float(np.min(h_field)) / float(np.max(speed))
    if t_final is not None:
        dt = min(dt, t_final - t)
    return dt


def step(
    scheme: SSPScheme,
    rhs: Callable[[np.ndarray], np.ndarray],
    U: np.ndarray,
    dt: float,
    stage_hook: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> np.ndarray:
    """One SSP step; ``stage_hook`` runs after every stage (constraints,
    divergence cleaning, dependent-variable consistency)."""
    iterates = [U]
    evals: list = []
    for i in range(scheme.n_stages):
        acc = np.zeros_like(U)
        for j in range(i + 1):
            a = scheme.alpha[i, j]
            if a != 0.0:
                acc += a * iterates[j]
            b = scheme.beta[i, j]
            if b != 0.0:
                while len(evals) <= j:
                    evals.append(rhs(iterates[len(evals)]))
                acc += (dt * b) * evals[j]
        if stage_hook is not None:
            acc = stage_hook(acc)
        iterates.append(acc)
    return iterates[-1]
