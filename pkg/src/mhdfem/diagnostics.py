"""Error norms, convergence rates, and entropy-principle monitors."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .divclean import divergence_l2
from .fespace import FESpace
from .thermo import GasModel

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# error norms and convergence rates
# ---------------------------------------------------------------------------

@dataclass
class ErrorReport:
    """L1/L2 errors of selected components on one mesh."""

    dofs: int
    degree: int
    dim: int
    errors: Dict[str, Tuple[float, float]]      # component -> (L1, L2)


def _interp_at_quadrature(space: FESpace, nodal: np.ndarray, val: np.ndarray):
    """Values of stacked nodal fields at the quadrature points: (..., nc, nq)."""
    loc = nodal[..., space.conn]                # (..., nc, nb)
    return np.einsum("...cb,bq->...cq", loc, val)


def l2_norm_lumped(lumped: np.ndarray, nodal: np.ndarray) -> float:
    """Lumped-mass L2 norm of a nodal field (vector fields sum components)."""
    nodal = np.atleast_2d(nodal)
    return float(np.sqrt(np.sum(lumped * np.sum(nodal * nodal, axis=0))))


def error_norms(
    space: FESpace,
    U: np.ndarray,
    reference: Callable,
    t: float,
    components: Sequence[str] = ("u", "B"),
    exactness: Optional[int] = None,
) -> ErrorReport:
    """Quadrature L1/L2 norms of u_h and B_h against a reference solution.

    The reference is evaluated pointwise; a rule of exactness 2k+3 is used
    by default so the quadrature does not pollute the measured rates.
    """
    if exactness is None:
        exactness = 2 * space.degree + 3
    qw, val, _ = space.rule_tables(exactness)
    pts = space.quad_points_physical(exactness)
    npts = pts.reshape(-1, space.mesh.dim)
    rho_e, u_e, p_e, B_e = reference(npts, t)
    w = (qw[None, :] * space.abs_det_jac[:, None]).ravel()

    fields = {}
    Uq = _interp_at_quadrature(space, U, val)
    rho_h = Uq[0].ravel()
    fields["u"] = (
        np.column_stack([Uq[1].ravel() / rho_h, Uq[2].ravel() / rho_h]),
        np.asarray(u_e, dtype=float),
    )
    fields["B"] = (
        np.column_stack([Uq[4].ravel(), Uq[5].ravel()]),
        np.asarray(B_e, dtype=float),
    )
    fields["rho"] = (rho_h[:, None], np.asarray(rho_e, dtype=float)[:, None])

    errors = {}
    for comp in components:
        num, ref = fields[comp]
        diff = np.linalg.norm(num - ref, axis=1)
        errors[comp] = (float(w @ diff), float(np.sqrt(w @ diff**2)))
    return ErrorReport(
        dofs=2 * space.n_dofs, degree=space.degree, dim=space.mesh.dim, errors=errors
    )


@dataclass
class ConvergenceTable:
    """Errors and observed rates over a refinement sequence."""

    component: str
    dofs: List[int]
    l1: List[float]
    l2: List[float]
    rates_l1: List[Optional[float]]
    rates_l2: List[Optional[float]]

    def format_text(self) -> str:
        out = io.StringIO()
        out.write(f"{'#DOFs':>10} {'L1':>12} {'Rate':>6} {'L2':>12} {'Rate':>6}   [{self.component}]\n")
        for i, n in enumerate(self.dofs):
            r1 = "--" if self.rates_l1[i] is None else f"{self.rates_l1[i]:.2f}"
            r2 = "--" if self.rates_l2[i] is None else f"{self.rates_l2[i]:.2f}"
            out.write(f"{n:>10} {self.l1[i]:>12.3e} {r1:>6} {self.l2[i]:>12.3e} {r2:>6}\n")
        return out.getvalue()


def _rate(e_prev: float, e_cur: float, n_prev: int, n_cur: int, dim: int) -> float:
    ratio = (n_cur / n_prev) ** (1.0 / dim)     # DOF-based h ratio
    return float(np.log(e_prev / e_cur) / np.log(ratio))


def convergence_table(reports: Sequence[ErrorReport], component: str) -> ConvergenceTable:
    """Observed rates between consecutive refinements of one component."""
    dofs = [r.dofs for r in reports]
    l1 = [r.errors[component][0] for r in reports]
    l2 = [r.errors[component][1] for r in reports]
    rates_l1: List[Optional[float]] = [None]
    rates_l2: List[Optional[float]] = [None]
    for i in range(1, len(reports)):
        dim = reports[i].dim
        rates_l1.append(_rate(l1[i - 1], l1[i], dofs[i - 1], dofs[i], dim))
        rates_l2.append(_rate(l2[i - 1], l2[i], dofs[i - 1], dofs[i], dim))
    return ConvergenceTable(
        component=component, dofs=dofs, l1=l1, l2=l2,
        rates_l1=rates_l1, rates_l2=rates_l2,
    )


def errors_csv(tables: Sequence[ConvergenceTable], degree: int) -> str:
    """errors.csv payload: dofs, degree, component, L1, L2, rate (L2-based)."""
    lines = ["dofs,degree,component,L1,L2,rate"]
    for tab in tables:
        for i, n in enumerate(tab.dofs):
            rate = "" if tab.rates_l2[i] is None else repr(tab.rates_l2[i])
            lines.append(
                f"{n},{degree},{tab.component},{tab.l1[i]!r},{tab.l2[i]!r},{rate}"
            )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# entropy-principle monitors
# ---------------------------------------------------------------------------

@dataclass
class EntropyHistory:
    """Time series of nodal minima and the magnetic divergence norm."""

    times: List[float] = field(default_factory=list)
    min_s: List[float] = field(default_factory=list)
    min_rho: List[float] = field(default_factory=list)
    min_rhoe: List[float] = field(default_factory=list)
    div_B: List[float] = field(default_factory=list)
    violations: int = 0

    def to_csv(self) -> str:
        lines = ["t,min_s,min_rho,min_rhoe,divB"]
        for i, t in enumerate(self.times):
            lines.append(
                f"{t!r},{self.min_s[i]!r},{self.min_rho[i]!r},"
                f"{self.min_rhoe[i]!r},{self.div_B[i]!r}"
            )
        return "\n".join(lines) + "\n"


def min_entropy_monitor(
    history: EntropyHistory,
    space: FESpace,
    U: np.ndarray,
    t: float,
    gas: GasModel,
    with_divergence: bool = True,
) -> EntropyHistory:
    """Append nodal minima of s, rho, rho*e (and ||div B||) at time t.

    The entropy is evaluated pointwise from nodal pressure and density with
    the c_v = 1 convention.  Inadmissible nodes are counted as violations
    and logged, not raised; the row still records the field minima.
    """
    rho = U[0]
    rhoe = U[3] - 0.5 * (U[1] ** 2 + U[2] ** 2) / rho - 0.5 * (U[4] ** 2 + U[5] ** 2)
    p = (gas.gamma - 1.0) * rhoe
    ok = (rho > 0.0) & (p > 0.0)
    n_bad = int(np.sum(~ok))
    if n_bad:
        history.violations += n_bad
        log.debug("%d inadmissible nodes at t=%g", n_bad, t)
        min_s = float("nan") if not np.any(ok) else float(
            np.min(np.log(p[ok] / rho[ok] ** gas.gamma))
        )
    else:
        min_s = float(np.min(np.log(p / rho**gas.gamma)))
    history.times.append(float(t))
    history.min_s.append(min_s)
    history.min_rho.append(float(np.min(rho)))
    history.min_rhoe.append(float(np.min(rhoe)))
    history.div_B.append(divergence_l2(space, U[4:6]) if with_divergence else 0.0)
    return history


def overshoot_metric(values: np.ndarray, lo: float, hi: float) -> Dict[str, float]:
    """Positive parts of the excursions beyond [lo, hi]."""
    values = np.asarray(values, dtype=float)
    return {
        "max_over": float(max(np.max(values) - hi, 0.0)),
        "max_under": float(max(lo - np.min(values), 0.0)),
    }
