"""Configuration-driven simulation driver, benchmark suites, and CLI.

A run is described by a flat key=value config (file and/or --set overrides).
Every default is resolved up front and echoed into the run manifest, so the
manifest alone reproduces any output file.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .diagnostics import (
    EntropyHistory,
    ErrorReport,
    convergence_table,
    errors_csv,
    error_norms,
    min_entropy_monitor,
)
from .divclean import (
    PoissonSolver,
    clean,
    postclean_consistency,
    postclean_preserve_pressure,
)
from .errors import ConfigError, MHDError, UnknownProblem
from .fespace import (
    FESpace,
    apply_constraints,
    build_interval_mesh,
    build_mass_operators,
    build_triangulated_rectangle,
    mesh_size_field,
)
from .fluxes import Monolithic, MonolithicNoMass, Resistive, semidiscrete_rhs
from .output import ensure_dir, write_fields_csv, write_vtk
from .problems import make_problem, problem_ids, validate_ic
from .thermo import conserved_from_primitive
from .timeint import compute_dt, scheme_for_degree, step
from .viscosity import entropy_residual, first_order_viscosity, high_order_viscosity

_FLUXES = ("monolithic", "monolithic_no_mass", "resistive")
_VISCOSITIES = ("first_order", "entropy", "none")


@dataclass
class SimulationConfig:
    """Fully resolved settings of one simulation."""

    problem: str = "brio_wu"
    resolution: int = 0              # 0 = problem default (cells in 1D, nx=ny in 2D)
    degree: int = 1
    flux: str = "monolithic"
    kappa_factor: float = 1.0        # resistive: kappa = factor * mu
    eta_factor: float = 1.0
    lam_factor: float = 0.0
    viscosity: str = "first_order"
    c_max: float = 0.5
    c_E: float = 1.0
    cfl: float = 0.3
    mass: str = "lumped"
    cleaning: str = "default"        # default | off | per_stage
    clean_method: str = "single_pass"  # per-stage cleaning: single_pass | exact
    clean_tol: float = 1e-6
    postclean: str = "default"       # default | conserve_energy | preserve_pressure
    inviscid_form: str = "ibp"       # ibp | strong
    t_final: float = -1.0            # < 0 = problem default
    mesh_pattern: str = "right"
    n_monitor: int = 1000
    strict_quadrature: bool = False  # abort on rho*e <= 0 at quadrature points
    write_vtk: bool = True
    vortex_p0: float = 1.0
    vortex_mu: float = 5.389489439
    gamma: float = -1.0              # < 0 = problem default
    out: str = ""

    @classmethod
    def field_names(cls):
        return [f for f in cls.__dataclass_fields__]

    @classmethod
    def from_items(cls, items: Dict[str, str]) -> "SimulationConfig":
        cfg = cls()
        for key, raw in items.items():
            if key not in cls.__dataclass_fields__:
                raise ConfigError(f"unknown config key {key!r}")
            kind = cls.__dataclass_fields__[key].type
            try:
                if kind == "int":
                    value: object = int(raw)
                elif kind == "float":
                    value = float(raw)
                elif kind == "bool":
                    value = str(raw).strip().lower() in ("1", "true", "yes", "on")
                else:
                    value = str(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
            setattr(cfg, key, value)
        return cfg

    def validate(self) -> None:
        if self.problem not in problem_ids():
            raise ConfigError(f"unknown problem {self.problem!r}; known: {problem_ids()}")
        if self.flux not in _FLUXES:
            raise ConfigError(f"flux must be one of {_FLUXES}")
        if self.viscosity not in _VISCOSITIES:
            raise ConfigError(f"viscosity must be one of {_VISCOSITIES}")
        if self.mass not in ("lumped", "consistent"):
            raise ConfigError("mass must be 'lumped' or 'consistent'")
        if self.cleaning not in ("default", "off", "per_stage"):
            raise ConfigError("cleaning must be default, off, or per_stage")
        if self.clean_method not in ("single_pass", "exact"):
            raise ConfigError("clean_method must be 'single_pass' or 'exact'")
        if self.postclean not in ("default", "conserve_energy", "preserve_pressure"):
            raise ConfigError(
                "postclean must be default, conserve_energy, or preserve_pressure"
            )
        if self.inviscid_form not in ("ibp", "strong"):
            raise ConfigError("inviscid_form must be 'ibp' or 'strong'")
        if self.degree not in (1, 2, 3):
            raise ConfigError("degree must be 1, 2, or 3")
        if self.cfl <= 0:
            raise ConfigError("cfl must be positive")
        if self.n_monitor < 2:
            raise ConfigError("n_monitor must be at least 2")


def parse_config_text(text: str) -> Dict[str, str]:
    """Flat key=value lines; '#' starts a comment."""
    items: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = body.split("=", 1)
        items[key.strip()] = value.strip()
    return items


@dataclass
class RunResult:
    """In-memory outcome of one simulation (files are optional extras)."""

    status: str
    config: Dict
    space: Optional[FESpace] = None
    U0: Optional[np.ndarray] = None
    U: Optional[np.ndarray] = None
    t: float = 0.0
    steps: int = 0
    history: Optional[EntropyHistory] = None
    eps: Optional[np.ndarray] = None
    eps_low: Optional[np.ndarray] = None
    eps_high: Optional[np.ndarray] = None
    h_field: Optional[np.ndarray] = None
    error_report: Optional[ErrorReport] = None
    wall_time: float = 0.0
    error: str = ""
    files: List[str] = field(default_factory=list)
    mass_ops: object = None
    gas: object = None


def _build_space(spec, cfg: SimulationConfig) -> FESpace:
    res = cfg.resolution if cfg.resolution > 0 else spec.default_resolution
    if spec.dim == 1:
        mesh = build_interval_mesh(res, spec.bounds[0, 0], spec.bounds[0, 1])
    else:
        mesh = build_triangulated_rectangle(
            res, res, spec.bounds, pattern=cfg.mesh_pattern
        )
    return FESpace(mesh, cfg.degree, periodic=(spec.boundary == "periodic"))


def _initial_state(spec, space: FESpace) -> np.ndarray:
    rho, u, p, B = spec.ic(space.dof_coords)
    state = conserved_from_primitive(rho, u, p, B, spec.gas)
    U = np.empty((6, space.n_dofs))
    U[0] = state.rho
    U[1:3] = state.m.T
    U[3] = state.E
    U[4:6] = state.B.T
    return U


def _nodal_entropy_pair_S(U: np.ndarray, gamma: float) -> np.ndarray:
    rho = U[0]
    rhoe = U[3] - 0.5 * (U[1] ** 2 + U[2] ** 2) / rho - 0.5 * (U[4] ** 2 + U[5] ** 2)
    p = (gamma - 1.0) * rhoe
    return rho * np.log(p / rho**gamma) / (gamma - 1.0)


def run(config: SimulationConfig) -> RunResult:
    """Execute one simulation; writes output files when config.out is set."""
    t_start = time.perf_counter()
    config.validate()
    overrides = {}
    if config.t_final >= 0.0:
        overrides["t_final"] = config.t_final
    if config.gamma > 0.0:
        overrides["gamma"] = config.gamma
    if config.problem == "vortex":
        overrides["vortex_p0"] = config.vortex_p0
        overrides["vortex_mu"] = config.vortex_mu
    spec = make_problem(config.problem, overrides)
    cleaning = spec.cleaning if config.cleaning == "default" else config.cleaning
    postclean = spec.postclean if config.postclean == "default" else config.postclean

    space = _build_space(spec, config)
    validate_ic(spec, space)
    mass_ops = build_mass_operators(space)
    if config.mass == "lumped" and not mass_ops.lumped_is_positive:
        raise ConfigError(
            "row-sum lumping degenerates for this element; use mass=consistent"
        )
    h_field = mesh_size_field(space, mass_ops)
    gas = spec.gas
    scheme = scheme_for_degree(config.degree)

    U = _initial_state(spec, space)
    U0 = U.copy()
    dirichlet = None
    if spec.boundary == "dirichlet":
        bdofs = space.boundary_dofs("all")
        dirichlet = (bdofs, U0[:, bdofs].copy())
    poisson = PoissonSolver(space) if cleaning == "per_stage" else None

    def make_choice(eps_field):
        if config.flux == "monolithic":
            return Monolithic(eps=eps_field)
        if config.flux == "monolithic_no_mass":
            return MonolithicNoMass(eps=eps_field)
        return Resistive(
            mu=eps_field,
            kappa=config.kappa_factor * eps_field,
            eta=config.eta_factor * eps_field,
            lam=config.lam_factor * eps_field,
        )

    consistency = (postclean_preserve_pressure if postclean == "preserve_pressure"
                   else postclean_consistency)

    def stage_hook(Us):
        apply_constraints(space, Us, dirichlet)
        if poisson is not None:
            Bc, _ = clean(space, Us[4:6], poisson, mass_ops,
                          rel_tol=config.clean_tol, method=config.clean_method)
            Us = consistency(Us, Bc)
        return Us

    history = EntropyHistory()
    targets = np.linspace(0.0, spec.t_final, config.n_monitor)
    with_div = space.mesh.dim == 2
    min_entropy_monitor(history, space, U, 0.0, gas, with_divergence=with_div)
    next_target = 1

    result = RunResult(status="running", config=asdict(config))
    result.config["resolved_problem_t_final"] = spec.t_final
    result.config["resolved_cleaning"] = cleaning
    result.config["resolved_postclean"] = postclean
    result.space, result.mass_ops, result.gas = space, mass_ops, gas
    result.U0, result.h_field = U0, h_field

    S_history: List = [(0.0, _nodal_entropy_pair_S(U, gas.gamma))]
    t = 0.0
    steps = 0
    eps = eps_low = eps_high = None
    try:
        while t < spec.t_final * (1.0 - 1e-12):
            if config.viscosity == "none":
                eps = eps_low = np.zeros(space.n_dofs)
            else:
                eps_low = first_order_viscosity(space, U, h_field, gas, config.c_max)
                if config.viscosity == "entropy" and len(S_history) >= 2:
                    u_nodal = U[1:3] / U[0]
                    R = entropy_residual(space, S_history, u_nodal)
                    eps_high = high_order_viscosity(
                        space, R, h_field, S_history[-1][1], mass_ops.lumped, config.c_E
                    )
                    eps = np.minimum(eps_low, eps_high)
                else:
                    eps = eps_low
            choice = make_choice(eps)
            dt = compute_dt(space, U, h_field, config.cfl, gas, t, spec.t_final)

            def rhs(Ustage):
                return semidiscrete_rhs(
                    space, Ustage, choice, gas,
                    mass=config.mass, mass_ops=mass_ops, form=config.inviscid_form,
                    strict=config.strict_quadrature,
                )

            U = step(scheme, rhs, U, dt, stage_hook=stage_hook)
            t += dt
            steps += 1
            S_history.append((t, _nodal_entropy_pair_S(U, gas.gamma)))
            if len(S_history) > 3:
                S_history.pop(0)
            while next_target < len(targets) and targets[next_target] <= t * (1 + 1e-12):
                min_entropy_monitor(history, space, U, t, gas, with_divergence=with_div)
                next_target += 1
        result.status = "completed"
    except MHDError as exc:
        result.status = "failed"
        result.error = f"{type(exc).__name__}: {exc}"

    result.U, result.t, result.steps = U, t, steps
    result.history = history
    result.eps, result.eps_low, result.eps_high = eps, eps_low, eps_high
    if result.status == "completed" and spec.reference is not None:
        result.error_report = error_norms(space, U, spec.reference, t)
    result.wall_time = time.perf_counter() - t_start

    if config.out:
        _write_outputs(result, spec, config)
    return result


def _write_outputs(result: RunResult, spec, config: SimulationConfig) -> None:
    out = ensure_dir(config.out)
    space, gas = result.space, result.gas
    extra = {}
    if result.eps is not None:
        extra = {"viscosity": result.eps, "viscosity_low": result.eps_low}

    def emit(name, writer, *args, **kw):
        path = os.path.join(out, name)
        writer(path, *args, **kw)
        result.files.append(name)

    emit("fields_initial.csv", write_fields_csv, space, result.U0, gas)
    emit("fields_final.csv", write_fields_csv, space, result.U, gas, extra)
    if space.mesh.dim == 2 and config.write_vtk:
        emit("solution_initial.vtk", write_vtk, space, result.U0, gas)
        emit("solution_final.vtk", write_vtk, space, result.U, gas, extra)
    with open(os.path.join(out, "entropy_history.csv"), "w") as f:
        f.write(result.history.to_csv())
    result.files.append("entropy_history.csv")
    if result.error_report is not None:
        with open(os.path.join(out, "errors.csv"), "w") as f:
            f.write("dofs,degree,component,L1,L2,rate\n")
            for comp, (l1, l2) in result.error_report.errors.items():
                f.write(f"{result.error_report.dofs},{result.error_report.degree},"
                        f"{comp},{l1!r},{l2!r},\n")
        result.files.append("errors.csv")
    if result.status == "failed":
        with open(os.path.join(out, "failure.txt"), "w") as f:
            f.write(result.error + "\n")
            f.write(f"t = {result.t!r} after {result.steps} steps\n")
        result.files.append("failure.txt")
    _write_manifest(result, config, out)


def _write_manifest(result: RunResult, config: SimulationConfig, out: str) -> None:
    lines = ["[config]"]
    for key in sorted(result.config):
        lines.append(f"{key} = {result.config[key]}")
    cfg_hash = hashlib.sha256("\n".join(lines).encode()).hexdigest()
    lines += [
        "",
        "[provenance]",
        f"mhdfem_version = {__version__}",
        f"numpy_version = {np.__version__}",
        f"python = {platform.python_version()}",
        f"platform = {platform.platform()}",
        f"config_sha256 = {cfg_hash}",
        "",
        "[run]",
        f"status = {result.status}",
        f"steps = {result.steps}",
        f"final_time = {result.t!r}",
        f"wall_time_s = {result.wall_time:.3f}",
        f"files = {','.join(result.files)}",
    ]
    with open(os.path.join(out, "run_manifest.txt"), "w") as f:
        f.write("\n".join(lines) + "\n")
    result.files.append("run_manifest.txt")


# ---------------------------------------------------------------------------
# canned suites
# ---------------------------------------------------------------------------

def _suite_paper_tables(out: str) -> List[dict]:
    rows = []
    reports = []
    for nx in (60, 120):
        cfg = SimulationConfig(problem="vortex", resolution=nx, viscosity="entropy",
                               out="")
        res = run(cfg)
        reports.append(res.error_report)
    tabs = [convergence_table(reports, c) for c in ("u", "B")]
    if out:
        with open(os.path.join(out, "errors.csv"), "w") as f:
            f.write(errors_csv(tabs, degree=1))
        with open(os.path.join(out, "vortex_rates.txt"), "w") as f:
            for tab in tabs:
                f.write(tab.format_text() + "\n")
    for tab in tabs:
        rate = tab.rates_l2[-1]
        rows.append({
            "member": f"vortex_rate_{tab.component}",
            "criterion": "vortex convergence (scaled two-mesh probe)",
            "value": f"{rate:.3f}",
            "passed": 1.5 <= rate <= 2.5,
        })
    return rows


def _suite_entropy_principles(out: str) -> List[dict]:
    # 321 DOFs: the resistive startup violation is visible from this
    # resolution up, while the monolithic run stays at machine epsilon
    rows = []
    base = dict(problem="brio_wu", resolution=320, viscosity="first_order",
                mass="lumped", cleaning="off")
    runs = {
        "monolithic": SimulationConfig(flux="monolithic", **base),
        "resistive_k0": SimulationConfig(flux="resistive", kappa_factor=0.0, **base),
        "resistive_k1": SimulationConfig(flux="resistive", kappa_factor=1.0, **base),
    }
    for name, cfg in runs.items():
        res = run(cfg)
        drift = np.min(np.asarray(res.history.min_s) - res.history.min_s[0])
        if name == "monolithic":
            ok = res.status == "completed" and drift >= -1e-12
            crit = "discrete minimum principle (machine epsilon)"
        else:
            ok = res.status == "completed" and drift < -1e-6
            crit = "resistive flux violates the minimum principle"
        rows.append({"member": name, "criterion": crit,
                     "value": f"{drift:.3e}", "passed": bool(ok)})
        if out:
            with open(os.path.join(out, f"entropy_history_{name}.csv"), "w") as f:
                f.write(res.history.to_csv())
    return rows


def _suite_shocks_2d(out: str) -> List[dict]:
    rows = []
    members = {
        "orszag_tang": SimulationConfig(problem="orszag_tang", resolution=48,
                                        viscosity="entropy"),
        "rotor": SimulationConfig(problem="rotor", resolution=48, viscosity="entropy"),
        "blast": SimulationConfig(problem="blast", resolution=64, viscosity="entropy"),
    }
    for name, cfg in members.items():
        if out:
            cfg.out = os.path.join(out, name)
        try:
            res = run(cfg)
            ok = res.status == "completed" and min(res.history.min_rho) > 0.0 \
                and min(res.history.min_rhoe) > 0.0
            value = f"min_rho={min(res.history.min_rho):.3e}"
        except MHDError as exc:
            ok, value = False, f"{type(exc).__name__}"
        rows.append({"member": name, "criterion": "positivity on coarse run",
                     "value": value, "passed": bool(ok)})
    return rows


_SUITES = {
    "paper_tables": _suite_paper_tables,
    "entropy_principles": _suite_entropy_principles,
    "shocks_2d": _suite_shocks_2d,
}


def suite(name: str, out: str = "") -> List[dict]:
    """Run a canned benchmark suite; returns one pass/fail row per member."""
    if name not in _SUITES:
        raise ConfigError(f"unknown suite {name!r}; known: {sorted(_SUITES)}")
    if out:
        ensure_dir(out)
    rows = _SUITES[name](out)
    if out:
        with open(os.path.join(out, "suite_summary.csv"), "w") as f:
            f.write("member,criterion,value,passed\n")
            for r in rows:
                f.write(f"{r['member']},{r['criterion']},{r['value']},"
                        f"{int(r['passed'])}\n")
    return rows


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mhdfem",
        description="Continuous-Galerkin ideal MHD solver with parabolic "
                    "regularization and entropy viscosity",
    )
    parser.add_argument("--config", help="path to a key=value config file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config entry (repeatable)")
    parser.add_argument("--suite", choices=sorted(_SUITES),
                        help="run a canned benchmark suite instead of one case")
    parser.add_argument("--out", default="", help="output directory")
    args = parser.parse_args(argv)

    try:
        if args.suite:
            rows = suite(args.suite, out=args.out)
            for r in rows:
                flag = "PASS" if r["passed"] else "FAIL"
                print(f"[{flag}] {r['member']}: {r['criterion']} ({r['value']})")
            return 0 if all(r["passed"] for r in rows) else 1

        items: Dict[str, str] = {}
        if args.config:
            with open(args.config) as f:
                items.update(parse_config_text(f.read()))
        for entry in args.set:
            if "=" not in entry:
                raise ConfigError(f"--set expects KEY=VALUE, got {entry!r}")
            key, value = entry.split("=", 1)
            items[key.strip()] = value.strip()
        if args.out:
            items["out"] = args.out
        config = SimulationConfig.from_items(items)
        config.validate()
    except (ConfigError, UnknownProblem, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    result = run(config)
    if result.status == "completed":
        print(f"{config.problem}: completed {result.steps} steps to "
              f"t={result.t:.6g} in {result.wall_time:.2f}s")
        if result.error_report is not None:
            for comp, (l1, l2) in result.error_report.errors.items():
                print(f"  {comp}: L1={l1:.4e} L2={l2:.4e}")
        return 0
    print(f"{config.problem}: FAILED after {result.steps} steps at "
          f"t={result.t:.6g}: {result.error}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
