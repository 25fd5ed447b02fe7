import numpy as np
import pytest

from mhdfem.diagnostics import (
    EntropyHistory,
    ErrorReport,
    convergence_table,
    error_norms,
    errors_csv,
    min_entropy_monitor,
    overshoot_metric,
)
from mhdfem.fespace import FESpace, build_triangulated_rectangle
from mhdfem.problems import make_problem, vortex_exact
from mhdfem.thermo import GasModel


def make_vortex_state(space, t=0.0, p0=1.0):
    gamma = 5.0 / 3.0
    rho, u, p, B = vortex_exact(space.dof_coords, t, p0=p0)
    U = np.empty((6, space.n_dofs))
    U[0] = rho
    U[1:3] = (rho[:, None] * u).T
    U[3] = p / (gamma - 1) + 0.5 * rho * np.sum(u * u, axis=1) + 0.5 * np.sum(B * B, axis=1)
    U[4:6] = B.T
    return U


class TestErrorNorms:
    def test_reference_against_its_interpolant(self):
        spec = make_problem("vortex")
        space = FESpace(build_triangulated_rectangle(24, 24, spec.bounds), 1,
                        periodic=True)
        U = make_vortex_state(space)
        rep = error_norms(space, U, spec.reference, 0.0)
        # interpolation error only
        assert 0.0 < rep.errors["u"][0] < 5.0
        assert set(rep.errors) == {"u", "B"}
        assert rep.dofs == 2 * space.n_dofs

    def test_exact_field_zero_error(self):
        # compare a state against a reference that matches its interpolant:
        # evaluating the same nodal data leaves only quadrature mismatch of
        # the piecewise interpolant, tested at a linear field (exactly zero)
        spec = make_problem("vortex")
        space = FESpace(build_triangulated_rectangle(8, 8, spec.bounds), 1,
                        periodic=True)
        U = np.zeros((6, space.n_dofs))
        U[0] = 1.0
        U[1] = 0.3
        U[3] = 2.0
        U[4] = 0.1

        def reference(pts, t):
            n = pts.shape[0]
            return (np.ones(n), np.tile([0.3, 0.0], (n, 1)), np.full(n, 2.0),
                    np.tile([0.1, 0.0], (n, 1)))

        rep = error_norms(space, U, reference, 0.0)
        assert rep.errors["u"][0] < 1e-13
        assert rep.errors["B"][1] < 1e-13


class TestConvergenceTable:
    def _reports(self, errors, dofs):
        return [
            ErrorReport(dofs=n, degree=1, dim=2, errors={"u": (e, e)})
            for e, n in zip(errors, dofs)
        ]

    def test_identical_errors_rate_zero(self):
        tab = convergence_table(self._reports([1.0, 1.0], [100, 400]), "u")
        assert tab.rates_l2[1] == pytest.approx(0.0, abs=1e-14)

    def test_halving_rate_one(self):
        # error halves when h halves (DOFs quadruple in 2D)
        tab = convergence_table(self._reports([1.0, 0.5], [100, 400]), "u")
        assert tab.rates_l1[1] == pytest.approx(1.0, rel=1e-13)

    def test_second_order(self):
        tab = convergence_table(self._reports([1.0, 0.25, 0.0625], [100, 400, 1600]), "u")
        assert tab.rates_l2[1:] == pytest.approx([2.0, 2.0], rel=1e-13)

    def test_text_format(self):
        tab = convergence_table(self._reports([1.0, 0.25], [100, 400]), "u")
        text = tab.format_text()
        assert "#DOFs" in text and "Rate" in text and "2.00" in text

    def test_csv_schema(self):
        tab = convergence_table(self._reports([1.0, 0.25], [100, 400]), "u")
        csv = errors_csv([tab], degree=1)
        lines = csv.strip().split("\n")
        assert lines[0] == "dofs,degree,component,L1,L2,rate"
        assert lines[1].startswith("100,1,u,1.0,1.0,")
        assert lines[2].split(",")[-1] == "2.0"


class TestEntropyMonitor:
    def test_uniform_state(self):
        space = FESpace(build_triangulated_rectangle(4, 4, [(0, 1), (0, 1)]), 1,
                        periodic=True)
        gas = GasModel(gamma=2.0)
        U = np.zeros((6, space.n_dofs))
        U[0] = 1.0
        U[3] = 1.0
        hist = EntropyHistory()
        for t in (0.0, 0.1, 0.2):
            min_entropy_monitor(hist, space, U, t, gas)
        assert hist.min_s == [0.0, 0.0, 0.0]
        assert hist.min_rho == [1.0] * 3
        assert hist.violations == 0

    def test_brio_wu_initial_minimum(self, gas2):
        # min over { s_left = 0, s_right = ln 6.4 } = 0
        space = FESpace(build_triangulated_rectangle(2, 2, [(0, 1), (0, 1)]), 1)
        U = np.zeros((6, space.n_dofs))
        half = space.n_dofs // 2
        U[0, :half], U[0, half:] = 1.0, 0.125
        U[3, :half] = 1.0 / (gas2.gamma - 1) + 0.5 * (0.75**2 + 1.0)
        U[3, half:] = 0.1 / (gas2.gamma - 1) + 0.5 * (0.75**2 + 1.0)
        U[4] = 0.75
        U[5, :half], U[5, half:] = 1.0, -1.0
        hist = min_entropy_monitor(EntropyHistory(), space, U, 0.0, gas2,
                                   with_divergence=False)
        assert hist.min_s[0] == pytest.approx(0.0, abs=1e-14)
        assert hist.min_rho[0] == 0.125
        assert hist.min_rhoe[0] == pytest.approx(0.1, rel=1e-12)

    def test_violations_logged_not_raised(self, gas2):
        space = FESpace(build_triangulated_rectangle(2, 2, [(0, 1), (0, 1)]), 1)
        U = np.zeros((6, space.n_dofs))
        U[0] = 1.0
        U[3] = 1.0
        U[3, 0] = -1.0          # one broken node
        hist = min_entropy_monitor(EntropyHistory(), space, U, 0.0, gas2,
                                   with_divergence=False)
        assert hist.violations == 1
        assert np.isfinite(hist.min_s[0])       # min over admissible nodes
        assert hist.min_rhoe[0] < 0.0

    def test_csv_schema(self):
        hist = EntropyHistory()
        hist.times, hist.min_s = [0.0, 0.1], [0.0, -1e-15]
        hist.min_rho, hist.min_rhoe, hist.div_B = [1.0, 0.9], [0.1, 0.09], [0.0, 0.01]
        csv = hist.to_csv()
        lines = csv.strip().split("\n")
        assert lines[0] == "t,min_s,min_rho,min_rhoe,divB"
        assert len(lines) == 3
        assert lines[1] == "0.0,0.0,1.0,0.1,0.0"


class TestOvershootMetric:
    def test_inside_bounds(self):
        m = overshoot_metric(np.array([0.2, 0.5, 0.8]), 0.0, 1.0)
        assert m == {"max_over": 0.0, "max_under": 0.0}

    def test_overshoot(self):
        m = overshoot_metric(np.array([0.2, 1.25]), 0.0, 1.0)
        assert m["max_over"] == pytest.approx(0.25)
        assert m["max_under"] == 0.0

    def test_undershoot(self):
        m = overshoot_metric(np.array([-0.125, 0.5]), 0.0, 1.0)
        assert m["max_under"] == pytest.approx(0.125)
