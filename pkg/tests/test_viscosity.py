import numpy as np
import pytest

from mhdfem.errors import InsufficientHistory
from mhdfem.fespace import FESpace, build_interval_mesh, build_mass_operators, \
    build_triangulated_rectangle, mesh_size_field
from mhdfem.thermo import GasModel
from mhdfem.viscosity import (
    EntropyViscosity,
    FirstOrder,
    entropy_residual,
    entropy_viscosity,
    first_order_viscosity,
    high_order_viscosity,
    patch_entropy_variation,
)


@pytest.fixture
def line_space():
    return FESpace(build_interval_mesh(64, 0, 1), 1)


class TestModels:
    def test_defaults(self):
        assert FirstOrder().c_max == 0.5
        ev = EntropyViscosity()
        assert ev.c_max == 0.5 and ev.c_E == 1.0


class TestFirstOrder:
    def test_unit_sound_speed(self, line_space, gas14):
        # p = rho/gamma gives a = 1; at rest with no field the speed is 1
        U = np.zeros((6, line_space.n_dofs))
        U[0] = 2.0
        U[3] = (2.0 / gas14.gamma) / (gas14.gamma - 1.0)
        h = mesh_size_field(line_space)
        eps = first_order_viscosity(line_space, U, h, gas14, c_max=0.5)
        assert np.allclose(eps, 0.5 * h, rtol=1e-12)

    def test_brio_wu_left_magnitude(self, gas2):
        # eps = 0.5 * (1/640) * fast-speed(left state)
        space = FESpace(build_interval_mesh(4, 0, 1), 1)
        U = np.zeros((6, space.n_dofs))
        U[0] = 1.0
        U[3] = 1.0 / (gas2.gamma - 1.0) + 0.5 * (0.75**2 + 1.0)
        U[4], U[5] = 0.75, 1.0
        h = np.full(space.n_dofs, 1.0 / 640.0)
        eps = first_order_viscosity(space, U, h, gas2, c_max=0.5)
        assert np.allclose(eps, 0.5 / 640.0 * 1.7922839180029244, rtol=1e-12)
        assert eps[0] == pytest.approx(1.4002e-3, rel=1e-4)

    def test_linear_in_h(self, line_space, gas14):
        U = np.zeros((6, line_space.n_dofs))
        U[0], U[3] = 1.0, 2.5
        h = mesh_size_field(line_space)
        e1 = first_order_viscosity(line_space, U, h, gas14)
        e2 = first_order_viscosity(line_space, U, 2.0 * h, gas14)
        assert np.allclose(e2, 2.0 * e1, rtol=1e-14)


class TestEntropyResidual:
    def test_needs_history(self, line_space):
        S = np.zeros(line_space.n_dofs)
        u = np.zeros((2, line_space.n_dofs))
        with pytest.raises(InsufficientHistory):
            entropy_residual(line_space, [(0.0, S)], u)

    def test_stationary_solution_zero(self, line_space):
        S = np.full(line_space.n_dofs, 1.3)
        u = np.zeros((2, line_space.n_dofs))
        R = entropy_residual(line_space, [(0.0, S), (0.1, S), (0.2, S)], u)
        assert np.abs(R).max() < 1e-14

    def test_manufactured_linear_profile(self):
        # S(x, t) = t x on the 3-node mesh {0, 1/2, 1} with u = 0:
        # dS/dt interpolates to x, so R_i = sum_K (1/|K|) int x phi_i.
        # Hand quadrature gives (1/12, 1/2, 5/12).
        space = FESpace(build_interval_mesh(2, 0, 1), 1)
        x = space.dof_coords[:, 0]
        tau = 0.25
        hist = [(0.0, 0.0 * x), (tau, tau * x)]
        u = np.zeros((2, space.n_dofs))
        R = entropy_residual(space, hist, u)
        order = np.argsort(x)
        assert np.allclose(R[order], [1.0 / 12.0, 0.5, 5.0 / 12.0], rtol=1e-13)

    def test_bdf2_exact_for_quadratic_time(self, line_space):
        # S(t) = t^2 * g(x): variable-step BDF2 recovers dS/dt = 2 t g exactly
        g = np.sin(2 * np.pi * line_space.dof_coords[:, 0])
        times = (0.0, 0.013, 0.031)
        hist = [(t, t * t * g) for t in times]
        u = np.zeros((2, line_space.n_dofs))
        R = entropy_residual(line_space, hist, u)
        # residual = |2 t2 g| integrated against hats; compare midpoints
        Rref = entropy_residual(
            line_space, [(0.0, np.zeros_like(g)), (1.0, 2.0 * times[-1] * g)], u
        )
        assert np.allclose(R, Rref, rtol=1e-11, atol=1e-13)

    def test_step_function_concentrates_residual(self):
        # advected entropy jump: residual support stays within k+1 layers
        space = FESpace(build_interval_mesh(64, 0, 1), 1)
        x = space.dof_coords[:, 0]
        S = np.where(x <= 0.5, 1.0, 0.0)
        u = np.zeros((2, space.n_dofs))
        u[0] = 1.0
        R = entropy_residual(space, [(0.0, S), (1e-3, S)], u)
        active = np.abs(R) > 1e-12 * np.abs(R).max()
        assert np.all(np.abs(x[active] - 0.5) <= 2.01 / 64)


class TestEntropyViscosityCoefficient:
    def test_zero_residual_gives_zero(self, line_space):
        n = line_space.n_dofs
        lumped = build_mass_operators(line_space).lumped
        S = np.linspace(0.0, 1.0, n)
        eps = entropy_viscosity(
            line_space, np.zeros(n), np.full(n, 0.01), np.full(n, 0.5), S, lumped
        )
        assert np.allclose(eps, 0.0)

    def test_huge_residual_capped_at_first_order(self, line_space):
        n = line_space.n_dofs
        lumped = build_mass_operators(line_space).lumped
        S = np.linspace(0.0, 1.0, n)
        eps_low = np.full(n, 0.37)
        eps = entropy_viscosity(
            line_space, np.full(n, 1e9), np.full(n, 0.01), eps_low, S, lumped
        )
        assert np.allclose(eps, eps_low)

    def test_uniform_entropy_guard(self, line_space):
        n = line_space.n_dofs
        lumped = build_mass_operators(line_space).lumped
        eps = entropy_viscosity(
            line_space, np.full(n, 3.0), np.full(n, 0.01), np.full(n, 0.5),
            np.full(n, 7.0), lumped,
        )
        assert np.allclose(eps, 0.0)

    def test_invariant_under_entropy_shift(self, line_space):
        # residual and normalization depend on S only through differences
        rng = np.random.default_rng(1)
        n = line_space.n_dofs
        lumped = build_mass_operators(line_space).lumped
        h = np.full(n, 0.01)
        eps_low = np.full(n, 0.5)
        x = line_space.dof_coords[:, 0]
        u = np.zeros((2, n))
        u[0] = 1.0                        # constant, divergence free
        base = np.sin(2 * np.pi * x)
        out = []
        for shift in (0.0, 11.5):
            hist = [(0.0, base + shift), (0.01, 1.1 * base + shift)]
            R = entropy_residual(line_space, hist, u)
            out.append(entropy_viscosity(line_space, R, h, eps_low,
                                          hist[-1][1], lumped))
        assert np.allclose(out[0], out[1], rtol=1e-10, atol=1e-13)

    def test_bounded_by_first_order(self, line_space):
        rng = np.random.default_rng(8)
        n = line_space.n_dofs
        lumped = build_mass_operators(line_space).lumped
        R = rng.uniform(0, 100, n)
        S = rng.normal(size=n)
        h = np.full(n, 0.01)
        eps_low = rng.uniform(0.1, 1.0, n)
        eps = entropy_viscosity(line_space, R, h, eps_low, S, lumped)
        assert np.all(eps <= eps_low + 1e-15)
        assert np.all(eps >= 0.0)

    def test_patch_variation(self):
        space = FESpace(build_interval_mesh(4, 0, 1), 1)
        x = space.dof_coords[:, 0]
        S = x.copy()
        var = patch_entropy_variation(space, S)
        order = np.argsort(x)
        # interior nodes see both neighbors, endpoints one cell
        assert np.allclose(var[order], [0.25, 0.5, 0.5, 0.5, 0.25], rtol=1e-13)
