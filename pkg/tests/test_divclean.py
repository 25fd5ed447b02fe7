import numpy as np
import pytest

from mhdfem.divclean import (
    CleanReport,
    PoissonSolver,
    clean,
    divergence_l2,
    postclean_consistency,
    weak_divergence_vector,
)
from mhdfem.errors import NonpositiveInternalEnergy, NullspaceUnpinned
from mhdfem.fespace import (
    FESpace,
    build_interval_mesh,
    build_mass_operators,
    build_triangulated_rectangle,
    interpolate,
)


@pytest.fixture(scope="module")
def square64():
    space = FESpace(build_triangulated_rectangle(64, 64, [(0, 1), (0, 1)]), 1)
    return space, build_mass_operators(space), PoissonSolver(space)


@pytest.fixture(scope="module")
def periodic32():
    space = FESpace(build_triangulated_rectangle(32, 32, [(0, 1), (0, 1)]), 1,
                    periodic=True)
    return space, build_mass_operators(space), PoissonSolver(space)


class TestDivergenceNorm:
    def test_constant_field(self, periodic32):
        space, _, _ = periodic32
        B = np.ones((2, space.n_dofs))
        assert divergence_l2(space, B) == pytest.approx(0.0, abs=1e-12)

    def test_linear_field(self, square64):
        space, _, _ = square64
        B = np.zeros((2, space.n_dofs))
        B[0] = space.dof_coords[:, 0]
        assert divergence_l2(space, B) == pytest.approx(1.0, rel=1e-12)

    def test_curl_potential_interpolant_refines(self):
        # B = curl(psi) is divergence free; its interpolant's divergence
        # shrinks like h for P1
        errs = []
        for n in (16, 32, 64):
            space = FESpace(build_triangulated_rectangle(n, n, [(0, 1), (0, 1)]), 1)
            x, y = space.dof_coords.T
            B = np.vstack([
                2 * np.pi * np.cos(2 * np.pi * y) * np.sin(2 * np.pi * x),
                -2 * np.pi * np.sin(2 * np.pi * y) * np.cos(2 * np.pi * x),
            ])
            errs.append(divergence_l2(space, B))
        rates = np.log2(np.array(errs[:-1]) / errs[1:])
        assert np.all(rates > 0.9)


class TestPoissonSolver:
    def test_nullspace_must_be_pinned(self, periodic32):
        space, _, _ = periodic32
        with pytest.raises(NullspaceUnpinned):
            PoissonSolver(space, pin_nullspace=False)

    def test_solve_residual(self, square64):
        space, _, solver = square64
        rng = np.random.default_rng(0)
        b = rng.normal(size=space.n_dofs)
        b -= b.mean()
        psi = solver.solve(b)
        r = solver.K @ psi
        b_pinned = b.copy()
        b_pinned[solver.pinned] = 0.0
        assert np.linalg.norm(r - b_pinned) <= 1e-10 * np.linalg.norm(b)


class TestClean:
    def test_constant_field_unchanged(self, periodic32):
        space, mo, solver = periodic32
        B = np.zeros((2, space.n_dofs))
        B[0], B[1] = 0.4, -0.7
        Bc, rep = clean(space, B, solver, mo)
        assert np.array_equal(Bc, B)
        assert rep.cg_iterations == 0

    def test_linear_field_contraction(self, square64):
        space, mo, solver = square64
        B = np.zeros((2, space.n_dofs))
        B[0] = space.dof_coords[:, 0]
        Bc, rep = clean(space, B, solver, mo)
        assert rep.functional_pre / max(rep.functional_post, 1e-300) >= 1e2
        assert rep.div_post < rep.div_pre

    def test_idempotence(self, square64):
        space, mo, solver = square64
        B = np.zeros((2, space.n_dofs))
        B[0] = space.dof_coords[:, 0]
        B1, _ = clean(space, B, solver, mo)
        B2, _ = clean(space, B1, solver, mo)
        change = np.sqrt(np.sum(mo.lumped * np.sum((B2 - B1) ** 2, axis=0)))
        assert change <= 1e-8

    def test_cleaned_field_weakly_divergence_free(self, periodic32):
        space, mo, solver = periodic32
        xy = space.dof_coords
        B = np.vstack([
            np.sin(2 * np.pi * xy[:, 0]) * np.cos(2 * np.pi * xy[:, 1]),
            0.3 * np.cos(2 * np.pi * xy[:, 0]),
        ])
        Bc, rep = clean(space, B, solver, mo)
        d = weak_divergence_vector(space, Bc)
        assert np.linalg.norm(d) <= 1e-10 * np.linalg.norm(weak_divergence_vector(space, B))

    def test_single_pass_contracts(self, periodic32):
        space, mo, solver = periodic32
        xy = space.dof_coords
        B = np.vstack([
            np.sin(2 * np.pi * xy[:, 0]) * np.cos(2 * np.pi * xy[:, 1]),
            0.3 * np.cos(2 * np.pi * xy[:, 0]),
        ])
        Bc, rep = clean(space, B, solver, mo, method="single_pass")
        assert rep.functional_post < 0.1 * rep.functional_pre
        assert rep.cg_iterations == 1

    def test_unknown_method(self, periodic32):
        space, mo, solver = periodic32
        with pytest.raises(ValueError):
            clean(space, np.zeros((2, space.n_dofs)), solver, mo, method="both")


class TestPostCleanConsistency:
    def test_unchanged_B_is_identity(self):
        U = np.array([[1.0], [0.1], [0.0], [2.0], [0.3], [0.2]])
        out = postclean_consistency(U, U[4:6])
        assert np.array_equal(out, U)

    def test_smaller_field_raises_pressure(self, gas2):
        U = np.array([[1.0], [0.0], [0.0], [2.0], [1.0], [0.5]])
        out = postclean_consistency(U, np.array([[0.5], [0.25]]))
        rhoe_old = 2.0 - 0.5 * (1.0 + 0.25)
        rhoe_new = 2.0 - 0.5 * (0.25 + 0.0625)
        assert rhoe_new > rhoe_old
        assert np.array_equal(out[:4], U[:4])
        assert out[4, 0] == 0.5 and out[5, 0] == 0.25

    def test_overgrown_field_raises(self):
        U = np.array([[1.0], [0.0], [0.0], [2.0], [1.0], [0.5]])
        with pytest.raises(NonpositiveInternalEnergy):
            postclean_consistency(U, np.array([[2.0], [0.5]]))

    def test_conserved_rows_untouched(self, square64):
        # the full clean-and-update pipeline never touches rho, m, E
        space, mo, solver = square64
        rng = np.random.default_rng(4)
        U = np.zeros((6, space.n_dofs))
        U[0] = 1.0 + 0.1 * rng.random(space.n_dofs)
        U[1] = 0.1
        U[3] = 5.0
        U[4] = space.dof_coords[:, 0]
        Bc, _ = clean(space, U[4:6], solver, mo)
        out = postclean_consistency(U, Bc)
        assert np.array_equal(out[:4], U[:4])
