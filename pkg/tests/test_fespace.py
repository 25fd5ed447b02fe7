import math

import numpy as np
import pytest

from mhdfem.errors import InvalidDomain, UnknownBoundaryMarker
from mhdfem.fespace import (
    FESpace,
    apply_constraints,
    assemble_stiffness,
    build_interval_mesh,
    build_mass_operators,
    build_triangulated_rectangle,
    evaluate,
    interpolate,
    l2_project,
    mesh_size_field,
    reference_rule,
)


def exact_triangle_monomial(a, b):
    """int_T x^a y^b over the unit triangle = a! b! / (a+b+2)!."""
    return math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)


class TestMeshes:
    def test_interval_counts(self):
        assert build_interval_mesh(160, 0.0, 1.0).n_vertices == 161
        assert build_interval_mesh(640, 0.0, 1.0).n_vertices == 641

    def test_single_cell(self):
        m = build_interval_mesh(1, 0.0, 1.0)
        assert m.n_cells == 1 and m.n_vertices == 2

    def test_invalid_interval(self):
        with pytest.raises(InvalidDomain):
            build_interval_mesh(0, 0.0, 1.0)
        with pytest.raises(InvalidDomain):
            build_interval_mesh(4, 1.0, 1.0)

    def test_rectangle_right_counts(self):
        m = build_triangulated_rectangle(2, 2, [(0, 1), (0, 1)])
        assert m.n_cells == 8 and m.n_vertices == 9

    def test_rectangle_crossed_counts(self):
        m = build_triangulated_rectangle(3, 2, [(0, 1), (0, 1)], pattern="crossed")
        assert m.n_cells == 4 * 3 * 2
        assert m.n_vertices == 4 * 3 + 3 * 2

    def test_rectangle_invalid(self):
        with pytest.raises(InvalidDomain):
            build_triangulated_rectangle(0, 2, [(0, 1), (0, 1)])
        with pytest.raises(InvalidDomain):
            build_triangulated_rectangle(2, 2, [(0, 1), (0, 1)], pattern="diag")


class TestDofCounts:
    def test_p1_rectangle(self):
        space = FESpace(build_triangulated_rectangle(5, 7, [(0, 1), (0, 2)]), 1)
        assert space.n_dofs == 6 * 8

    def test_p3_matches_node_formula(self):
        # (k nx + 1)(k ny + 1) nodes for degree k on an nx-by-ny grid
        space = FESpace(build_triangulated_rectangle(100, 100, [(0, 1), (0, 1)]), 3)
        assert space.n_dofs == 301 * 301 == 90601

    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_interval_dofs(self, degree):
        space = FESpace(build_interval_mesh(10, 0, 1), degree)
        assert space.n_dofs == 10 * degree + 1

    def test_periodic_identification(self):
        space = FESpace(build_triangulated_rectangle(4, 4, [(0, 1), (0, 1)]), 1,
                        periodic=True)
        assert space.n_dofs == 16
        space1d = FESpace(build_interval_mesh(8, 0, 1), 2, periodic=True)
        assert space1d.n_dofs == 16


class TestQuadratureAndBasis:
    @pytest.mark.parametrize("exactness", [1, 2, 3, 4, 5, 7, 9])
    def test_triangle_rule_exactness(self, exactness):
        pts, w = reference_rule(2, exactness)
        assert np.all(w > 0)
        for a in range(exactness + 1):
            for b in range(exactness + 1 - a):
                val = np.sum(w * pts[:, 0] ** a * pts[:, 1] ** b)
                assert val == pytest.approx(exact_triangle_monomial(a, b), rel=1e-13)

    @pytest.mark.parametrize("exactness", [1, 3, 5, 7])
    def test_interval_rule_exactness(self, exactness):
        pts, w = reference_rule(1, exactness)
        for a in range(exactness + 1):
            assert np.sum(w * pts[:, 0] ** a) == pytest.approx(1.0 / (a + 1), rel=1e-14)

    @pytest.mark.parametrize("dim,degree", [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)])
    def test_partition_of_unity(self, dim, degree):
        mesh = (build_interval_mesh(3, 0, 1) if dim == 1
                else build_triangulated_rectangle(2, 2, [(0, 1), (0, 1)]))
        space = FESpace(mesh, degree)
        assert np.abs(space.basis_val.sum(axis=0) - 1.0).max() <= 1e-13
        assert np.abs(space.basis_grad.sum(axis=0)).max() <= 1e-13

    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_nodal_delta_property(self, degree):
        space = FESpace(build_triangulated_rectangle(1, 1, [(0, 1), (0, 1)]), degree)
        val, _ = space.ref.eval(space.ref.nodes)
        assert np.abs(val - np.eye(space.ref.n_basis)).max() < 1e-12


class TestMassOperators:
    def test_lumped_sums_to_measure(self):
        space = FESpace(build_triangulated_rectangle(6, 4, [(0, 2), (0, 3)]), 1)
        mo = build_mass_operators(space)
        assert mo.lumped.sum() == pytest.approx(6.0, rel=1e-13)

    def test_row_sums_equal_lumped(self):
        space = FESpace(build_interval_mesh(12, 0, 2), 2)
        mo = build_mass_operators(space)
        rows = np.asarray(mo.consistent.sum(axis=1)).ravel()
        assert np.allclose(rows, mo.lumped, rtol=1e-14)

    def test_interior_lumped_entry_1d_p1(self):
        # two half hats integrate to the cell size
        space = FESpace(build_interval_mesh(10, 0, 1), 1)
        mo = build_mass_operators(space)
        interior = np.setdiff1d(np.arange(space.n_dofs), space.boundary_dofs("all"))
        assert np.allclose(mo.lumped[interior], 0.1, rtol=1e-13)

    def test_consistent_symmetric(self):
        space = FESpace(build_triangulated_rectangle(3, 3, [(0, 1), (0, 1)]), 2)
        M = build_mass_operators(space).consistent
        assert abs(M - M.T).max() < 1e-15

    @pytest.mark.parametrize("degree", [1, 2])
    def test_lumped_inner_product_integrates_polynomials(self, degree):
        # sum_i ML_i f_i equals the integral of the interpolant of any
        # degree-k polynomial
        space = FESpace(build_triangulated_rectangle(5, 5, [(0, 1), (0, 1)]), degree)
        mo = build_mass_operators(space)
        x, y = space.dof_coords.T
        f = 1.0 + 2.0 * x - y + (x * y if degree >= 2 else 0.0)
        qw, val, _ = space.rule_tables()
        fq = np.einsum("cb,bq->cq", f[space.conn], val)
        integral = float(np.einsum("cq,q,c->", fq, qw, space.abs_det_jac))
        assert float(mo.lumped @ f) == pytest.approx(integral, rel=1e-12)

    def test_2d_p2_lumping_degenerates(self):
        # row sums of vertex basis functions vanish on straight triangles
        space = FESpace(build_triangulated_rectangle(2, 2, [(0, 1), (0, 1)]), 2)
        mo = build_mass_operators(space)
        assert not mo.lumped_is_positive


class TestProjection:
    def test_constant_reproduced(self):
        space = FESpace(build_triangulated_rectangle(4, 4, [(0, 1), (0, 1)]), 1)
        proj = l2_project(space, lambda x: np.full(x.shape[0], 3.25))
        assert np.allclose(proj, 3.25, atol=1e-12)

    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_polynomial_exactness(self, degree):
        space = FESpace(build_triangulated_rectangle(3, 3, [(0, 1), (0, 1)]), degree)

        def f(x):
            return (1.0 + x[:, 0] + 0.5 * x[:, 1]) ** degree

        proj = l2_project(space, f)
        assert np.abs(proj - f(space.dof_coords)).max() < 1e-11

    @pytest.mark.parametrize("degree", [1, 2])
    def test_sine_convergence_rate(self, degree):
        errs = []
        for n in (8, 16, 32):
            space = FESpace(build_interval_mesh(n, 0, 1), degree)
            mo = build_mass_operators(space)
            proj = l2_project(space, lambda x: np.sin(2 * np.pi * x[:, 0]), mo)
            qw, val, _ = space.rule_tables(exactness=2 * degree + 3)
            pts = space.quad_points_physical(exactness=2 * degree + 3)
            diff = (
                np.einsum("cb,bq->cq", proj[space.conn], val)
                - np.sin(2 * np.pi * pts[..., 0])
            )
            errs.append(np.sqrt(np.einsum("cq,q,c->", diff**2, qw, space.abs_det_jac)))
        rates = np.log2(np.array(errs[:-1]) / errs[1:])
        assert np.all(rates > degree + 0.8)


class TestMeshSizeField:
    def test_uniform_interval(self):
        space = FESpace(build_interval_mesh(160, 0, 1), 1)
        h = mesh_size_field(space)
        assert np.allclose(h, 0.5 / 160, rtol=1e-10)

    def test_degree_divides(self):
        mesh = build_interval_mesh(20, 0, 1)
        h1 = mesh_size_field(FESpace(mesh, 1))
        h2 = mesh_size_field(FESpace(mesh, 2))
        assert h2.mean() == pytest.approx(0.5 * h1.mean(), rel=1e-12)

    def test_single_element_exact(self):
        space = FESpace(build_interval_mesh(1, 0, 2), 1)
        h = mesh_size_field(space)
        assert np.allclose(h, 1.0, rtol=1e-12)

    def test_2d_right_triangles(self):
        # circumradius of a right triangle is half its hypotenuse
        space = FESpace(build_triangulated_rectangle(10, 10, [(0, 1), (0, 1)]), 1)
        expected = 0.5 * np.sqrt(2.0) * 0.1
        assert np.allclose(space.circumradius(), expected, rtol=1e-12)
        h = mesh_size_field(space)
        assert np.allclose(h, expected, rtol=1e-8)


class TestConstraintsAndEvaluation:
    def test_periodic_endpoints_share_value(self):
        space = FESpace(build_interval_mesh(8, 0, 1), 1, periodic=True)
        field = interpolate(space, lambda x: np.sin(2 * np.pi * x[:, 0]))
        left = evaluate(space, field, np.array([[0.0]]))
        right = evaluate(space, field, np.array([[1.0]]))
        assert left[0] == right[0]

    def test_dirichlet_injection(self):
        space = FESpace(build_interval_mesh(10, 0, 1), 1)
        U = np.zeros((6, space.n_dofs))
        dofs = space.boundary_dofs("all")
        values = np.arange(6 * len(dofs), dtype=float).reshape(6, len(dofs))
        apply_constraints(space, U, (dofs, values))
        assert np.allclose(U[:, dofs], values)

    def test_unknown_marker(self):
        space = FESpace(build_interval_mesh(4, 0, 1), 1)
        with pytest.raises(UnknownBoundaryMarker):
            space.boundary_dofs("north")

    def test_boundary_sides_2d(self):
        space = FESpace(build_triangulated_rectangle(4, 4, [(0, 1), (0, 1)]), 1)
        assert len(space.boundary_dofs("left")) == 5
        assert len(space.boundary_dofs("all")) == 16

    def test_periodic_sides_are_interior(self):
        space = FESpace(build_triangulated_rectangle(4, 4, [(0, 1), (0, 1)]), 1,
                        periodic=True)
        assert len(space.boundary_dofs("all")) == 0

    def test_evaluate_matches_interpolant(self):
        space = FESpace(build_triangulated_rectangle(5, 5, [(0, 1), (0, 1)]), 2)
        field = interpolate(space, lambda x: x[:, 0] ** 2 + x[:, 1])
        pts = np.array([[0.37, 0.21], [0.5, 0.5], [0.99, 0.01]])
        vals = evaluate(space, field, pts)
        assert np.allclose(vals, pts[:, 0] ** 2 + pts[:, 1], atol=1e-12)


class TestStiffness:
    def test_constants_in_nullspace(self):
        space = FESpace(build_triangulated_rectangle(6, 6, [(0, 1), (0, 1)]), 1)
        K = assemble_stiffness(space)
        assert np.abs(K @ np.ones(space.n_dofs)).max() < 1e-13

    def test_poisson_energy_of_linear(self):
        # (grad x, grad x) = |Omega|
        space = FESpace(build_triangulated_rectangle(4, 4, [(0, 2), (0, 1)]), 1)
        K = assemble_stiffness(space)
        x = space.dof_coords[:, 0]
        assert x @ (K @ x) == pytest.approx(2.0, rel=1e-13)
