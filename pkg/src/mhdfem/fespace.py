"""Meshes, continuous Lagrange spaces, quadrature, and mass operators.

Supports uniform interval meshes (1D) and structured triangulations of
rectangles (2D) with P1/P2/P3 elements, periodic or Dirichlet constraint
handling, consistent/lumped mass operators, and L2 projection.  Meshes are
conforming by construction; periodic partner nodes share one global DOF.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidDomain, SolverFailure, UnknownBoundaryMarker


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------

@dataclass
class Mesh:
    """Conforming simplex mesh: intervals in 1D, triangles in 2D."""

    dim: int
    vertices: np.ndarray          # (n_vert, dim)
    cells: np.ndarray             # (n_cell, dim + 1) vertex indices
    bounds: np.ndarray            # (dim, 2) domain box
    pattern: str = "right"        # triangulation pattern (2D only)

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]


def build_interval_mesh(n_cells: int, x_min: float, x_max: float) -> Mesh:
    """Uniform partition of [x_min, x_max] into n_cells intervals."""
    if n_cells < 1:
        raise InvalidDomain(f"n_cells must be >= 1, got {n_cells}")
    if not x_max > x_min:
        raise InvalidDomain(f"empty interval [{x_min}, {x_max}]")
    verts = np.linspace(x_min, x_max, n_cells + 1)[:, None]
    cells = np.column_stack([np.arange(n_cells), np.arange(1, n_cells + 1)])
    return Mesh(
        dim=1,
        vertices=verts,
        cells=cells.astype(np.int64),
        bounds=np.array([[x_min, x_max]], dtype=float),
    )


def build_triangulated_rectangle(
    nx: int, ny: int, bounds, pattern: str = "right"
) -> Mesh:
    """Structured triangulation of a rectangle.

    ``right`` splits each grid quad along one diagonal (2 nx ny triangles);
    ``crossed`` adds the quad centers (4 nx ny triangles).
    """
    if nx < 1 or ny < 1:
        raise InvalidDomain(f"nx, ny must be >= 1, got {nx}, {ny}")
    (x0, x1), (y0, y1) = bounds
    if not (x1 > x0 and y1 > y0):
        raise InvalidDomain(f"empty rectangle {bounds}")
    if pattern not in ("right", "crossed"):
        raise InvalidDomain(f"unknown pattern {pattern!r}")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i * (ny + 1) + j

    cells = []
    if pattern == "right":
        for i in range(nx):
            for j in range(ny):
                a, b = vid(i, j), vid(i + 1, j)
                c, d = vid(i + 1, j + 1), vid(i, j + 1)
                cells.append((a, b, c))
                cells.append((a, c, d))
    else:
        centers = []
        for i in range(nx):
            for j in range(ny):
                centers.append([0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])])
        verts = np.vstack([verts, np.array(centers)])
        for i in range(nx):
            for j in range(ny):
                a, b = vid(i, j), vid(i + 1, j)
                c, d = vid(i + 1, j + 1), vid(i, j + 1)
                m = (nx + 1) * (ny + 1) + i * ny + j
                cells += [(a, b, m), (b, c, m), (c, d, m), (d, a, m)]
    return Mesh(
        dim=2,
        vertices=verts,
        cells=np.array(cells, dtype=np.int64),
        bounds=np.array([[x0, x1], [y0, y1]], dtype=float),
        pattern=pattern,
    )


# ---------------------------------------------------------------------------
# reference elements: lattice nodes, Lagrange basis via monomial Vandermonde
# ---------------------------------------------------------------------------

def _lattice(dim: int, k: int) -> np.ndarray:
    if dim == 1:
        return np.array([[i / k] for i in range(k + 1)], dtype=float)
    pts = [(i / k, j / k) for j in range(k + 1) for i in range(k + 1 - j)]
    return np.array(pts, dtype=float)


def _monomial_powers(dim: int, k: int):
    if dim == 1:
        return [(a,) for a in range(k + 1)]
    return [(a, b) for b in range(k + 1) for a in range(k + 1 - b)]


def _mono_eval(powers, pts: np.ndarray) -> np.ndarray:
    """Monomial values at pts: (n_pts, n_mono)."""
    out = np.ones((pts.shape[0], len(powers)))
    for j, pw in enumerate(powers):
        for d, a in enumerate(pw):
            if a:
                out[:, j] *= pts[:, d] ** a
    return out


def _mono_grad(powers, pts: np.ndarray) -> np.ndarray:
    """Monomial gradients at pts: (n_pts, n_mono, dim)."""
    dim = pts.shape[1]
    out = np.zeros((pts.shape[0], len(powers), dim))
    for j, pw in enumerate(powers):
        for dd in range(dim):
            term = np.full(pts.shape[0], float(pw[dd]))
            if pw[dd] == 0:
                continue
            for d, a in enumerate(pw):
                e = a - 1 if d == dd else a
                if e:
                    term = term * pts[:, d] ** e
            out[:, j, dd] = term
    return out


class ReferenceElement:
    """Lagrange basis of degree k on the unit interval or unit triangle."""

    def __init__(self, dim: int, degree: int):
        if degree not in (1, 2, 3):
            raise ValueError(f"degree must be 1, 2, or 3, got {degree}")
        self.dim = dim
        self.degree = degree
        self.nodes = _lattice(dim, degree)
        self.powers = _monomial_powers(dim, degree)
        V = _mono_eval(self.powers, self.nodes)
        self.coeff = np.linalg.inv(V)          # basis_b = sum_j coeff[j, b] mono_j
        self.n_basis = self.nodes.shape[0]

    def eval(self, pts: np.ndarray):
        """Basis values (n_basis, n_pts) and reference gradients
        (n_basis, n_pts, dim), snapped so that values sum to exactly 1 and
        gradients to exactly 0 at every point (free-stream consistency)."""
        val = (_mono_eval(self.powers, pts) @ self.coeff).T
        grad = np.einsum("pjd,jb->bpd", _mono_grad(self.powers, pts), self.coeff)
        val /= val.sum(axis=0, keepdims=True)
        grad -= grad.mean(axis=0, keepdims=True)
        return np.ascontiguousarray(val), np.ascontiguousarray(grad)


def gauss_interval(exactness: int):
    """Gauss-Legendre rule on [0, 1] exact for the given polynomial degree."""
    n = max(1, (exactness + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(n)
    return (0.5 * (x + 1.0))[:, None], 0.5 * w


def duffy_triangle(exactness: int):
    """Collapsed tensor-Gauss rule on the unit triangle, exact to ``exactness``.

    The map (x, y) = (xi, eta (1 - xi)) sends a degree-p polynomial to degree
    p+1 in xi and p in eta, so n_xi = ceil((p+2)/2), n_eta = ceil((p+1)/2)
    Gauss points integrate it exactly.  All weights positive.
    """
    p = exactness
    nx = (p + 3) // 2
    ne = (p + 2) // 2
    xg, xw = np.polynomial.legendre.leggauss(nx)
    eg, ew = np.polynomial.legendre.leggauss(ne)
    xg, xw = 0.5 * (xg + 1.0), 0.5 * xw
    eg, ew = 0.5 * (eg + 1.0), 0.5 * ew
    pts, wts = [], []
    for i in range(nx):
        for j in range(ne):
            pts.append((xg[i], eg[j] * (1.0 - xg[i])))
            wts.append(xw[i] * ew[j] * (1.0 - xg[i]))
    return np.array(pts), np.array(wts)


def reference_rule(dim: int, exactness: int):
    return gauss_interval(exactness) if dim == 1 else duffy_triangle(exactness)


# ---------------------------------------------------------------------------
# finite element space
# ---------------------------------------------------------------------------

_SIDES_1D = ("left", "right")
_SIDES_2D = ("left", "right", "bottom", "top")


class FESpace:
    """Continuous Lagrange space of degree k on a generated mesh.

    ``periodic`` is a bool per axis; periodic partner DOFs share one global
    index, so constrained continuity is structural.  The attached quadrature
    rule is exact to degree 2k+1.
    """

    def __init__(self, mesh: Mesh, degree: int, periodic=False):
        self.mesh = mesh
        self.degree = degree
        dim = mesh.dim
        if isinstance(periodic, bool):
            periodic = (periodic,) * dim
        self.periodic = tuple(bool(p) for p in periodic)
        self.ref = ReferenceElement(dim, degree)

        qp, qw = reference_rule(dim, 2 * degree + 1)
        self.qpoints = qp
        self.qweights = qw
        self.basis_val, self.basis_grad = self.ref.eval(qp)

        self._build_geometry()
        self._build_dofmap()
        self._factor_cache = {}

    # -- geometry -----------------------------------------------------------

    def _build_geometry(self):
        mesh = self.mesh
        v = mesh.vertices[mesh.cells]                       # (nc, dim+1, dim)
        self.cell_origin = v[:, 0, :]
        J = np.transpose(v[:, 1:, :] - v[:, :1, :], (0, 2, 1))   # (nc, dim, dim)
        self.jac = J
        if mesh.dim == 1:
            det = J[:, 0, 0]
            self.inv_jac_T = (1.0 / det)[:, None, None]
        else:
            det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
            inv = np.empty_like(J)
            inv[:, 0, 0] = J[:, 1, 1]
            inv[:, 0, 1] = -J[:, 0, 1]
            inv[:, 1, 0] = -J[:, 1, 0]
            inv[:, 1, 1] = J[:, 0, 0]
            inv /= det[:, None, None]
            self.inv_jac_T = np.ascontiguousarray(np.transpose(inv, (0, 2, 1)))
        if np.any(det == 0.0):
            raise InvalidDomain("degenerate cell in mesh")
        self.abs_det_jac = np.abs(det)
        self.cell_measure = self.abs_det_jac * (1.0 if mesh.dim == 1 else 0.5)

    def circumradius(self) -> np.ndarray:
        """Circumradius per cell: half-length in 1D, abc/(4A) in 2D."""
        mesh = self.mesh
        if mesh.dim == 1:
            return 0.5 * self.abs_det_jac
        v = mesh.vertices[mesh.cells]
        a = np.linalg.norm(v[:, 1] - v[:, 0], axis=1)
        b = np.linalg.norm(v[:, 2] - v[:, 1], axis=1)
        c = np.linalg.norm(v[:, 0] - v[:, 2], axis=1)
        area = self.cell_measure
        return a * b * c / (4.0 * area)

    # -- DOF numbering ------------------------------------------------------

    def _wrap(self, coords: np.ndarray) -> np.ndarray:
        out = coords.copy()
        for d in range(self.mesh.dim):
            if self.periodic[d]:
                lo, hi = self.mesh.bounds[d]
                out[:, d] = lo + np.mod(out[:, d] - lo, hi - lo)
        return out

    def _build_dofmap(self):
        mesh = self.mesh
        lat = self.ref.nodes                                # (nb, dim)
        # physical node coords per cell, in basis order
        phys = self.cell_origin[:, None, :] + np.einsum(
            "cde,ne->cnd", self.jac, lat
        )                                                    # (nc, nb, dim)
        keys = self._wrap(phys.reshape(-1, mesh.dim))
        quantum = self.abs_det_jac.min() / 2**20
        ikeys = np.round((keys - mesh.bounds[:, 0]) / quantum).astype(np.int64)

        seen: dict = {}
        conn = np.empty(ikeys.shape[0], dtype=np.int64)
        coords = []
        for i, key in enumerate(map(tuple, ikeys)):
            gid = seen.get(key)
            if gid is None:
                gid = len(coords)
                seen[key] = gid
                coords.append(keys[i])
            conn[i] = gid
        self.conn = np.ascontiguousarray(conn.reshape(phys.shape[:2]))
        self.dof_coords = np.array(coords)
        self.n_dofs = self.dof_coords.shape[0]

    # -- boundary -----------------------------------------------------------

    def boundary_dofs(self, marker: str = "all") -> np.ndarray:
        """Global DOFs lying on the named side (after periodic aliasing)."""
        sides = _SIDES_1D if self.mesh.dim == 1 else _SIDES_2D
        if marker != "all" and marker not in sides:
            raise UnknownBoundaryMarker(f"{marker!r} not in {sides + ('all',)}")
        tol = self.abs_det_jac.min() / 2**21
        x = self.dof_coords
        masks = {
            "left": np.abs(x[:, 0] - self.mesh.bounds[0, 0]) < tol,
            "right": np.abs(x[:, 0] - self.mesh.bounds[0, 1]) < tol,
        }
        if self.mesh.dim == 2:
            masks["bottom"] = np.abs(x[:, 1] - self.mesh.bounds[1, 0]) < tol
            masks["top"] = np.abs(x[:, 1] - self.mesh.bounds[1, 1]) < tol
        for d, name_pair in enumerate((("left", "right"), ("bottom", "top"))[: self.mesh.dim]):
            if self.periodic[d]:
                for name in name_pair:
                    masks[name][:] = False
        if marker == "all":
            mask = np.zeros(self.n_dofs, dtype=bool)
            for m in masks.values():
                mask |= m
            return np.nonzero(mask)[0]
        return np.nonzero(masks[marker])[0]

    # -- quadrature tables --------------------------------------------------

    def rule_tables(self, exactness: Optional[int] = None):
        """(qw, basis values, basis reference gradients) for a rule of the
        requested exactness (defaults to the space's own 2k+1 rule)."""
        if exactness is None:
            return self.qweights, self.basis_val, self.basis_grad
        qp, qw = reference_rule(self.mesh.dim, exactness)
        val, grad = self.ref.eval(qp)
        return qw, val, grad

    def quad_points_physical(self, exactness: Optional[int] = None) -> np.ndarray:
        qp = self.qpoints if exactness is None else reference_rule(self.mesh.dim, exactness)[0]
        return self.cell_origin[:, None, :] + np.einsum("cde,qe->cqd", self.jac, qp)

    # -- cached sparse solves -----------------------------------------------

    def factorized(self, key: str, matrix: sp.spmatrix):
        """LU-factor ``matrix`` once per space and reuse the solve."""
        if key not in self._factor_cache:
            self._factor_cache[key] = spla.factorized(sp.csc_matrix(matrix))
        return self._factor_cache[key]


# ---------------------------------------------------------------------------
# operators on a space
# ---------------------------------------------------------------------------

def assemble_mass(space: FESpace) -> sp.csr_matrix:
    """Consistent mass matrix with the space's quadrature (exact for 2k)."""
    qw, val, _ = space.rule_tables()
    local = np.einsum("q,aq,bq->ab", qw, val, val)          # reference block
    nc, nb = space.conn.shape
    blocks = local[None, :, :] * space.abs_det_jac[:, None, None]
    rows = np.repeat(space.conn, nb, axis=1).ravel()
    cols = np.tile(space.conn, (1, nb)).ravel()
    M = sp.coo_matrix(
        (blocks.ravel(), (rows, cols)), shape=(space.n_dofs, space.n_dofs)
    )
    return M.tocsr()


def assemble_stiffness(space: FESpace) -> sp.csr_matrix:
    """Stiffness matrix (grad phi_j, grad phi_i)."""
    qw, _, gref = space.rule_tables()
    # physical gradients: g[c,b,q,d] = invJT[c] @ gref[b,q,:]
    g = np.einsum("cde,bqe->cbqd", space.inv_jac_T, gref)
    blocks = np.einsum("q,caqd,cbqd,c->cab", qw, g, g, space.abs_det_jac)
    nb = space.conn.shape[1]
    rows = np.repeat(space.conn, nb, axis=1).ravel()
    cols = np.tile(space.conn, (1, nb)).ravel()
    K = sp.coo_matrix(
        (blocks.ravel(), (rows, cols)), shape=(space.n_dofs, space.n_dofs)
    )
    return K.tocsr()


@dataclass
class MassOperators:
    """Consistent mass matrix and its row-sum lumped diagonal."""

    consistent: sp.csr_matrix
    lumped: np.ndarray
    space: FESpace = field(repr=False, default=None)

    @property
    def lumped_is_positive(self) -> bool:
        # vertex row sums vanish (up to roundoff) for P2+ triangles
        return bool(np.all(self.lumped > 1e-12 * self.lumped.max()))

    def solve_consistent(self, b: np.ndarray) -> np.ndarray:
        solve = self.space.factorized("mass", self.consistent)
        return solve(b)


def build_mass_operators(space: FESpace) -> MassOperators:
    M = assemble_mass(space)
    lumped = np.asarray(M.sum(axis=1)).ravel()
    return MassOperators(consistent=M, lumped=lumped, space=space)


def l2_project(space: FESpace, f: Callable, mass: Optional[MassOperators] = None) -> np.ndarray:
    """L2 projection of a callable f(points (n, dim)) onto the space."""
    mass = mass or build_mass_operators(space)
    qw, val, _ = space.rule_tables()
    pts = space.quad_points_physical()                      # (nc, nq, dim)
    fv = np.asarray(f(pts.reshape(-1, space.mesh.dim)), dtype=float)
    fv = fv.reshape(pts.shape[0], pts.shape[1])
    rhs = np.zeros(space.n_dofs)
    contrib = np.einsum("cq,q,bq,c->cb", fv, qw, val, space.abs_det_jac)
    np.add.at(rhs, space.conn, contrib)
    x = mass.solve_consistent(rhs)
    res = np.linalg.norm(mass.consistent @ x - rhs)
    if res > 1e-10 * max(1.0, np.linalg.norm(rhs)):
        raise SolverFailure(f"projection solve residual {res}")
    return x


def project_cellwise_constant(
    space: FESpace, cell_values: np.ndarray, mass: Optional[MassOperators] = None
) -> np.ndarray:
    """L2 projection of a piecewise-constant (per cell) function."""
    mass = mass or build_mass_operators(space)
    qw, val, _ = space.rule_tables()
    contrib = np.einsum("c,q,bq,c->cb", cell_values, qw, val, space.abs_det_jac)
    rhs = np.zeros(space.n_dofs)
    np.add.at(rhs, space.conn, contrib)
    return mass.solve_consistent(rhs)


def mesh_size_field(space: FESpace, mass: Optional[MassOperators] = None) -> np.ndarray:
    """Nodal mesh-size function: L2 projection of (circumradius / degree)."""
    return project_cellwise_constant(space, space.circumradius() / space.degree, mass)


def interpolate(space: FESpace, f: Callable) -> np.ndarray:
    """Nodal interpolant: evaluate f at the DOF coordinates."""
    return np.asarray(f(space.dof_coords), dtype=float)


def apply_constraints(space: FESpace, fields: np.ndarray, dirichlet=None) -> np.ndarray:
    """Impose registered constraints on nodal fields (in place).

    Periodic identification is structural (shared DOFs), so only Dirichlet
    data needs injecting: ``dirichlet`` is a (dofs, values) pair where values
    broadcast against fields[..., dofs].
    """
    if dirichlet is not None:
        dofs, values = dirichlet
        fields[..., dofs] = values
    return fields


def evaluate(space: FESpace, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate a nodal field at arbitrary physical points (small-scale use)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    pts = space._wrap(points)
    out = np.empty(pts.shape[0])
    tol = 1e-12 * max(1.0, np.max(space.abs_det_jac))
    for i, x in enumerate(pts):
        # inv_jac_T holds J^{-T}; reference coords need J^{-1} (x - origin)
        ref = np.einsum("ced,ce->cd", space.inv_jac_T, x - space.cell_origin)
        if space.mesh.dim == 1:
            inside = (ref[:, 0] >= -tol) & (ref[:, 0] <= 1 + tol)
        else:
            inside = (
                (ref[:, 0] >= -tol)
                & (ref[:, 1] >= -tol)
                & (ref[:, 0] + ref[:, 1] <= 1 + tol)
            )
        c = int(np.argmax(inside))
        if not inside[c]:
            raise InvalidDomain(f"point {x} outside mesh")
        val, _ = space.ref.eval(ref[c][None, :])
        out[i] = val[:, 0] @ coeffs[space.conn[c]]
    return out
