"""Snapshot writers: per-field CSV and legacy-ASCII VTK (2D).

Floats are written with repr (shortest round-trip form), so identical runs
produce bit-identical files on the same platform.
"""

from __future__ import annotations

import os
from typing import Dict

import numpy as np

from .fespace import FESpace
from .thermo import GasModel


def derived_nodal(U: np.ndarray, gas: GasModel) -> Dict[str, np.ndarray]:
    """Nodal pressure and specific entropy (c_v = 1) without admissibility checks."""
    rho = U[0]
    rhoe = U[3] - 0.5 * (U[1] ** 2 + U[2] ** 2) / rho - 0.5 * (U[4] ** 2 + U[5] ** 2)
    p = (gas.gamma - 1.0) * rhoe
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.log(p / rho**gas.gamma)
    return {"p": p, "s": s, "rhoe": rhoe}


def _columns(space: FESpace, U: np.ndarray, gas: GasModel, extra: Dict[str, np.ndarray]):
    cols = {}
    coords = space.dof_coords
    cols["x"] = coords[:, 0]
    if space.mesh.dim == 2:
        cols["y"] = coords[:, 1]
    for name, row in zip(("rho", "mx", "my", "E", "Bx", "By"), U):
        cols[name] = row
    d = derived_nodal(U, gas)
    cols["p"] = d["p"]
    cols["s"] = d["s"]
    cols["ux"] = U[1] / U[0]
    cols["uy"] = U[2] / U[0]
    for name, row in extra.items():
        cols[name] = row
    return cols


def write_fields_csv(path: str, space: FESpace, U: np.ndarray, gas: GasModel,
                     extra: Dict[str, np.ndarray] = None) -> None:
    """Nodal solution snapshot: coordinates plus conserved/derived fields."""
    cols = _columns(space, U, gas, extra or {})
    names = list(cols)
    order = np.lexsort(
        tuple(space.dof_coords[:, d] for d in range(space.mesh.dim - 1, -1, -1))
    )
    with open(path, "w") as f:
        f.write(",".join(names) + "\n")
        data = np.column_stack([cols[n] for n in names])
        for i in order:
            f.write(",".join(repr(float(v)) for v in data[i]) + "\n")


def vertex_dof_indices(space: FESpace) -> np.ndarray:
    """Global DOF index of each mesh vertex (corner lattice nodes)."""
    k = space.degree
    if space.mesh.dim == 1:
        corner_cols = [0, k]
    else:
        corner_cols = [0, k, space.conn.shape[1] - 1]
    vdof = np.empty(space.mesh.n_vertices, dtype=np.int64)
    vdof[space.mesh.cells] = space.conn[:, corner_cols]
    return vdof


def write_vtk(path: str, space: FESpace, U: np.ndarray, gas: GasModel,
              extra: Dict[str, np.ndarray] = None, title: str = "mhdfem snapshot") -> None:
    """Legacy-ASCII VTK unstructured grid with vertex point data (2D)."""
    if space.mesh.dim != 2:
        raise ValueError("VTK output targets 2D triangulations")
    mesh = space.mesh
    vdof = vertex_dof_indices(space)
    d = derived_nodal(U, gas)

    scalars = {
        "rho": U[0][vdof],
        "pressure": d["p"][vdof],
        "entropy": d["s"][vdof],
        "energy": U[3][vdof],
        "magnetic_pressure": 0.5 * (U[4] ** 2 + U[5] ** 2)[vdof],
    }
    for name, row in (extra or {}).items():
        scalars[name] = row[vdof]
    vectors = {
        "velocity": np.column_stack([(U[1] / U[0])[vdof], (U[2] / U[0])[vdof]]),
        "magnetic_field": np.column_stack([U[4][vdof], U[5][vdof]]),
    }

    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(title + "\n")
        f.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {mesh.n_vertices} double\n")
        for v in mesh.vertices:
            f.write(f"{v[0]!r} {v[1]!r} 0.0\n")
        f.write(f"CELLS {mesh.n_cells} {4 * mesh.n_cells}\n")
        for c in mesh.cells:
            f.write(f"3 {c[0]} {c[1]} {c[2]}\n")
        f.write(f"CELL_TYPES {mesh.n_cells}\n")
        f.write("\n".join(["5"] * mesh.n_cells) + "\n")
        f.write(f"POINT_DATA {mesh.n_vertices}\n")
        for name, vals in scalars.items():
            f.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            for v in vals:
                f.write(f"{float(v)!r}\n")
        for name, vecs in vectors.items():
            f.write(f"VECTORS {name} double\n")
            for v in vecs:
                f.write(f"{v[0]!r} {v[1]!r} 0.0\n")


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
