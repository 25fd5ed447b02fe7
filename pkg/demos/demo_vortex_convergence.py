"""Convergence study on the near-vacuum magnetic vortex.

An exact translating solution with the core pressure a few 1e-12 above
zero.  The entropy-viscosity solution converges at second order in both
velocity and magnetic field on P1 elements.
"""

import os

from mhdfem.cli import SimulationConfig, run
from mhdfem.diagnostics import convergence_table, errors_csv

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

reports = []
for nx in (30, 60, 120):
    res = run(SimulationConfig(problem="vortex", resolution=nx, viscosity="entropy"))
    reports.append(res.error_report)
    print(f"nx={nx}: {res.steps} steps, wall {res.wall_time:.1f}s")

tables = [convergence_table(reports, comp) for comp in ("u", "B")]
for tab in tables:
    print()
    print(tab.format_text())

path = os.path.join(OUT, "vortex_errors.csv")
with open(path, "w") as f:
    f.write(errors_csv(tables, degree=1))
print("wrote", path)
