import numpy as np
import pytest

from mhdfem.thermo import ConservedState, GasModel


@pytest.fixture(scope="session")
def gas2():
    return GasModel(gamma=2.0)


@pytest.fixture(scope="session")
def gas53():
    return GasModel(gamma=5.0 / 3.0)


@pytest.fixture(scope="session")
def gas14():
    return GasModel(gamma=1.4)


def point_state(rho, u, p, B, gas):
    """Conserved point state from primitives (test helper)."""
    u = np.asarray(u, dtype=float)
    B = np.asarray(B, dtype=float)
    m = rho * u
    E = p / (gas.gamma - 1.0) + 0.5 * rho * (u @ u) + 0.5 * (B @ B)
    return ConservedState(rho=float(rho), m=m, E=float(E), B=B)


def richardson_diff(f, x, rel_step=1e-5):
    """Central difference with one Richardson extrapolation step."""
    h = rel_step * max(abs(x), 1.0)
    d1 = (f(x + h) - f(x - h)) / (2.0 * h)
    d2 = (f(x + h / 2.0) - f(x - h / 2.0)) / h
    return (4.0 * d2 - d1) / 3.0


def fd_hessian(g, x0, rel_step=2e-4):
    """Finite-difference Hessian with Richardson-extrapolated differences.

    The wider default step balances truncation against the eps/h^2 roundoff
    amplification of second differences at double precision.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size

    def hess_at(step):
        H = np.empty((n, n))
        for i in range(n):
            hi = step * max(abs(x0[i]), 1e-2)
            for j in range(i, n):
                hj = step * max(abs(x0[j]), 1e-2)
                if i == j:
                    H[i, i] = (
                        g(x0 + 2 * hi * _e(n, i))
                        - 2.0 * g(x0)
                        + g(x0 - 2 * hi * _e(n, i))
                    ) / (4.0 * hi * hi)
                else:
                    pp = g(x0 + hi * _e(n, i) + hj * _e(n, j))
                    pm = g(x0 + hi * _e(n, i) - hj * _e(n, j))
                    mp = g(x0 - hi * _e(n, i) + hj * _e(n, j))
                    mm = g(x0 - hi * _e(n, i) - hj * _e(n, j))
                    H[i, j] = H[j, i] = (pp - pm - mp + mm) / (4.0 * hi * hj)
        return H

    H1 = hess_at(rel_step)
    H2 = hess_at(rel_step / 2.0)
    return (4.0 * H2 - H1) / 3.0


def _e(n, i):
    v = np.zeros(n)
    v[i] = 1.0
    return v
