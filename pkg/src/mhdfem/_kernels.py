"""Hot assembly loops, JIT-compiled with numba.

Serial loops with fixed iteration order keep results bit-reproducible.
Component layout everywhere: (rho, m_x, m_y, E, B_x, B_y); velocity and
magnetic vectors always carry two components, gradients carry ``dr``
spatial components (1 on interval meshes, 2 on triangles).
"""

import numpy as np
from numba import njit

# viscous flux variants
MONOLITHIC = 0
MONOLITHIC_NO_MASS = 1
RESISTIVE = 2


@njit(cache=True)
def rhs_volume(conn, bval, bgrad, inv_jac_t, abs_det, qw, U, visc, gamma, flux_code, ibp, strict, out):
    """Accumulate the weak-form right side into ``out``.

    With ``ibp`` true the inviscid term is integrated by parts,
    (F, grad phi) - (F_visc, grad phi), which conserves the totals to
    roundoff under periodic boundaries; otherwise the strong volume form
    -(div F, phi) - (F_visc, grad phi) is used.  Boundary integrals are
    omitted (periodic sides have none, Dirichlet rows are injected).

    The flux algebra is polynomial in the state except for divisions by
    rho, so nonpositive density always aborts; nonpositive interpolated
    internal energy aborts only under ``strict`` (near-vacuum states dip
    below zero at quadrature points by interpolation error while the
    scheme remains well defined).

    Returns (status, cell, qpoint): status 0 = ok, 1 = nonpositive density,
    2 = nonpositive internal energy at the reported quadrature point.
    """
    nc, nb = conn.shape
    nq = qw.shape[0]
    dr = bgrad.shape[2]

    gphys = np.empty((nb, dr))
    val = np.empty(6)
    gr = np.empty((6, dr))
    gu = np.empty((2, dr))
    gp = np.empty(dr)
    dF = np.empty(6)
    Fq = np.empty((6, dr))
    FV = np.empty((6, dr))
    divmax = np.empty(2)

    for c in range(nc):
        for q in range(nq):
            for b in range(nb):
                for d in range(dr):
                    s = 0.0
                    for e in range(dr):
                        s += inv_jac_t[c, d, e] * bgrad[b, q, e]
                    gphys[b, d] = s

            for comp in range(6):
                s = 0.0
                for b in range(nb):
                    s += U[comp, conn[c, b]] * bval[b, q]
                val[comp] = s
                for d in range(dr):
                    s = 0.0
                    for b in range(nb):
                        s += U[comp, conn[c, b]] * gphys[b, d]
                    gr[comp, d] = s

            rho = val[0]
            if not rho > 0.0:
                return 1, c, q
            mx, my, E, Bx, By = val[1], val[2], val[3], val[4], val[5]
            ux = mx / rho
            uy = my / rho
            m2 = mx * mx + my * my
            B2 = Bx * Bx + By * By
            rhoe = E - 0.5 * m2 / rho - 0.5 * B2
            if strict and not rhoe > 0.0:
                return 2, c, q
            p = (gamma - 1.0) * rhoe

            divm = 0.0
            divB = 0.0
            for d in range(dr):
                divm += gr[1 + d, d]
                divB += gr[4 + d, d]
            for i in range(2):
                for d in range(dr):
                    gu[i, d] = (gr[1 + i, d] - (ux if i == 0 else uy) * gr[0, d]) / rho
            divu = 0.0
            for d in range(dr):
                divu += gu[d, d]
            for d in range(dr):
                grhoe = (
                    gr[3, d]
                    - (mx * gr[1, d] + my * gr[2, d]) / rho
                    + 0.5 * m2 / (rho * rho) * gr[0, d]
                    - (Bx * gr[4, d] + By * gr[5, d])
                )
                gp[d] = (gamma - 1.0) * grhoe

            if ibp:
                # inviscid flux tensor columns d = x, y
                for d in range(dr):
                    ud = ux if d == 0 else uy
                    Bd = Bx if d == 0 else By
                    Fq[0, d] = val[1 + d]
                    for i in range(2):
                        mi = mx if i == 0 else my
                        Bi = Bx if i == 0 else By
                        stress = Bi * Bd
                        if i == d:
                            stress -= 0.5 * B2
                        Fq[1 + i, d] = mi * ud - stress
                        if i == d:
                            Fq[1 + i, d] += p
                        # induction row: B_i u_d - u_i B_d (Faraday)
                        Fq[4 + i, d] = Bi * ud - (ux if i == 0 else uy) * Bd
                    en = ud * (E + p)
                    for i in range(2):
                        Bi = Bx if i == 0 else By
                        stress = Bi * Bd
                        if i == d:
                            stress -= 0.5 * B2
                        en -= stress * (ux if i == 0 else uy)
                    Fq[3, d] = en
            else:
                # divergence of the Maxwell stress, rows i = x, y
                for i in range(2):
                    Bi = Bx if i == 0 else By
                    s = Bi * divB
                    for d in range(dr):
                        s += (Bx if d == 0 else By) * gr[4 + i, d]
                    if i < dr:
                        s -= Bx * gr[4, i] + By * gr[5, i]
                    divmax[i] = s

                # inviscid strong divergence, per component
                dF[0] = divm
                for i in range(2):
                    mi = mx if i == 0 else my
                    adv = mi * divu
                    for d in range(dr):
                        adv += (ux if d == 0 else uy) * gr[1 + i, d]
                    pterm = gp[i] if i < dr else 0.0
                    dF[1 + i] = adv + pterm - divmax[i]

                en = (E + p) * divu
                for d in range(dr):
                    en += (ux if d == 0 else uy) * (gr[3, d] + gp[d])
                en -= ux * divmax[0] + uy * divmax[1]
                for i in range(2):
                    Bi = Bx if i == 0 else By
                    for d in range(dr):
                        Bd = Bx if d == 0 else By
                        stress = Bi * Bd
                        if i == d:
                            stress -= 0.5 * B2
                        en -= stress * gu[i, d]
                dF[3] = en

                # induction: div_j(B_i u_j - u_i B_j)
                for i in range(2):
                    ui = ux if i == 0 else uy
                    Bi = Bx if i == 0 else By
                    s = Bi * divu - ui * divB
                    for d in range(dr):
                        s += (ux if d == 0 else uy) * gr[4 + i, d]
                        s -= (Bx if d == 0 else By) * gu[i, d]
                    dF[4 + i] = s

            # viscosity coefficients interpolated from nodal fields
            eps = 0.0
            lam = 0.0
            kap = 0.0
            eta = 0.0
            for b in range(nb):
                phi = bval[b, q]
                j = conn[c, b]
                eps += visc[0, j] * phi
                lam += visc[1, j] * phi
                kap += visc[2, j] * phi
                eta += visc[3, j] * phi

            if flux_code == RESISTIVE:
                for d in range(dr):
                    FV[0, d] = 0.0
                for i in range(2):
                    for d in range(dr):
                        sym = gu[i, d]
                        if i < dr:
                            sym += gu[d, i]
                        tau = eps * sym
                        if i == d:
                            tau -= lam * divu
                        FV[1 + i, d] = tau
                T = p / rho
                for d in range(dr):
                    gT = (gp[d] - T * gr[0, d]) / rho
                    s = kap * gT
                    for i in range(2):
                        s += (ux if i == 0 else uy) * FV[1 + i, d]
                    for i in range(2):
                        curl = gr[4 + i, d]
                        if i < dr:
                            curl -= gr[4 + d, i]
                        s += eta * (Bx if i == 0 else By) * curl
                    FV[3, d] = s
                for i in range(2):
                    for d in range(dr):
                        curl = gr[4 + i, d]
                        if i < dr:
                            curl -= gr[4 + d, i]
                        FV[4 + i, d] = eta * curl
            else:
                for comp in range(6):
                    for d in range(dr):
                        FV[comp, d] = eps * gr[comp, d]
                if flux_code == MONOLITHIC_NO_MASS:
                    for d in range(dr):
                        FV[0, d] = 0.0

            w = qw[q] * abs_det[c]
            if ibp:
                for b in range(nb):
                    j = conn[c, b]
                    for comp in range(6):
                        contrib = 0.0
                        for d in range(dr):
                            contrib += (Fq[comp, d] - FV[comp, d]) * gphys[b, d]
                        out[comp, j] += w * contrib
            else:
                for b in range(nb):
                    phi = bval[b, q]
                    j = conn[c, b]
                    for comp in range(6):
                        contrib = dF[comp] * phi
                        for d in range(dr):
                            contrib += FV[comp, d] * gphys[b, d]
                        out[comp, j] -= w * contrib

    return 0, -1, -1


@njit(cache=True)
def entropy_residual_nodal(conn, bval, bgrad, inv_jac_t, qw_norm, S_dot, S, u, out):
    """Nodal entropy residual: sum_K (1/|K|) int_K |dS/dt + div(u S)| phi_i.

    ``qw_norm`` are reference weights divided by the reference measure, so
    cell Jacobians cancel.  S and u are nodal fields; u has shape (2, ndof).
    """
    nc, nb = conn.shape
    nq = qw_norm.shape[0]
    dr = bgrad.shape[2]
    gphys = np.empty((nb, dr))

    for c in range(nc):
        for q in range(nq):
            for b in range(nb):
                for d in range(dr):
                    s = 0.0
                    for e in range(dr):
                        s += inv_jac_t[c, d, e] * bgrad[b, q, e]
                    gphys[b, d] = s

            sdot = 0.0
            sval = 0.0
            for b in range(nb):
                j = conn[c, b]
                sdot += S_dot[j] * bval[b, q]
                sval += S[j] * bval[b, q]
            divu = 0.0
            adv = 0.0
            for d in range(dr):
                gs = 0.0
                gud = 0.0
                uval = 0.0
                for b in range(nb):
                    j = conn[c, b]
                    gs += S[j] * gphys[b, d]
                    gud += u[d, j] * gphys[b, d]
                    uval += u[d, j] * bval[b, q]
                divu += gud
                adv += uval * gs
            resid = abs(sdot + sval * divu + adv)

            for b in range(nb):
                out[conn[c, b]] += qw_norm[q] * resid * bval[b, q]


@njit(cache=True)
def divergence_sq(conn, bgrad, inv_jac_t, abs_det, qw, Bx, By):
    """Integral of (div B)^2 over the mesh by element quadrature."""
    nc, nb = conn.shape
    nq = qw.shape[0]
    dr = bgrad.shape[2]
    total = 0.0
    for c in range(nc):
        for q in range(nq):
            div = 0.0
            for b in range(nb):
                j = conn[c, b]
                for d in range(dr):
                    g = 0.0
                    for e in range(dr):
                        g += inv_jac_t[c, d, e] * bgrad[b, q, e]
                    div += (Bx[j] if d == 0 else By[j]) * g
            total += qw[q] * abs_det[c] * div * div
    return total
