"""Compiled right-hand side and fixed-step integrators.

Everything here works on flat float arrays; the public wrappers live in
:mod:`sps_fdia.dynamics`.  State layout is field-major: ``y[k*n + i]`` is
field ``k`` of machine ``i`` (see ``model.MACHINE_FIELDS``), followed by the
shared ``phi_V`` and ``V_DC``.
"""
import math

import numpy as np
from numba import njit

# field offsets, keep in sync with model.MACHINE_FIELDS
THETA, DW, XGOV, XEXC, PM, VINT, ISD, ISQ, VBD, VBQ, IOD, IOQ, PHID, PHIQ = range(14)
NF = 14

# generator table columns, keep in sync with model.GEN_COLUMNS
G_H, G_D, G_WS, G_F, G_KPG, G_KIG, G_KPE, G_KIE, G_VBREF, G_TM, G_TV, G_PHI = range(12)

# converter vector entries, keep in sync with model.CONV_COLUMNS
(C_RS, C_LS, C_CS, C_RF, C_LF, C_KPD, C_KID, C_KPQ, C_KIQ, C_KPV, C_KIV, C_CDC, C_SC,
 C_VREF, C_IOQREF) = range(15)

# option flags
O_PE_FROZEN, O_PM_FIXED, O_SHARED = range(3)

# aux rows recorded alongside the state
A_PE, A_PF, A_EF, A_DDW, A_PC = range(5)
N_AUX = 5

OK, ERR_VDC, ERR_NONFINITE = 0, 1, 2


@njit(cache=True)
def beta_value(kind, p0, p1, p2, u):
    if kind == 1:
        return p0 * u
    if kind == 2:
        return p0 * math.sin(2.0 * math.pi * p1 * u + p2)
    return 0.0


@njit(cache=True)
def attack_offset(atk, channel, machine, x, t, tw):
    """Sum of active attack perturbations on (channel, machine) for true value x.

    Window membership is decided at ``tw``; the time-varying term uses ``t``.
    """
    out = 0.0
    for r in range(atk.shape[0]):
        if int(atk[r, 0]) != channel or int(atk[r, 1]) != machine:
            continue
        t0 = atk[r, 8]
        if t0 <= tw < atk[r, 9]:
            out += atk[r, 2] * x + beta_value(int(atk[r, 4]), atk[r, 5], atk[r, 6], atk[r, 7], t - t0) + atk[r, 3]
    return out


@njit(cache=True)
def effective_network(tw, G, B, il, connected, flt_win, flt_il, flt_G, flt_B, Geff, Beff):
    """Fill Geff/Beff with fault-scaled, breaker-masked matrices; return the load."""
    n = G.shape[0]
    load = il
    for i in range(n):
        for k in range(n):
            Geff[i, k] = G[i, k]
            Beff[i, k] = B[i, k]
    for f in range(flt_win.shape[0]):
        if flt_win[f, 0] <= tw < flt_win[f, 1]:
            load *= flt_il[f]
            for i in range(n):
                for k in range(n):
                    Geff[i, k] *= flt_G[f, i, k]
                    Beff[i, k] *= flt_B[f, i, k]
    for i in range(n):
        if not connected[i]:
            for k in range(n):
                Geff[i, k] = 0.0
                Geff[k, i] = 0.0
                Beff[i, k] = 0.0
                Beff[k, i] = 0.0
    return load


@njit(cache=True)
def rhs(t, tw, y, n, gp, G, B, cp, opts, pe_frozen, connected, il, atk, flt_win, flt_il,
        flt_G, flt_B, dy, aux):
    """Derivative at stage time ``t`` with event windows evaluated at ``tw``."""
    Geff = np.empty((n, n))
    Beff = np.empty((n, n))
    load = effective_network(tw, G, B, il, connected, flt_win, flt_il, flt_G, flt_B, Geff, Beff)

    vdc = y[NF * n + 1]
    phiV = y[NF * n]
    vref = cp[C_VREF]
    iod_ref = cp[C_KPV] * (vref - vdc) + cp[C_KIV] * phiV
    ioq_ref = cp[C_IOQREF]
    pc_sum = 0.0

    for i in range(n):
        dw = y[DW * n + i]
        vint = y[VINT * n + i]

        if opts[O_PE_FROZEN] != 0.0:
            pe = pe_frozen[i] if connected[i] else 0.0
        else:
            pe = 0.0
            th = y[THETA * n + i]
            for k in range(n):
                d = th - y[THETA * n + k]
                pe += vint * y[VINT * n + k] * (Geff[i, k] * math.cos(d) + Beff[i, k] * math.sin(d))

        vbd = y[VBD * n + i]
        vbq = y[VBQ * n + i]
        dw_hat = dw + attack_offset(atk, 0, i, dw, t, tw)
        pe_hat = pe + attack_offset(atk, 1, i, pe, t, tw)
        vbd_hat = vbd + attack_offset(atk, 2, i, vbd, t, tw)
        vbq_hat = vbq + attack_offset(atk, 3, i, vbq, t, tw)
        vb_hat = math.sqrt(vbd_hat * vbd_hat + vbq_hat * vbq_hat)
        dw_gov = dw_hat if opts[O_SHARED] != 0.0 else dw

        ws = gp[i, G_WS]
        pf = gp[i, G_KPG] * (-dw_gov) + gp[i, G_KIG] * y[XGOV * n + i]
        ef = gp[i, G_KPE] * (gp[i, G_VBREF] - vb_hat) + gp[i, G_KIE] * y[XEXC * n + i]
        pm = y[PM * n + i]

        dy[THETA * n + i] = gp[i, G_PHI] * dw
        ddw = ws / (2.0 * gp[i, G_H]) * (pm - pe_hat - gp[i, G_D] * dw_hat)
        dy[DW * n + i] = ddw
        dy[XGOV * n + i] = -dw_gov
        dy[XEXC * n + i] = gp[i, G_VBREF] - vb_hat
        dy[PM * n + i] = 0.0 if opts[O_PM_FIXED] != 0.0 else (pf - pm) / gp[i, G_TM]
        dy[VINT * n + i] = (ef - vint) / gp[i, G_TV]

        aux[A_PE, i] = pe
        aux[A_PF, i] = pf
        aux[A_EF, i] = ef
        aux[A_DDW, i] = ddw

        if not connected[i]:
            for k in range(ISD, NF):
                dy[k * n + i] = 0.0
            aux[A_PC, i] = 0.0
            continue

        w = gp[i, G_PHI] * (ws + dw) / ws
        isd = y[ISD * n + i]
        isq = y[ISQ * n + i]
        iod = y[IOD * n + i]
        ioq = y[IOQ * n + i]
        ls = cp[C_LS]
        cs = cp[C_CS]
        dy[ISD * n + i] = (-cp[C_RS] * isd + w * ls * isq - vbd + vint) / ls
        dy[ISQ * n + i] = (-w * ls * isd - cp[C_RS] * isq - vbq) / ls
        dy[VBD * n + i] = (isd + w * cs * vbq - iod) / cs
        dy[VBQ * n + i] = (isq - w * cs * vbd - ioq) / cs
        ud = cp[C_KPD] * (iod_ref - iod) + cp[C_KID] * y[PHID * n + i]
        uq = cp[C_KPQ] * (ioq_ref - ioq) + cp[C_KIQ] * y[PHIQ * n + i]
        dy[IOD * n + i] = (-cp[C_RF] * iod + ud) / cp[C_LF]
        dy[IOQ * n + i] = (-cp[C_RF] * ioq + uq) / cp[C_LF]
        dy[PHID * n + i] = iod_ref - iod
        dy[PHIQ * n + i] = ioq_ref - ioq
        pc = 1.5 * (iod * (vbd_hat - ud) + ioq * (vbq_hat - uq))
        aux[A_PC, i] = pc
        pc_sum += pc

    dy[NF * n] = vref - vdc
    if vdc <= 0.0:
        return ERR_VDC
    dy[NF * n + 1] = (cp[C_SC] * pc_sum - vdc * load) / (cp[C_CDC] * vdc)
    for j in range(dy.shape[0]):
        if not math.isfinite(dy[j]):
            return ERR_NONFINITE
    return OK


@njit(cache=True)
def integrate(y0, t0, dt, nsteps, record_every, method, n, gp, G, B, cp, opts, pe_frozen,
              connected, il, atk, flt_win, flt_il, flt_G, flt_B):
    """Fixed-step integration; method 0 is classical RK4, 1 is forward Euler.

    Event windows are held fixed across the stages of a step (decided at the
    step start), so edges on the step grid introduce no switching error.
    Returns (times, states, aux, status, failing step).  Rows are recorded at
    step 0, every ``record_every`` steps, and at the final step.
    """
    m = y0.shape[0]
    nrec = nsteps // record_every + 1
    if nsteps % record_every != 0:
        nrec += 1
    times = np.empty(nrec)
    Y = np.empty((nrec, m))
    AUX = np.empty((nrec, N_AUX, n))

    y = y0.copy()
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    tmp = np.empty(m)
    aux = np.empty((N_AUX, n))

    status = rhs(t0, t0, y, n, gp, G, B, cp, opts, pe_frozen, connected, il, atk, flt_win, flt_il,
                 flt_G, flt_B, k1, aux)
    if status != OK:
        return times[:0], Y[:0], AUX[:0], status, 0
    times[0] = t0
    Y[0] = y
    AUX[0] = aux
    r = 1

    for s in range(nsteps):
        t = t0 + s * dt
        # step 0 reuses the k1 evaluated before the loop
        if s > 0:
            status = rhs(t, t, y, n, gp, G, B, cp, opts, pe_frozen, connected, il, atk, flt_win,
                         flt_il, flt_G, flt_B, k1, aux)
            if status != OK:
                return times[:r], Y[:r], AUX[:r], status, s
        if method == 0:
            for j in range(m):
                tmp[j] = y[j] + 0.5 * dt * k1[j]
            status = rhs(t + 0.5 * dt, t, tmp, n, gp, G, B, cp, opts, pe_frozen, connected, il, atk,
                         flt_win, flt_il, flt_G, flt_B, k2, aux)
            if status != OK:
                return times[:r], Y[:r], AUX[:r], status, s
            for j in range(m):
                tmp[j] = y[j] + 0.5 * dt * k2[j]
            status = rhs(t + 0.5 * dt, t, tmp, n, gp, G, B, cp, opts, pe_frozen, connected, il, atk,
                         flt_win, flt_il, flt_G, flt_B, k3, aux)
            if status != OK:
                return times[:r], Y[:r], AUX[:r], status, s
            for j in range(m):
                tmp[j] = y[j] + dt * k3[j]
            status = rhs(t + dt, t, tmp, n, gp, G, B, cp, opts, pe_frozen, connected, il, atk,
                         flt_win, flt_il, flt_G, flt_B, k4, aux)
            if status != OK:
                return times[:r], Y[:r], AUX[:r], status, s
            for j in range(m):
                y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        else:
            for j in range(m):
                y[j] += dt * k1[j]

        for j in range(m):
            if not math.isfinite(y[j]):
                return times[:r], Y[:r], AUX[:r], ERR_NONFINITE, s + 1
        if y[NF * n + 1] <= 0.0:
            return times[:r], Y[:r], AUX[:r], ERR_VDC, s + 1

        if (s + 1) % record_every == 0 or s + 1 == nsteps:
            t_rec = t0 + (s + 1) * dt
            status = rhs(t_rec, t_rec, y, n, gp, G, B, cp, opts, pe_frozen, connected, il, atk, flt_win,
                         flt_il, flt_G, flt_B, tmp, aux)
            if status != OK:
                return times[:r], Y[:r], AUX[:r], status, s + 1
            times[r] = t_rec
            Y[r] = y
            AUX[r] = aux
            r += 1
    return times[:r], Y[:r], AUX[:r], OK, nsteps
