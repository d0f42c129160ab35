"""Compiled numerical kernels.

Everything here is numba-jitted and operates on plain float64 arrays.
Stress laws are dispatched on an integer code per cell with two parameter
slots (see medium.py for the code table).  Public modules wrap these
kernels behind typed interfaces; nothing in here is part of the API.

Status codes returned by the stepping kernels:
    0  ok
    1  non-finite field value
    2  strain left the admissible domain
    3  degenerate interface (vanishing total impedance)
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_DOMAIN = 2
STATUS_DEGENERATE = 3

LIM_NONE = 0
LIM_MINMOD = 1
LIM_SUPERBEE = 2
LIM_MC = 3
LIM_VANLEER = 4


@njit(inline="always", cache=True)
def law_sigma(code, p1, p2, e):
    if code == 0:
        return math.expm1(p1 * e)
    elif code == 1:
        return p1 * e
    elif code == 2:
        return p1 * (1.0 - (1.0 + e) ** (-p2))
    else:
        return p1 * e + p2 * e * e * e


@njit(inline="always", cache=True)
def law_dsigma(code, p1, p2, e):
    if code == 0:
        return p1 * math.exp(p1 * e)
    elif code == 1:
        return p1
    elif code == 2:
        return p1 * p2 * (1.0 + e) ** (-p2 - 1.0)
    else:
        return p1 + 3.0 * p2 * e * e


@njit(inline="always", cache=True)
def law_potential(code, p1, p2, e):
    if code == 0:
        return math.expm1(p1 * e) / p1 - e
    elif code == 1:
        return 0.5 * p1 * e * e
    elif code == 2:
        if p2 == 1.0:
            return p1 * (e - math.log1p(e))
        return p1 * (e - ((1.0 + e) ** (1.0 - p2) - 1.0) / (1.0 - p2))
    else:
        return 0.5 * p1 * e * e + 0.25 * p2 * e * e * e * e


@njit(inline="always", cache=True)
def strain_admissible(code, e):
    if not math.isfinite(e):
        return False
    if code == 2:
        return e > -1.0
    return True


@njit(inline="always", cache=True)
def limiter_phi(limiter, th):
    if limiter == LIM_NONE:
        return 1.0
    elif limiter == LIM_MINMOD:
        return max(0.0, min(1.0, th))
    elif limiter == LIM_SUPERBEE:
        return max(0.0, max(min(1.0, 2.0 * th), min(2.0, th)))
    elif limiter == LIM_MC:
        return max(0.0, min(0.5 * (1.0 + th), min(2.0, 2.0 * th)))
    else:
        return (th + abs(th)) / (1.0 + abs(th))


@njit(cache=True)
def law_eval_array(code, p1, p2, eps, which):
    """Per-cell law evaluation; which: 0 sigma, 1 dsigma, 2 potential."""
    n = eps.shape[0]
    out = np.empty(n)
    for i in range(n):
        if which == 0:
            out[i] = law_sigma(code[i], p1[i], p2[i], eps[i])
        elif which == 1:
            out[i] = law_dsigma(code[i], p1[i], p2[i], eps[i])
        else:
            out[i] = law_potential(code[i], p1[i], p2[i], eps[i])
    return out


@njit(cache=True)
def max_wave_speed(eps, rho, code, p1, p2):
    """Largest local sound speed; returns (speed, status)."""
    maxc = 0.0
    for i in range(eps.shape[0]):
        e = eps[i]
        if not strain_admissible(code[i], e):
            return 0.0, STATUS_DOMAIN if math.isfinite(e) else STATUS_NONFINITE
        c2 = law_dsigma(code[i], p1[i], p2[i], e) / rho[i]
        if not (c2 >= 0.0):
            return 0.0, STATUS_NONFINITE
        c = math.sqrt(c2)
        if c > maxc:
            maxc = c
    return maxc, STATUS_OK


@njit(cache=True)
def step_wave_prop(eps_e, u_e, rho_e, code_e, p1_e, p2_e, dt, dx,
                   order, limiter):
    """One conservative update of the first/second-order wave-propagation scheme.

    Input arrays are ghost-extended with two cells per side.  The flux
    difference at each interface is split onto the eigenvectors (1, Z_l)
    and (1, -Z_r) with impedances evaluated in each side's own state, so
    the update telescopes exactly even across material discontinuities.

    Returns (new_eps, new_u, status, max_speed_of_new_state).
    """
    n = eps_e.shape[0]
    m = n - 4
    nif = n - 1

    sig = np.empty(n)
    Z = np.empty(n)
    c = np.empty(n)
    for i in range(n):
        e = eps_e[i]
        if not (math.isfinite(e) and math.isfinite(u_e[i])):
            return eps_e[2:2 + m].copy(), u_e[2:2 + m].copy(), STATUS_NONFINITE, 0.0
        if not strain_admissible(code_e[i], e):
            return eps_e[2:2 + m].copy(), u_e[2:2 + m].copy(), STATUS_DOMAIN, 0.0
        sig[i] = law_sigma(code_e[i], p1_e[i], p2_e[i], e)
        ds = law_dsigma(code_e[i], p1_e[i], p2_e[i], e)
        Z[i] = math.sqrt(rho_e[i] * ds)
        c[i] = math.sqrt(ds / rho_e[i])

    # f-wave split of the flux difference, f = (-u, -sigma).
    f1a = np.empty(nif)
    f1b = np.empty(nif)
    f2a = np.empty(nif)
    f2b = np.empty(nif)
    s1 = np.empty(nif)
    s2 = np.empty(nif)
    for k in range(nif):
        zl = Z[k]
        zr = Z[k + 1]
        den = zl + zr
        if den <= 1e-14:
            return eps_e[2:2 + m].copy(), u_e[2:2 + m].copy(), STATUS_DEGENERATE, 0.0
        d1 = -(u_e[k + 1] - u_e[k])
        d2 = -(sig[k + 1] - sig[k])
        b1 = (d2 + zr * d1) / den
        b2 = (zl * d1 - d2) / den
        f1a[k] = b1
        f1b[k] = b1 * zl
        f2a[k] = b2
        f2b[k] = -b2 * zr
        s1[k] = -c[k]
        s2[k] = c[k + 1]

    # Limited second-order correction fluxes.  Upwind interface for the
    # left-going family is k+1, for the right-going family k-1; the wave
    # ratio projects the upwind wave onto the local one.
    dtdx = dt / dx
    corr1 = np.zeros(nif)
    corr2 = np.zeros(nif)
    if order == 2:
        for k in range(1, nif - 1):
            nn = f1a[k] * f1a[k] + f1b[k] * f1b[k]
            if nn > 1e-28:
                th = (f1a[k + 1] * f1a[k] + f1b[k + 1] * f1b[k]) / nn
                fac = -0.5 * (1.0 - abs(s1[k]) * dtdx) * limiter_phi(limiter, th)
                corr1[k] += fac * f1a[k]
                corr2[k] += fac * f1b[k]
            nn = f2a[k] * f2a[k] + f2b[k] * f2b[k]
            if nn > 1e-28:
                th = (f2a[k - 1] * f2a[k] + f2b[k - 1] * f2b[k]) / nn
                fac = 0.5 * (1.0 - abs(s2[k]) * dtdx) * limiter_phi(limiter, th)
                corr1[k] += fac * f2a[k]
                corr2[k] += fac * f2b[k]

    new_eps = np.empty(m)
    new_u = np.empty(m)
    status = STATUS_OK
    maxc = 0.0
    for i in range(m):
        kl = i + 1
        kr = i + 2
        e = eps_e[i + 2] - dtdx * (f2a[kl] + f1a[kr]) - dtdx * (corr1[kr] - corr1[kl])
        mom = rho_e[i + 2] * u_e[i + 2] - dtdx * (f2b[kl] + f1b[kr]) \
            - dtdx * (corr2[kr] - corr2[kl])
        v = mom / rho_e[i + 2]
        if not (math.isfinite(e) and math.isfinite(v)):
            status = STATUS_NONFINITE
        elif not strain_admissible(code_e[i + 2], e):
            status = STATUS_DOMAIN
        else:
            cc = math.sqrt(law_dsigma(code_e[i + 2], p1_e[i + 2], p2_e[i + 2], e)
                           / rho_e[i + 2])
            if cc > maxc:
                maxc = cc
        new_eps[i] = e
        new_u[i] = v
    return new_eps, new_u, status, maxc


@njit(inline="always", cache=True)
def weno5_right_edge(vm2, vm1, v0, vp1, vp2, eps_w, nonlinear):
    """WENO5 value at the right edge of the centre cell of a 5-cell window."""
    q0 = (2.0 * vm2 - 7.0 * vm1 + 11.0 * v0) / 6.0
    q1 = (-vm1 + 5.0 * v0 + 2.0 * vp1) / 6.0
    q2 = (2.0 * v0 + 5.0 * vp1 - vp2) / 6.0
    if not nonlinear:
        return 0.1 * q0 + 0.6 * q1 + 0.3 * q2
    t1 = vm2 - 2.0 * vm1 + v0
    t2 = vm2 - 4.0 * vm1 + 3.0 * v0
    b0 = (13.0 / 12.0) * t1 * t1 + 0.25 * t2 * t2
    t1 = vm1 - 2.0 * v0 + vp1
    t2 = vm1 - vp1
    b1 = (13.0 / 12.0) * t1 * t1 + 0.25 * t2 * t2
    t1 = v0 - 2.0 * vp1 + vp2
    t2 = 3.0 * v0 - 4.0 * vp1 + vp2
    b2 = (13.0 / 12.0) * t1 * t1 + 0.25 * t2 * t2
    a0 = 0.1 / ((eps_w + b0) * (eps_w + b0))
    a1 = 0.6 / ((eps_w + b1) * (eps_w + b1))
    a2 = 0.3 / ((eps_w + b2) * (eps_w + b2))
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)


@njit(cache=True)
def weno5_edge_states(v_e, ng, eps_w, nonlinear):
    """Left/right-biased interface values from ghost-extended cell averages.

    Interface j sits between extended cells j and j+1.  left[j] is the
    reconstruction from cell j evaluated at its right edge, right[j] the
    reconstruction from cell j+1 at its left edge.  Values are produced
    for j in [ng-1, n-ng]; other entries are zero.
    """
    n = v_e.shape[0]
    left = np.zeros(n - 1)
    right = np.zeros(n - 1)
    for j in range(ng - 1, n - ng):
        left[j] = weno5_right_edge(v_e[j - 2], v_e[j - 1], v_e[j], v_e[j + 1],
                                   v_e[j + 2], eps_w, nonlinear)
        right[j] = weno5_right_edge(v_e[j + 3], v_e[j + 2], v_e[j + 1], v_e[j],
                                    v_e[j - 1], eps_w, nonlinear)
    return left, right


@njit(cache=True)
def mol_rhs_weno(eps_e, u_e, rho_e, code_e, p1_e, p2_e, dx, eps_w, nonlinear):
    """Semi-discrete RHS: WENO5 reconstruction feeding the f-wave solver.

    Arrays are ghost-extended with three cells per side.  Fluctuations at
    each interface are combined with the flux difference across the cell's
    own reconstructed edge values, which keeps the scheme conservative and
    reduces to the first-order fluctuation form for piecewise-constant
    reconstruction.

    Returns (deps_dt, dmom_dt, status).
    """
    ng = 3
    n = eps_e.shape[0]
    m = n - 2 * ng

    epsL, epsR = weno5_edge_states(eps_e, ng, eps_w, nonlinear)
    uL, uR = weno5_edge_states(u_e, ng, eps_w, nonlinear)

    deps = np.zeros(m)
    dmom = np.zeros(m)

    # Interface fluctuations for j in [ng-1, m+ng-1].
    nif = n - 1
    am1 = np.zeros(nif)   # left-going fluctuation, eps component
    am2 = np.zeros(nif)   # left-going fluctuation, momentum component
    ap1 = np.zeros(nif)
    ap2 = np.zeros(nif)
    for j in range(ng - 1, m + ng):
        el = epsL[j]
        er = epsR[j]
        if not (strain_admissible(code_e[j], el) and strain_admissible(code_e[j + 1], er)):
            return deps, dmom, STATUS_DOMAIN
        sl = law_sigma(code_e[j], p1_e[j], p2_e[j], el)
        sr = law_sigma(code_e[j + 1], p1_e[j + 1], p2_e[j + 1], er)
        zl = math.sqrt(rho_e[j] * law_dsigma(code_e[j], p1_e[j], p2_e[j], el))
        zr = math.sqrt(rho_e[j + 1] * law_dsigma(code_e[j + 1], p1_e[j + 1], p2_e[j + 1], er))
        den = zl + zr
        if den <= 1e-14:
            return deps, dmom, STATUS_DEGENERATE
        d1 = -(uR[j] - uL[j])
        d2 = -(sr - sl)
        b1 = (d2 + zr * d1) / den
        b2 = (zl * d1 - d2) / den
        am1[j] = b1
        am2[j] = b1 * zl
        ap1[j] = b2
        ap2[j] = -b2 * zr

    status = STATUS_OK
    for i in range(m):
        e = i + ng
        # Flux difference across the cell's own reconstructed edge values.
        sig_right = law_sigma(code_e[e], p1_e[e], p2_e[e], epsL[e])
        sig_left = law_sigma(code_e[e], p1_e[e], p2_e[e], epsR[e - 1])
        int1 = -(uL[e] - uR[e - 1])
        int2 = -(sig_right - sig_left)
        deps[i] = -(ap1[e - 1] + am1[e] + int1) / dx
        dmom[i] = -(ap2[e - 1] + am2[e] + int2) / dx
        if not (math.isfinite(deps[i]) and math.isfinite(dmom[i])):
            status = STATUS_NONFINITE
    return deps, dmom, status


@njit(cache=True)
def total_entropy_sum(eps, u, rho, code, p1, p2, dx):
    """Compensated left-to-right sum of 0.5*rho*u^2 + Phi(eps) over cells."""
    total = 0.0
    comp = 0.0
    for i in range(eps.shape[0]):
        term = (0.5 * rho[i] * u[i] * u[i]
                + law_potential(code[i], p1[i], p2[i], eps[i])) * dx
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


@njit(cache=True)
def conserved_totals(eps, u, rho, dx):
    """Compensated sums of the conserved fields (strain, momentum)."""
    te = 0.0
    ce = 0.0
    tm = 0.0
    cm = 0.0
    for i in range(eps.shape[0]):
        y = eps[i] * dx - ce
        t = te + y
        ce = (t - te) - y
        te = t
        y = rho[i] * u[i] * dx - cm
        t = tm + y
        cm = (t - tm) - y
        tm = t
    return te, tm
