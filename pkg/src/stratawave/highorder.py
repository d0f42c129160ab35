"""Method-of-lines solver: WENO5 reconstruction with SSP Runge-Kutta stepping.

The spatial operator reconstructs (eps, u) componentwise to fifth order
with classical WENO weights, then feeds the biased interface states to the
same f-wave Riemann solver used by the second-order scheme.  Time stepping
uses the ten-stage fourth-order strong-stability-preserving Runge-Kutta
method (SSP coefficient 6) in its two-register low-storage form; a
classical four-stage RK4 tableau is kept for cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import _kernels as _k
from .solver import (BoundaryCondition, Grid, SimState, _raise_for_status,
                     apply_bc, max_speed)

__all__ = [
    "ReconstructionPair",
    "RKScheme",
    "SSPRK104",
    "RK4_CLASSIC",
    "weno5_reconstruct",
    "reconstruct_interfaces",
    "mol_rhs",
    "ssprk4_advance",
    "advance_to_weno",
    "DEFAULT_WENO_CFL",
]

WENO_EPS = 1e-6
DEFAULT_WENO_CFL = 2.2
NGHOST = 3


def weno5_reconstruct(window, eps_w: float = WENO_EPS, nonlinear: bool = True) -> float:
    """Interface value at the right edge of the centre cell of a 5-cell window.

    With ``nonlinear=True`` the classical smoothness-indicator weights are
    used (ideal weights 1/10, 6/10, 3/10, regularisation ``eps_w``); with
    ``nonlinear=False`` the ideal weights are applied directly, which is
    the underlying linear reconstruction, exact for polynomials of degree
    at most four sampled as cell averages.
    """
    w = [float(v) for v in window]
    if len(w) != 5:
        raise ValueError("window must contain exactly 5 cell averages")
    if not all(math.isfinite(v) for v in w):
        raise ValueError("window values must be finite")
    return float(_k.weno5_right_edge(w[0], w[1], w[2], w[3], w[4], eps_w, nonlinear))


@dataclass(frozen=True)
class ReconstructionPair:
    """Left/right-biased reconstructed (eps, u) states at each interface.

    Entry j describes the interface between interior cells j-1 and j
    (j = 0 is the left domain edge), so arrays have m+1 entries.
    """

    eps_left: np.ndarray
    u_left: np.ndarray
    eps_right: np.ndarray
    u_right: np.ndarray


def reconstruct_interfaces(state: SimState, grid: Grid, bc: BoundaryCondition,
                           t: Optional[float] = None,
                           nonlinear: bool = True) -> ReconstructionPair:
    """WENO5 biased interface states for every interior interface."""
    eps_e, u_e = apply_bc(state, grid, bc, t, ng=NGHOST)
    el, er = _k.weno5_edge_states(eps_e, NGHOST, WENO_EPS, nonlinear)
    ul, ur = _k.weno5_edge_states(u_e, NGHOST, WENO_EPS, nonlinear)
    sel = slice(NGHOST - 1, NGHOST + grid.m)
    return ReconstructionPair(eps_left=el[sel], u_left=ul[sel],
                              eps_right=er[sel], u_right=ur[sel])


@dataclass(frozen=True)
class RKScheme:
    """Explicit Runge-Kutta tableau (A strictly lower triangular)."""

    name: str
    a: tuple
    b: tuple
    c: tuple
    ssp_coeff: float

    @property
    def stages(self) -> int:
        return len(self.b)

    def order_residuals(self) -> dict:
        """Residuals of the order conditions up to order four."""
        a = np.array(self.a)
        b = np.array(self.b)
        c = np.array(self.c)
        ac = a @ c
        return {
            "order1": abs(b.sum() - 1.0),
            "order2": abs(b @ c - 0.5),
            "order3_cc": abs(b @ c**2 - 1.0 / 3.0),
            "order3_ac": abs(b @ ac - 1.0 / 6.0),
            "order4_ccc": abs(b @ c**3 - 0.25),
            "order4_cac": abs((b * c) @ ac - 0.125),
            "order4_acc": abs(b @ (a @ c**2) - 1.0 / 12.0),
            "order4_aac": abs(b @ (a @ ac) - 1.0 / 24.0),
        }


def _build_ssprk104() -> RKScheme:
    # Ten-stage fourth-order SSP method, two-register low-storage form.
    # Stages 1-5 chain forward-Euler increments of dt/6; stage 6 restarts
    # from a combination, giving a(6..10, 1..5) = 1/15.
    n = 10
    a = [[0.0] * n for _ in range(n)]
    for i in range(1, 5):
        for j in range(i):
            a[i][j] = 1.0 / 6.0
    for i in range(5, n):
        for j in range(5):
            a[i][j] = 1.0 / 15.0
        for j in range(5, i):
            a[i][j] = 1.0 / 6.0
    b = [1.0 / 10.0] * n
    c = [sum(row) for row in a]
    return RKScheme(name="ssprk104",
                    a=tuple(tuple(r) for r in a), b=tuple(b), c=tuple(c),
                    ssp_coeff=6.0)


SSPRK104 = _build_ssprk104()

RK4_CLASSIC = RKScheme(
    name="rk4",
    a=((0.0, 0.0, 0.0, 0.0),
       (0.5, 0.0, 0.0, 0.0),
       (0.0, 0.5, 0.0, 0.0),
       (0.0, 0.0, 1.0, 0.0)),
    b=(1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0),
    c=(0.0, 0.5, 0.5, 1.0),
    ssp_coeff=0.0,
)


def ssprk4_advance(q, rhs: Callable, dt: float, t: float = 0.0,
                   scheme: RKScheme = SSPRK104):
    """One explicit RK step of q' = rhs(q, t).

    The default ten-stage SSP scheme runs in its low-storage form; any
    other tableau is executed generically.  ``q`` may be any ndarray.
    """
    q = np.asarray(q, dtype=float)
    if scheme.name == "ssprk104":
        c = scheme.c
        q1 = q.copy()
        q2 = q.copy()
        for i in range(5):
            q1 += (dt / 6.0) * rhs(q1, t + c[i] * dt)
        q2 = q2 / 25.0 + 0.36 * q1
        q1 = 15.0 * q2 - 5.0 * q1
        for i in range(5, 9):
            q1 += (dt / 6.0) * rhs(q1, t + c[i] * dt)
        return q2 + 0.6 * q1 + (dt / 10.0) * rhs(q1, t + c[9] * dt)
    ks = []
    for i in range(scheme.stages):
        qi = q.copy()
        for j, aij in enumerate(scheme.a[i][:i]):
            if aij != 0.0:
                qi += dt * aij * ks[j]
        ks.append(rhs(qi, t + scheme.c[i] * dt))
    out = q.copy()
    for bi, ki in zip(scheme.b, ks):
        out += dt * bi * ki
    return out


def mol_rhs(state: SimState, grid: Grid, bc: BoundaryCondition,
            t: Optional[float] = None, nonlinear: bool = True):
    """Semi-discrete time derivative of the conserved fields (eps, rho*u)."""
    eps_e, u_e = apply_bc(state, grid, bc, t, ng=NGHOST)
    rho_e, code_e, p1_e, p2_e = grid.extended_materials(bc.kind, NGHOST)
    deps, dmom, status = _k.mol_rhs_weno(eps_e, u_e, rho_e, code_e, p1_e, p2_e,
                                         grid.dx, WENO_EPS, nonlinear)
    _raise_for_status(status, t if t is not None else state.t)
    return deps, dmom


def _conserved_rhs(grid: Grid, bc: BoundaryCondition):
    rho_e, code_e, p1_e, p2_e = grid.extended_materials(bc.kind, NGHOST)
    rho = grid.rho_c
    m = grid.m
    ng = NGHOST

    def rhs(q, t):
        eps = q[0]
        u = q[1] / rho
        st = SimState(eps=eps, u=u, t=t)
        eps_e, u_e = apply_bc(st, grid, bc, t, ng=ng)
        deps, dmom, status = _k.mol_rhs_weno(eps_e, u_e, rho_e, code_e,
                                             p1_e, p2_e, grid.dx, WENO_EPS, True)
        _raise_for_status(status, t)
        return np.stack([deps, dmom])

    return rhs


def advance_to_weno(state: SimState, grid: Grid, bc: BoundaryCondition,
                    t_end: float, cfl: float = DEFAULT_WENO_CFL) -> SimState:
    """Advance the WENO5 + SSPRK(10,4) scheme, landing exactly on t_end."""
    if t_end < state.t - 1e-12:
        raise ValueError("t_end lies before the current state time")
    rhs = _conserved_rhs(grid, bc)
    rho = grid.rho_c
    eps_tol = 1e-12 * max(1.0, abs(t_end))
    while state.t < t_end - eps_tol:
        stable = cfl * grid.dx / max_speed(state, grid)
        remaining = t_end - state.t
        final = remaining <= stable * (1.0 + 1e-12)
        dt = remaining if final else stable
        q = np.stack([state.eps, rho * state.u])
        q = ssprk4_advance(q, rhs, dt, t=state.t)
        state = SimState(eps=q[0], u=q[1] / rho, t=t_end if final else state.t + dt)
        if not np.all(np.isfinite(q)):
            _raise_for_status(_k.STATUS_NONFINITE, state.t)
    return state
