"""Finite-volume core: grid, Riemann solver, limiters, boundary conditions,
and first/second-order wave-propagation time stepping.

The conserved variables are (eps, rho*u) with flux f = (-u, -sigma(eps,x)),
density constant within each cell.  Riemann problems at cell interfaces are
solved with a flux-difference (f-wave) splitting onto the eigenvectors
(1, Z_l) and (1, -Z_r), with the impedances evaluated in each side's own
state.  The two f-waves always sum to the interface flux difference, so
the method is conservative for arbitrary material discontinuities.  The
second-order scheme adds limited correction fluxes built from the same
f-waves (Lax-Wendroff-type with a TVD limiter).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import _kernels as _k
from .medium import Material, Medium, StrainDomainError

__all__ = [
    "Grid",
    "SimState",
    "FluctuationSet",
    "BoundaryCondition",
    "SolverConfig",
    "BlowUpError",
    "DegenerateWaveError",
    "riemann_fwave",
    "limiter_value",
    "cfl_dt",
    "apply_bc",
    "step",
    "advance_to",
    "write_snapshot",
]

LIMITER_CODES = {
    "none": _k.LIM_NONE,
    "minmod": _k.LIM_MINMOD,
    "superbee": _k.LIM_SUPERBEE,
    "mc": _k.LIM_MC,
    "vanleer": _k.LIM_VANLEER,
}


class BlowUpError(RuntimeError):
    """A field became non-finite or a strain left its admissible domain."""


class DegenerateWaveError(RuntimeError):
    """Total interface impedance vanished (loss of hyperbolicity)."""


def _raise_for_status(status: int, t: float):
    if status == _k.STATUS_NONFINITE:
        raise BlowUpError(f"non-finite field at t={t:.6g}")
    if status == _k.STATUS_DOMAIN:
        raise BlowUpError(f"strain left the admissible domain at t={t:.6g}")
    if status == _k.STATUS_DEGENERATE:
        raise DegenerateWaveError(f"degenerate interface impedance at t={t:.6g}")


@dataclass
class Grid:
    """Uniform cell grid aligned to the layers of a periodic medium.

    dx is chosen so the thinnest layer holds exactly ``cells_per_layer``
    cells; every material interface then falls on a cell edge.  Per-cell
    material data (density, law code, law parameters) is cached as plain
    arrays for the compiled kernels.
    """

    medium: Medium
    x_lo: float
    x_hi: float
    cells_per_layer: int
    m: int = field(init=False)
    dx: float = field(init=False)

    def __post_init__(self):
        if self.cells_per_layer < 1:
            raise ValueError("cells_per_layer must be a positive integer")
        if not self.x_hi > self.x_lo:
            raise ValueError("need x_hi > x_lo")
        med = self.medium
        widths = med.widths() * med.period
        self.dx = float(widths.min()) / self.cells_per_layer

        def to_cells(length: float, what: str) -> int:
            ratio = length / self.dx
            n = round(ratio)
            if abs(ratio - n) > 1e-9 * max(1.0, abs(ratio)) or n <= 0:
                raise ValueError(
                    f"{what} ({length}) is not a positive integer multiple of dx={self.dx}")
            return n

        layer_cells = [to_cells(w, f"layer {i} width") for i, w in enumerate(widths)]
        self._cells_per_period = sum(layer_cells)
        self.m = to_cells(self.x_hi - self.x_lo, "domain length")

        offset_len = self.x_lo % med.period
        ratio = offset_len / self.dx
        self._phase_cells = round(ratio)
        if abs(ratio - self._phase_cells) > 1e-9 * max(1.0, self._cells_per_period):
            raise ValueError("x_lo does not fall on a cell edge of the layer pattern")

        pattern = np.repeat(np.arange(len(layer_cells)), layer_cells)
        idx = (self._phase_cells + np.arange(self.m)) % self._cells_per_period
        self.material_index = pattern[idx]

        mats = med.materials
        rho = np.array([mat.rho for mat in mats])
        code = np.array([mat.law.law_code for mat in mats], dtype=np.int64)
        p1 = np.array([mat.law.kernel_params[0] for mat in mats])
        p2 = np.array([mat.law.kernel_params[1] for mat in mats])
        self.rho_c = rho[self.material_index]
        self.code_c = code[self.material_index]
        self.p1_c = p1[self.material_index]
        self.p2_c = p2[self.material_index]
        self._ext_cache: dict = {}

    @property
    def x_centers(self) -> np.ndarray:
        return self.x_lo + (np.arange(self.m) + 0.5) * self.dx

    @property
    def x_edges(self) -> np.ndarray:
        return self.x_lo + np.arange(self.m + 1) * self.dx

    def material_of_cell(self, i: int) -> Material:
        return self.medium.materials[self.material_index[i]]

    def is_whole_periods(self) -> bool:
        return self.m % self._cells_per_period == 0

    def extended_materials(self, bc_kind: str, ng: int = 2):
        """Ghost-extended (rho, code, p1, p2) arrays for a BC variant."""
        key = (bc_kind, ng)
        if key in self._ext_cache:
            return self._ext_cache[key]
        m = self.m
        if bc_kind == "periodic":
            if m % self._cells_per_period != 0:
                raise ValueError("periodic BC requires a whole number of periods")
            idx = np.arange(-ng, m + ng) % m
        elif bc_kind == "moving_wall":
            # Mirrored material left of the wall, copies on the right.
            idx = np.concatenate([np.arange(ng - 1, -1, -1),
                                  np.arange(m),
                                  np.full(ng, m - 1)])
        elif bc_kind == "extrapolation":
            idx = np.concatenate([np.zeros(ng, dtype=int),
                                  np.arange(m),
                                  np.full(ng, m - 1)])
        else:
            raise ValueError(f"unknown boundary condition kind {bc_kind!r}")
        ext = (self.rho_c[idx].copy(), self.code_c[idx].copy(),
               self.p1_c[idx].copy(), self.p2_c[idx].copy())
        self._ext_cache[key] = ext
        return ext

    def sigma_of(self, eps: np.ndarray) -> np.ndarray:
        return _k.law_eval_array(self.code_c, self.p1_c, self.p2_c,
                                 np.asarray(eps, dtype=float), 0)

    def check_admissible(self, eps: np.ndarray):
        for i, mat in enumerate(self.medium.materials):
            sel = eps[self.material_index == i]
            if sel.size and not mat.law.admissible(sel):
                raise StrainDomainError(
                    f"strain field inadmissible for layer material {i}")


@dataclass(frozen=True)
class SimState:
    """Cell-averaged strain and velocity fields plus the simulation clock."""

    eps: np.ndarray
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.eps.shape != self.u.shape:
            raise ValueError("eps and u must have equal lengths")

    @property
    def m(self) -> int:
        return self.eps.shape[0]


@dataclass(frozen=True)
class FluctuationSet:
    """f-wave output of one interface Riemann problem.

    z1/z2 are the two f-waves in (strain, momentum) components with speeds
    s1 <= 0 <= s2; amdq/apdq are the left/right-going fluctuations.  The
    waves satisfy z1 + z2 = delta (the interface flux difference) exactly.
    """

    z1: np.ndarray
    z2: np.ndarray
    s1: float
    s2: float
    amdq: np.ndarray
    apdq: np.ndarray
    delta: np.ndarray


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary treatment:

    * ``periodic``       -- both edges wrap (domain must be whole periods).
    * ``moving_wall``    -- left edge is a solid wall moving with the
      prescribed velocity ``wall_velocity(t)``; the right edge extrapolates.
    * ``extrapolation``  -- zero-order outflow at both edges.
    """

    kind: str
    wall_velocity: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.kind not in ("periodic", "moving_wall", "extrapolation"):
            raise ValueError(f"unknown boundary condition kind {self.kind!r}")
        if self.kind == "moving_wall" and self.wall_velocity is None:
            raise ValueError("moving_wall requires a wall_velocity function")

    @staticmethod
    def periodic() -> "BoundaryCondition":
        return BoundaryCondition("periodic")

    @staticmethod
    def moving_wall(wall_velocity: Callable[[float], float]) -> "BoundaryCondition":
        return BoundaryCondition("moving_wall", wall_velocity)

    @staticmethod
    def extrapolation() -> "BoundaryCondition":
        return BoundaryCondition("extrapolation")


@dataclass(frozen=True)
class SolverConfig:
    """Wave-propagation scheme settings."""

    cfl_target: float = 0.9
    limiter: Optional[str] = "vanleer"
    order: int = 2

    def __post_init__(self):
        if not 0.0 < self.cfl_target <= 1.0:
            raise ValueError("cfl_target must lie in (0, 1]")
        lim = "none" if self.limiter is None else str(self.limiter).lower()
        if lim not in LIMITER_CODES:
            raise ValueError(f"unknown limiter {self.limiter!r}; choose from {sorted(LIMITER_CODES)}")
        object.__setattr__(self, "limiter", lim)
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")

    @property
    def limiter_code(self) -> int:
        return LIMITER_CODES[self.limiter]


def riemann_fwave(q_l, q_r, mat_l: Material, mat_r: Material) -> FluctuationSet:
    """Solve one interface Riemann problem by f-wave splitting.

    q_l and q_r are (eps, u) pairs.  The flux difference
    delta = f(q_r) - f(q_l), f = (-u, -sigma), is decomposed as
    beta1*(1, Z_l) + beta2*(1, -Z_r); the first wave travels at -c_l and
    the second at +c_r.
    """
    eps_l, u_l = float(q_l[0]), float(q_l[1])
    eps_r, u_r = float(q_r[0]), float(q_r[1])
    mat_l.law.check_strain(eps_l)
    mat_r.law.check_strain(eps_r)

    z_l = float(mat_l.impedance(eps_l))
    z_r = float(mat_r.impedance(eps_r))
    den = z_l + z_r
    if den <= 1e-14:
        raise DegenerateWaveError("total interface impedance vanishes")

    delta = np.array([-(u_r - u_l),
                      -(mat_r.law.sigma(eps_r) - mat_l.law.sigma(eps_l))])
    beta1 = (delta[1] + z_r * delta[0]) / den
    beta2 = (z_l * delta[0] - delta[1]) / den
    z1 = beta1 * np.array([1.0, z_l])
    z2 = beta2 * np.array([1.0, -z_r])
    s1 = -float(mat_l.sound_speed(eps_l))
    s2 = float(mat_r.sound_speed(eps_r))
    return FluctuationSet(z1=z1, z2=z2, s1=s1, s2=s2,
                          amdq=z1, apdq=z2, delta=delta)


def limiter_value(theta, variant: Optional[str]):
    """Limiter multiplier phi(theta); accepts scalars or arrays."""
    lim = "none" if variant is None else str(variant).lower()
    if lim not in LIMITER_CODES:
        raise ValueError(f"unknown limiter {variant!r}")
    th = np.asarray(theta, dtype=float)
    if lim == "none":
        out = np.ones_like(th)
    elif lim == "minmod":
        out = np.maximum(0.0, np.minimum(1.0, th))
    elif lim == "superbee":
        out = np.maximum(0.0, np.maximum(np.minimum(1.0, 2.0 * th),
                                         np.minimum(2.0, th)))
    elif lim == "mc":
        out = np.maximum(0.0, np.minimum((1.0 + th) / 2.0,
                                         np.minimum(2.0, 2.0 * th)))
    else:
        out = (th + np.abs(th)) / (1.0 + np.abs(th))
    return out if np.ndim(theta) else float(out)


def max_speed(state: SimState, grid: Grid) -> float:
    speed, status = _k.max_wave_speed(state.eps, grid.rho_c, grid.code_c,
                                      grid.p1_c, grid.p2_c)
    _raise_for_status(status, state.t)
    return speed


def cfl_dt(state: SimState, grid: Grid, config: SolverConfig) -> float:
    """Stable time increment dt = cfl_target * dx / max local sound speed."""
    speed = max_speed(state, grid)
    if speed <= 0.0:
        raise DegenerateWaveError("maximum wave speed is zero; cannot pick dt")
    return config.cfl_target * grid.dx / speed


def apply_bc(state: SimState, grid: Grid, bc: BoundaryCondition,
             t: Optional[float] = None, ng: int = 2):
    """Ghost-extended (eps, u) arrays for one step.

    Periodic wraps both fields; the moving wall mirrors strain and
    reflects velocity about the prescribed wall speed,
    u_ghost = 2*u_wall(t) - u_interior; extrapolation copies the
    outermost cell.
    """
    if t is None:
        t = state.t
    m = state.m
    eps_e = np.empty(m + 2 * ng)
    u_e = np.empty(m + 2 * ng)
    eps_e[ng:ng + m] = state.eps
    u_e[ng:ng + m] = state.u
    if bc.kind == "periodic":
        eps_e[:ng] = state.eps[m - ng:]
        u_e[:ng] = state.u[m - ng:]
        eps_e[ng + m:] = state.eps[:ng]
        u_e[ng + m:] = state.u[:ng]
    else:
        if bc.kind == "moving_wall":
            wall = 2.0 * float(bc.wall_velocity(t))
            eps_e[:ng] = state.eps[ng - 1::-1]
            u_e[:ng] = wall - state.u[ng - 1::-1]
        else:
            eps_e[:ng] = state.eps[0]
            u_e[:ng] = state.u[0]
        eps_e[ng + m:] = state.eps[m - 1]
        u_e[ng + m:] = state.u[m - 1]
    return eps_e, u_e


def step(state: SimState, grid: Grid, bc: BoundaryCondition,
         config: SolverConfig, dt: Optional[float] = None) -> SimState:
    """Advance one time step; dt defaults to the CFL-stable increment."""
    new_state, _ = _step_core(state, grid, bc, config, dt)
    return new_state


def _step_core(state: SimState, grid: Grid, bc: BoundaryCondition,
               config: SolverConfig, dt: Optional[float],
               known_speed: Optional[float] = None):
    if dt is None:
        if known_speed is not None and known_speed > 0.0:
            dt = config.cfl_target * grid.dx / known_speed
        else:
            dt = cfl_dt(state, grid, config)
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    eps_e, u_e = apply_bc(state, grid, bc, state.t)
    rho_e, code_e, p1_e, p2_e = grid.extended_materials(bc.kind, 2)
    # Ghost speeds equal mirrored/copied interior speeds, so the realised
    # interface CFL cannot exceed dt*max_c/dx; reject unstable requests.
    speed_now, status = _k.max_wave_speed(eps_e, rho_e, code_e, p1_e, p2_e)
    _raise_for_status(status, state.t)
    if dt * speed_now / grid.dx > 1.0 + 1e-12:
        raise BlowUpError(
            f"requested dt={dt:.6g} gives CFL {dt * speed_now / grid.dx:.4f} > 1")
    new_eps, new_u, status, maxc = _k.step_wave_prop(
        eps_e, u_e, rho_e, code_e, p1_e, p2_e, dt, grid.dx,
        config.order, config.limiter_code)
    _raise_for_status(status, state.t + dt)
    return SimState(eps=new_eps, u=new_u, t=state.t + dt), maxc


def advance_to(state: SimState, grid: Grid, bc: BoundaryCondition,
               config: SolverConfig, t_end: float) -> SimState:
    """Advance with CFL-limited steps, landing exactly on t_end."""
    if t_end < state.t - 1e-12:
        raise ValueError("t_end lies before the current state time")
    speed = None
    eps_tol = 1e-12 * max(1.0, abs(t_end))
    while state.t < t_end - eps_tol:
        stable = (config.cfl_target * grid.dx / speed) if speed else cfl_dt(state, grid, config)
        remaining = t_end - state.t
        if remaining <= stable * (1.0 + 1e-12):
            state, speed = _step_core(state, grid, bc, config, remaining)
            state = replace(state, t=t_end)
        else:
            state, speed = _step_core(state, grid, bc, config, stable)
    return state


def write_snapshot(path, grid: Grid, state: SimState):
    """Write one snapshot as CSV: x,epsilon,u,sigma,rho,K per cell."""
    sigma = grid.sigma_of(state.eps)
    ks = np.array([mat.law.K for mat in grid.medium.materials])[grid.material_index]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,epsilon,u,sigma,rho,K\n")
        for x, e, u, s, r, k in zip(grid.x_centers, state.eps, state.u,
                                    sigma, grid.rho_c, ks):
            fh.write(f"{x:.17g},{e:.17g},{u:.17g},{s:.17g},{r:.17g},{k:.17g}\n")
