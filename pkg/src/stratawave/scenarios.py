"""Reproducible experiment construction and the shock-prediction sweep.

Each scenario packages a medium, a domain, initial data, boundary
treatment and run protocol.  Constructors cover the standard experiments:
a Gaussian stress pulse, the wall-driven bilayer pulse that evolves into a
solitary-wave train, smooth two-state transition data, "effective shock"
jump data matched through period-averaged material response, and the
rarefaction-reversal construction that manufactures smooth data with a
guaranteed shock time.

Domains for the open (extrapolation) scenarios are sized from the causal
cone so no wave reaches a boundary within the run; total entropy is then
a faithful diagnostic.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .diagnostics import EntropySeries, ReversalReport, total_entropy, time_reverse
from .medium import (AmbientState, ExponentialLaw, Material, Medium,
                     ly_medium, mean_arithmetic, mean_harmonic,
                     s_eff_relative)
from .solver import (BoundaryCondition, Grid, SimState, SolverConfig,
                     advance_to)
from . import highorder

__all__ = [
    "Scenario",
    "RunResult",
    "SweepRow",
    "SweepResult",
    "gaussian_pulse_scenario",
    "ly_stegoton_scenario",
    "ly_wall_velocity",
    "smooth_riemann_scenario",
    "effective_shock_scenario",
    "effective_shock_velocity",
    "rarefaction_reversal_scenario",
    "build_scenario",
    "run_scenario",
    "run_reversal",
    "seff_sweep",
    "sweep_material_pairs",
]

SCHEME_WAVE_PROP = "wave-prop-2"
SCHEME_WENO = "weno5-ssprk4"
DEFAULT_SWEEP_SHOCK_TOL = 1e-3


@dataclass(frozen=True)
class Scenario:
    """A fully specified experiment, gridded on demand.

    ``ic`` maps a Grid to the initial (eps, u) arrays.  Scenarios built
    from precomputed fields (rarefaction reversal, rebased wall pulses)
    are bound to the resolution they were constructed at.
    """

    name: str
    medium: Medium
    x_lo: float
    x_hi: float
    bc: BoundaryCondition
    t_end: float
    ic: Callable[[Grid], tuple]
    cells_per_layer: int = 24
    resolution_bound: bool = False
    params: dict = field(default_factory=dict)
    aux: dict = field(default_factory=dict)


def build_scenario(scenario: Scenario, cells_per_layer: Optional[int] = None):
    """Grid the scenario and evaluate its initial state, with checks."""
    cpl = scenario.cells_per_layer if cells_per_layer is None else int(cells_per_layer)
    if scenario.resolution_bound and cpl != scenario.cells_per_layer:
        raise ValueError(
            f"scenario {scenario.name!r} was constructed at "
            f"{scenario.cells_per_layer} cells/layer and cannot be regridded")
    grid = Grid(scenario.medium, scenario.x_lo, scenario.x_hi, cpl)
    if scenario.bc.kind == "periodic" and not grid.is_whole_periods():
        raise ValueError("periodic scenario domain must span whole periods")
    eps, u = scenario.ic(grid)
    eps = np.ascontiguousarray(eps, dtype=float)
    u = np.ascontiguousarray(u, dtype=float)
    if eps.shape != (grid.m,) or u.shape != (grid.m,):
        raise ValueError("initial condition arrays do not match the grid")
    grid.check_admissible(eps)
    return grid, SimState(eps=eps, u=u, t=0.0)


def strain_from_stress_field(grid: Grid, sigma: np.ndarray) -> np.ndarray:
    """Convert a stress profile to strain cell by cell with each cell's law."""
    sigma = np.asarray(sigma, dtype=float)
    eps = np.empty_like(sigma)
    for k, mat in enumerate(grid.medium.materials):
        mask = grid.material_index == k
        if mask.any():
            eps[mask] = mat.law.strain(sigma[mask])
    return eps


def _round_out_to_periods(x: float, period: float, direction: int) -> float:
    n = x / period
    return period * (math.floor(n) if direction < 0 else math.ceil(n))


def _max_sound_speed(medium: Medium, sigma_values) -> float:
    """Largest layer sound speed over the given ambient stresses."""
    best = 0.0
    for sig in sigma_values:
        for mat in medium.materials:
            c = float(mat.sound_speed(mat.law.strain(sig)))
            best = max(best, c)
    return best


def gaussian_pulse_scenario(medium: Medium, amplitude: float = 0.2,
                            width: float = 5.0, center: float = 0.0,
                            t_end: float = 250.0,
                            domain: Optional[tuple] = None) -> Scenario:
    """Gaussian initial stress, zero initial velocity, periodic domain.

    sigma(x, 0) = amplitude * exp(-((x - center)/width)^2).  The default
    domain contains the causal cone of the pulse up to t_end, so the
    split pulses never wrap; pass ``domain`` to override (reversal runs
    stay valid under periodic wrap, shocked runs only collide earlier).
    """
    if amplitude < 0.0:
        raise ValueError("amplitude must be non-negative")
    for mat in medium.materials:
        mat.law.strain(amplitude)  # raises if the peak stress is unattainable
    if domain is None:
        cmax = _max_sound_speed(medium, [0.0, amplitude]) if amplitude > 0 else 1.0
        half = cmax * t_end + 8.0 * width + 2.0
        half = _round_out_to_periods(half, medium.period, +1)
        domain = (center - half, center + half)

    def ic(grid: Grid):
        x = grid.x_centers
        sigma = amplitude * np.exp(-(((x - center) / width) ** 2))
        return strain_from_stress_field(grid, sigma), np.zeros(grid.m)

    return Scenario(name="gaussian", medium=medium,
                    x_lo=domain[0], x_hi=domain[1],
                    bc=BoundaryCondition.periodic(), t_end=t_end, ic=ic,
                    params={"amplitude": amplitude, "width": width,
                            "center": center})


def ly_wall_velocity(t: float) -> float:
    """Prescribed left-wall velocity generating the standard bilayer pulse."""
    if 0.0 <= t <= 20.0:
        return -0.1 * (1.0 + math.cos(math.pi * (t - 10.0) / 10.0))
    return 0.0


def ly_stegoton_scenario(z_b: float, cells_per_layer: int = 24,
                         t_end: float = 200.0,
                         domain_length: float = 200.0,
                         rebase_time: float = 40.0,
                         config: Optional[SolverConfig] = None) -> Scenario:
    """Wall-driven pulse in the rho_B = K_B = z_b bilayer, rebased periodic.

    The pulse is generated on [0, domain_length] by the moving left wall,
    run to ``rebase_time``, and the resulting fields become the initial
    data of a periodic scenario (clock reset to zero) so the long-time
    behaviour fits a fixed domain.  The returned scenario is bound to the
    construction resolution.
    """
    medium = ly_medium(z_b)
    cfg = config or SolverConfig()
    grid = Grid(medium, 0.0, domain_length, cells_per_layer)
    state = SimState(eps=np.zeros(grid.m), u=np.zeros(grid.m), t=0.0)
    bc_wall = BoundaryCondition.moving_wall(ly_wall_velocity)
    state = advance_to(state, grid, bc_wall, cfg, rebase_time)
    eps0, u0 = state.eps.copy(), state.u.copy()

    def ic(g: Grid):
        return eps0.copy(), u0.copy()

    return Scenario(name="ly_stegoton", medium=medium,
                    x_lo=0.0, x_hi=domain_length,
                    bc=BoundaryCondition.periodic(), t_end=t_end, ic=ic,
                    cells_per_layer=cells_per_layer, resolution_bound=True,
                    params={"z_b": z_b, "rebase_time": rebase_time},
                    aux={"source_time": rebase_time})


def effective_shock_velocity(medium: Medium, sigma_l: float,
                             sigma_r: float = 0.0) -> float:
    """Left-state velocity of the period-averaged jump construction.

    Pairs the stress jump with the jump condition of the effective medium
    (arithmetic-mean density, harmonic-mean modulus).  Requires
    exponential layer laws, for which the strain jump is
    log((1+sigma_l)/(1+sigma_r)) / K per layer.
    """
    for mat in medium.materials:
        if not isinstance(mat.law, ExponentialLaw):
            raise ValueError("effective shock construction needs exponential laws")
    if sigma_l == sigma_r:
        return 0.0
    k_hat = mean_harmonic(medium, lambda m: m.law.K)
    rho_bar = mean_arithmetic(medium, lambda m: m.rho)
    jump = (sigma_l - sigma_r) * math.log((1.0 + sigma_l) / (1.0 + sigma_r))
    return -math.sqrt(jump / (rho_bar * k_hat))


def _open_domain(medium: Medium, x_jump: float, sigma_hi: float,
                 horizon: float, pad: float = 20.0, factor: float = 1.35):
    cmax = _max_sound_speed(medium, [0.0, sigma_hi])
    span = factor * cmax * horizon + pad
    return (_round_out_to_periods(x_jump - span, medium.period, -1),
            _round_out_to_periods(x_jump + span, medium.period, +1))


def smooth_riemann_scenario(medium: Medium, sigma_l: float,
                            sigma_r: float = 0.0,
                            transition_width: Optional[float] = None,
                            x_jump: float = 30.0,
                            t_forward: float = 100.0) -> Scenario:
    """Two uniform states joined by a thin raised-cosine transition.

    The left state carries the effective-jump velocity so the profile is
    close to a single right-moving front.  The run protocol (used by the
    sweep) evolves to ``t_forward``, negates the velocity, and continues
    to ``2 * t_forward``; the entropy ratio across the round trip flags
    shock formation.  Domain bounds contain the causal cone, so the open
    boundaries are never reached.
    """
    w = 2.0 * medium.period if transition_width is None else float(transition_width)
    u_l = effective_shock_velocity(medium, sigma_l, sigma_r)
    domain = _open_domain(medium, x_jump, max(sigma_l, sigma_r), t_forward)
    s_rel = s_eff_relative(medium, sigma_l, sigma_r) if sigma_l != sigma_r else None

    def ic(grid: Grid):
        x = grid.x_centers
        ramp = np.clip((x - (x_jump - 0.5 * w)) / w, 0.0, 1.0)
        theta = 0.5 * (1.0 + np.cos(np.pi * ramp))
        sigma = sigma_r + (sigma_l - sigma_r) * theta
        return strain_from_stress_field(grid, sigma), u_l * theta

    return Scenario(name="smooth_riemann", medium=medium,
                    x_lo=domain[0], x_hi=domain[1],
                    bc=BoundaryCondition.extrapolation(),
                    t_end=2.0 * t_forward, ic=ic,
                    params={"sigma_l": sigma_l, "sigma_r": sigma_r,
                            "transition_width": w, "x_jump": x_jump,
                            "t_forward": t_forward},
                    aux={"u_l": u_l, "s_eff_relative": s_rel})


def effective_shock_scenario(medium: Medium, sigma_l: float,
                             x_jump: float = 30.0,
                             t_end: float = 100.0) -> Scenario:
    """Discontinuous jump data matched through the effective medium.

    (sigma, u) = (sigma_l, u_l) for x <= x_jump and (0, 0) beyond, with
    u_l from the period-averaged jump condition; this launches a nearly
    pure right-moving front with weak initial reflections.
    """
    u_l = effective_shock_velocity(medium, sigma_l, 0.0)
    domain = _open_domain(medium, x_jump, max(sigma_l, 0.0), t_end)
    s_rel = s_eff_relative(medium, sigma_l, 0.0) if sigma_l != 0.0 else None

    def ic(grid: Grid):
        x = grid.x_centers
        sigma = np.where(x <= x_jump, sigma_l, 0.0)
        u = np.where(x <= x_jump, u_l, 0.0)
        return strain_from_stress_field(grid, sigma), u

    return Scenario(name="effective_shock", medium=medium,
                    x_lo=domain[0], x_hi=domain[1],
                    bc=BoundaryCondition.extrapolation(), t_end=t_end, ic=ic,
                    params={"sigma_l": sigma_l, "x_jump": x_jump},
                    aux={"u_l": u_l, "s_eff_relative": s_rel})


def rarefaction_reversal_scenario(medium: Medium, eps0: float, tau: float,
                                  x0: float, cells_per_layer: int = 24,
                                  config: Optional[SolverConfig] = None) -> Scenario:
    """Smooth data guaranteed to form a shock within time tau.

    Jump data (eps0 on the left of x0, matched velocity) spreads as a
    rarefaction over a forward run of length tau; negating the velocity
    then yields smooth fields that refocus into the original discontinuity
    after the same span.  x0 must sit far enough inside one layer that the
    fan never touches a material interface during construction.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    mat = medium.material_at(x0)
    c_top = max(float(mat.sound_speed(eps0)), float(mat.sound_speed(0.0)))
    dist = _distance_to_layer_boundary(medium, x0)
    if c_top * tau >= dist:
        raise ValueError(
            f"rarefaction fan (extent {c_top * tau:.3g}) would cross a layer "
            f"boundary at distance {dist:.3g}; reduce tau or move x0")

    u_left = -eps0 * math.sqrt(mat.law.dsigma(eps0) / mat.rho)
    span = max(6.0 * c_top * tau, 2.0 * medium.period)
    x_lo = _round_out_to_periods(x0 - span, medium.period, -1)
    x_hi = _round_out_to_periods(x0 + span, medium.period, +1)

    cfg = config or SolverConfig()
    grid = Grid(medium, x_lo, x_hi, cells_per_layer)
    x = grid.x_centers
    eps_jump = np.where(x < x0, float(eps0), 0.0)
    u_jump = np.where(x < x0, u_left, 0.0)
    grid.check_admissible(eps_jump)
    state = SimState(eps=eps_jump, u=u_jump, t=0.0)
    bc = BoundaryCondition.extrapolation()
    entropy_jump = total_entropy(state, grid)
    state = advance_to(state, grid, bc, cfg, tau)
    entropy_smooth = total_entropy(state, grid)
    state = time_reverse(state)
    eps_ic, u_ic = state.eps.copy(), state.u.copy()

    def ic(g: Grid):
        return eps_ic.copy(), u_ic.copy()

    return Scenario(name="rarefaction_reversal", medium=medium,
                    x_lo=x_lo, x_hi=x_hi, bc=bc, t_end=tau, ic=ic,
                    cells_per_layer=cells_per_layer, resolution_bound=True,
                    params={"eps0": eps0, "tau": tau, "x0": x0},
                    aux={"entropy_jump": entropy_jump,
                         "entropy_smooth": entropy_smooth,
                         "forward_entropy_change":
                             (entropy_smooth - entropy_jump) / entropy_jump
                             if entropy_jump else 0.0,
                         "u_left": u_left})


def _distance_to_layer_boundary(medium: Medium, x: float) -> float:
    frac = (x % medium.period) / medium.period
    edges = np.concatenate([[0.0], np.cumsum(medium.widths())])
    return float(np.min(np.abs(edges - frac))) * medium.period


# ---------------------------------------------------------------------------
# Run drivers


@dataclass(frozen=True)
class RunResult:
    grid: Grid
    final: SimState
    entropy: Optional[EntropySeries]
    snapshots: tuple


def _advance(state, grid, bc, config, t_target, scheme, weno_cfl):
    if scheme == SCHEME_WENO:
        return highorder.advance_to_weno(state, grid, bc, t_target, cfl=weno_cfl)
    return advance_to(state, grid, bc, config, t_target)


def run_scenario(scenario: Scenario, cells_per_layer: Optional[int] = None,
                 config: Optional[SolverConfig] = None,
                 scheme: str = SCHEME_WAVE_PROP,
                 weno_cfl: float = highorder.DEFAULT_WENO_CFL,
                 t_end: Optional[float] = None,
                 entropy_interval: Optional[float] = None,
                 snapshot_times: Sequence[float] = ()) -> RunResult:
    """Run a scenario to t_end, sampling entropy and snapshots on the way."""
    cfg = config or SolverConfig()
    grid, state = build_scenario(scenario, cells_per_layer)
    horizon = scenario.t_end if t_end is None else float(t_end)

    sample_times = set(float(t) for t in snapshot_times)
    if entropy_interval:
        n = int(math.floor(horizon / entropy_interval + 1e-9))
        sample_times.update(i * entropy_interval for i in range(1, n + 1))
    sample_times.add(horizon)
    schedule = sorted(t for t in sample_times if 0.0 < t <= horizon)

    entropy_samples = [(0.0, total_entropy(state, grid))] if entropy_interval else None
    snaps = [(0.0, state)] if 0.0 in set(snapshot_times) else []
    snap_set = set(float(t) for t in snapshot_times)

    for t_target in schedule:
        state = _advance(state, grid, bc=scenario.bc, config=cfg,
                         t_target=t_target, scheme=scheme, weno_cfl=weno_cfl)
        if entropy_samples is not None:
            entropy_samples.append((state.t, total_entropy(state, grid)))
        if t_target in snap_set:
            snaps.append((state.t, state))

    series = EntropySeries.from_samples(entropy_samples) if entropy_samples else None
    return RunResult(grid=grid, final=state, entropy=series, snapshots=tuple(snaps))


def run_reversal(scenario: Scenario, T: float,
                 cells_per_layer: Optional[int] = None,
                 config: Optional[SolverConfig] = None,
                 scheme: str = SCHEME_WAVE_PROP,
                 weno_cfl: float = highorder.DEFAULT_WENO_CFL,
                 t_early: Optional[float] = None) -> ReversalReport:
    """Forward to T, negate velocity, continue to 2T; report the mismatch."""
    cfg = config or SolverConfig()
    t0 = T / 10.0 if t_early is None else float(t_early)
    grid, state = build_scenario(scenario, cells_per_layer)
    u_ref = state.u.copy()
    eps_ref = state.eps.copy()
    entropy_initial = total_entropy(state, grid)

    state = _advance(state, grid, scenario.bc, cfg, t0, scheme, weno_cfl)
    entropy_early = total_entropy(state, grid)
    state = _advance(state, grid, scenario.bc, cfg, T, scheme, weno_cfl)
    state = time_reverse(state)
    state = _advance(state, grid, scenario.bc, cfg, 2.0 * T - t0, scheme, weno_cfl)
    entropy_late = total_entropy(state, grid)
    state = _advance(state, grid, scenario.bc, cfg, 2.0 * T, scheme, weno_cfl)
    # The reversed dynamics returns the negated initial velocity, so flip
    # the final state back to the original time orientation before comparing.
    state = time_reverse(state)

    return ReversalReport(
        T=T,
        discrepancy=float(np.max(np.abs(state.u - u_ref))),
        eps_discrepancy=float(np.max(np.abs(state.eps - eps_ref))),
        entropy_early=entropy_early,
        entropy_late=entropy_late,
        entropy_initial=entropy_initial,
        t_early=t0,
        cells_per_layer=grid.cells_per_layer,
        scheme=scheme,
        limiter=cfg.limiter if scheme == SCHEME_WAVE_PROP else None,
    )


# ---------------------------------------------------------------------------
# S_eff validation sweep


@dataclass(frozen=True)
class SweepRow:
    rho_b: float
    k_b: float
    sigma_l: float
    s_eff_rel: float
    entropy_ratio: float
    shock: Optional[bool]
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple

    @property
    def failed(self) -> bool:
        return any(r.error is not None for r in self.rows)

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("rho_B,K_B,sigma_l,S_eff,entropy_ratio,shock\n")
            for r in self.rows:
                flag = "failed" if r.error is not None else str(bool(r.shock)).lower()
                fh.write(f"{r.rho_b:.17g},{r.k_b:.17g},{r.sigma_l:.17g},"
                         f"{r.s_eff_rel:.17g},{r.entropy_ratio:.17g},{flag}\n")


def sweep_material_pairs(rho_b_values: Sequence[float],
                         k_b_values: Sequence[float],
                         pairing: str = "zip") -> list:
    """(rho_B, K_B) combinations: matched lists ("zip") or full product."""
    if pairing == "zip":
        if len(rho_b_values) != len(k_b_values):
            raise ValueError("zip pairing needs rho_b and k_b lists of equal length")
        return list(zip(map(float, rho_b_values), map(float, k_b_values)))
    if pairing == "product":
        return [(float(r), float(k)) for r in rho_b_values for k in k_b_values]
    raise ValueError("pairing must be 'zip' or 'product'")


def _sweep_medium(rho_b: float, k_b: float) -> Medium:
    mat_a = Material(1.0, ExponentialLaw(1.0))
    mat_b = Material(rho_b, ExponentialLaw(k_b))
    return Medium.bilayer(mat_a, mat_b)


def _sweep_row(task) -> SweepRow:
    (rho_b, k_b, sigma_l, cells_per_layer, config, t_forward,
     shock_tol, scheme) = task
    medium = _sweep_medium(rho_b, k_b)
    s_rel = s_eff_relative(medium, sigma_l, 0.0)
    try:
        scenario = smooth_riemann_scenario(medium, sigma_l, 0.0,
                                           t_forward=t_forward)
        grid, state = build_scenario(scenario, cells_per_layer)
        s_init = total_entropy(state, grid)
        state = _advance(state, grid, scenario.bc, config, t_forward,
                         scheme, highorder.DEFAULT_WENO_CFL)
        state = time_reverse(state)
        state = _advance(state, grid, scenario.bc, config, 2.0 * t_forward,
                         scheme, highorder.DEFAULT_WENO_CFL)
        ratio = total_entropy(state, grid) / s_init
        shock = (1.0 - ratio) > shock_tol
        return SweepRow(rho_b, k_b, sigma_l, s_rel, ratio, shock)
    except Exception as exc:  # per-row failures must not kill the sweep
        return SweepRow(rho_b, k_b, sigma_l, s_rel, float("nan"), None,
                        error=f"{type(exc).__name__}: {exc}")


def seff_sweep(material_pairs: Sequence[tuple],
               sigma_l_values: Sequence[float],
               cells_per_layer: int = 24,
               config: Optional[SolverConfig] = None,
               t_forward: float = 100.0,
               shock_tol: float = DEFAULT_SWEEP_SHOCK_TOL,
               scheme: str = SCHEME_WAVE_PROP,
               workers: int = 1) -> SweepResult:
    """Run the smooth-transition reversal protocol over a parameter grid.

    One row per (rho_B, K_B, sigma_l) tuple, in lexicographic order.  Rows
    are independent runs, so any worker count yields identical results;
    failures are recorded per row and the sweep continues.
    """
    cfg = config or SolverConfig()
    tasks = [(rho_b, k_b, float(sig), int(cells_per_layer), cfg,
              float(t_forward), float(shock_tol), scheme)
             for (rho_b, k_b) in sorted(material_pairs)
             for sig in sorted(float(s) for s in sigma_l_values)]
    if not tasks:
        return SweepResult(rows=())
    if workers <= 1:
        rows = [_sweep_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=int(workers)) as pool:
            rows = list(pool.map(_sweep_row, tasks, chunksize=1))
    return SweepResult(rows=tuple(rows))
