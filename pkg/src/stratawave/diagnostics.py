"""Shock-formation instrumentation.

Two robust computational signatures distinguish genuine shock formation
from smooth (if oscillatory) dynamics:

* loss of time-reversibility: evolve to T, negate the velocity, evolve
  the same span again; for smooth solutions the final state reproduces
  the initial data up to discretisation error, which vanishes under grid
  refinement, while shocked runs leave an O(1) residue;
* entropy decay: the total energy 0.5*rho*u^2 + Phi(eps) is conserved by
  smooth solutions and strictly dissipated by admissible shocks.

This module provides the entropy functional and time series, the reversal
experiment and its discrepancy measure, convergence-rate tables, front
tracking, and an entropy-based shock classifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as _k
from .solver import Grid, SimState, SolverConfig

__all__ = [
    "EntropySeries",
    "ReversalReport",
    "ConvergenceTable",
    "FrontTrace",
    "NoFrontError",
    "total_entropy",
    "time_reverse",
    "discrepancy",
    "reversal_experiment",
    "convergence_rates",
    "measure_front_speed",
    "classify_shock_formation",
]


class NoFrontError(ValueError):
    """No threshold crossing found while locating a front."""


def total_entropy(state: SimState, grid: Grid) -> float:
    """Total energy sum_i (0.5*rho_i*u_i^2 + Phi(eps_i)) * dx.

    Phi is each cell's stored-energy potential; the sum runs left to right
    with compensated accumulation, so the value is deterministic.
    """
    grid.check_admissible(state.eps)
    return float(_k.total_entropy_sum(state.eps, state.u, grid.rho_c,
                                      grid.code_c, grid.p1_c, grid.p2_c, grid.dx))


def time_reverse(state: SimState) -> SimState:
    """Negate the velocity field; applying twice returns the input."""
    return SimState(eps=state.eps, u=-state.u, t=state.t)


def discrepancy(u_final: np.ndarray, u_reference: np.ndarray) -> float:
    """Maximum pointwise difference between two velocity fields."""
    a = np.asarray(u_final, dtype=float)
    b = np.asarray(u_reference, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"field lengths differ: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


@dataclass(frozen=True)
class EntropySeries:
    """Total entropy sampled along a run, with the t=0 value kept for
    normalisation."""

    times: np.ndarray
    values: np.ndarray
    s0: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape:
            raise ValueError("times and values must have equal lengths")
        if t.size and np.any(np.diff(t) <= 0.0):
            raise ValueError("sample times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @staticmethod
    def from_samples(samples: Sequence[tuple]) -> "EntropySeries":
        times = np.array([s[0] for s in samples], dtype=float)
        values = np.array([s[1] for s in samples], dtype=float)
        s0 = float(values[0]) if values.size else 0.0
        return EntropySeries(times=times, values=values, s0=s0)

    def relative(self) -> np.ndarray:
        if self.s0 == 0.0:
            return np.zeros_like(self.values)
        return self.values / self.s0

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,entropy,entropy_rel\n")
            for t, s, r in zip(self.times, self.values, self.relative()):
                fh.write(f"{t:.17g},{s:.17g},{r:.17g}\n")


@dataclass(frozen=True)
class ReversalReport:
    """Outcome of one time-reversal experiment."""

    T: float
    discrepancy: float
    eps_discrepancy: float
    entropy_early: float
    entropy_late: float
    entropy_initial: float
    t_early: float
    cells_per_layer: int
    scheme: str
    limiter: Optional[str]

    @property
    def delta_entropy(self) -> float:
        return self.entropy_late - self.entropy_early


def reversal_experiment(scenario, T: float, cells_per_layer: Optional[int] = None,
                        config: Optional[SolverConfig] = None,
                        scheme: str = "wave-prop-2",
                        t_early: Optional[float] = None) -> ReversalReport:
    """Run forward to T, negate u, run to 2T; compare against the start.

    The discrepancy is the max-norm velocity mismatch between the final
    state and the initial data (the strain mismatch is recorded too).
    Entropies are sampled at the symmetric times t_early and 2T - t_early
    (default t_early = T/10).
    """
    from . import scenarios as _scen

    if T <= 0.0:
        raise ValueError("reversal time T must be positive")
    t0 = T / 10.0 if t_early is None else float(t_early)
    if not 0.0 < t0 < T:
        raise ValueError("t_early must lie strictly between 0 and T")
    res = _scen.run_reversal(scenario, T, cells_per_layer=cells_per_layer,
                             config=config, scheme=scheme, t_early=t0)
    return res


def convergence_rates(rows: Sequence[tuple]) -> "ConvergenceTable":
    """Rates log2(E_coarse/E_fine) between successive dyadic resolutions."""
    entries = [(int(n), float(e)) for n, e in rows]
    table_rows = []
    prev = None
    for n, e in entries:
        rate = None
        if prev is not None:
            n_prev, e_prev = prev
            if n != 2 * n_prev:
                raise ValueError(f"resolutions must be dyadic, got {n_prev} -> {n}")
            if e > 0.0 and e_prev > 0.0:
                rate = math.log2(e_prev / e)
        table_rows.append((n, e, rate))
        prev = (n, e)
    return ConvergenceTable(rows=tuple(table_rows))


@dataclass(frozen=True)
class ConvergenceTable:
    """(N, E, rate) rows; rate is defined from the previous dyadic row."""

    rows: tuple

    def rates(self) -> list:
        return [r for _, _, r in self.rows if r is not None]

    def write_csv(self, path, extra: Optional[dict] = None):
        """Reversal-convergence CSV: N,E,rate,entropy_early,entropy_late,delta_entropy."""
        extra = extra or {}
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("N,E,rate,entropy_early,entropy_late,delta_entropy\n")
            for n, e, rate in self.rows:
                early, late = extra.get(n, (float("nan"), float("nan")))
                rate_s = f"{rate:.17g}" if rate is not None else ""
                fh.write(f"{n},{e:.17g},{rate_s},{early:.17g},{late:.17g},"
                         f"{late - early:.17g}\n")


@dataclass(frozen=True)
class FrontTrace:
    """Tracked front positions with a least-squares speed fit."""

    times: np.ndarray
    positions: np.ndarray
    speed: float
    residual: float


def _front_position(x: np.ndarray, sigma: np.ndarray, level: float) -> float:
    """Rightmost downward crossing of sigma through the threshold level."""
    above = sigma >= level
    if not above.any() or above.all():
        raise NoFrontError("threshold level never crossed")
    idx = np.where(above[:-1] & ~above[1:])[0]
    if idx.size == 0:
        raise NoFrontError("no downward crossing of the threshold level")
    i = int(idx[-1])
    s0, s1 = sigma[i], sigma[i + 1]
    frac = (s0 - level) / (s0 - s1)
    return float(x[i] + frac * (x[i + 1] - x[i]))


def measure_front_speed(times: Sequence[float], x: np.ndarray,
                        sigma_profiles: Sequence[np.ndarray],
                        sigma_l: float, sigma_r: float,
                        threshold_fraction: float = 0.5) -> FrontTrace:
    """Least-squares front speed from stress snapshots.

    The front position in each snapshot is where the stress crosses
    threshold_fraction*(sigma_l - sigma_r) + sigma_r (linear interpolation
    between cells, rightmost crossing for robustness against the
    oscillatory structure behind the front).
    """
    times = np.asarray(times, dtype=float)
    if times.size < 3:
        raise ValueError("need at least 3 snapshots to fit a front speed")
    if len(sigma_profiles) != times.size:
        raise ValueError("times and sigma_profiles must have equal lengths")
    level = threshold_fraction * (sigma_l - sigma_r) + sigma_r
    positions = np.array([_front_position(np.asarray(x), np.asarray(s), level)
                          for s in sigma_profiles])
    speed, intercept = np.polyfit(times, positions, 1)
    fit = speed * times + intercept
    residual = float(np.sqrt(np.mean((positions - fit) ** 2)))
    return FrontTrace(times=times, positions=positions,
                      speed=float(speed), residual=residual)


def classify_shock_formation(series: EntropySeries,
                             window: Optional[tuple] = None,
                             tol: float = 1e-3):
    """Decide whether a run formed a shock from its entropy history.

    The relative entropy drop is measured across a post-transient window
    (default [0.2*T_end, T_end], excluding the small initial adjustment
    present even in shock-free runs); a drop above ``tol`` declares a
    shock.  Returns (shock_flag, relative_drop).
    """
    if series.times.size < 2:
        raise ValueError("entropy series too short to classify")
    t_end = float(series.times[-1])
    if window is None:
        window = (0.2 * t_end, t_end)
    w_lo, w_hi = float(window[0]), float(window[1])
    sel = (series.times >= w_lo) & (series.times <= w_hi)
    if sel.sum() < 2:
        raise ValueError("entropy series does not span the requested window")
    vals = series.values[sel]
    if series.s0 == 0.0:
        return False, 0.0
    drop = float((vals[0] - vals[-1]) / series.s0)
    return drop > tol, drop
