"""stratawave: 1D nonlinear waves in layered periodic media.

Finite-volume simulation of the strain/velocity wave system with
piecewise-constant periodic material coefficients, plus the diagnostics
used to detect shock formation (time reversal, entropy evolution) and the
effective-medium shock-admissibility predictor S_eff.
"""

from .medium import (AmbientState, CubicLaw, ExponentialLaw, Layer, LinearLaw,
                     Material, Medium, PowerLaw, StrainDomainError,
                     StressRangeError, c_eff, c_hat, ly_medium,
                     mean_arithmetic, mean_harmonic, s_eff, s_eff_relative)
from .solver import (BlowUpError, BoundaryCondition, DegenerateWaveError,
                     FluctuationSet, Grid, SimState, SolverConfig, advance_to,
                     apply_bc, cfl_dt, limiter_value, riemann_fwave, step,
                     write_snapshot)
from .highorder import (RK4_CLASSIC, SSPRK104, ReconstructionPair, RKScheme,
                        advance_to_weno, mol_rhs, ssprk4_advance,
                        weno5_reconstruct)
from .diagnostics import (ConvergenceTable, EntropySeries, FrontTrace,
                          NoFrontError, ReversalReport, classify_shock_formation,
                          convergence_rates, discrepancy, measure_front_speed,
                          reversal_experiment, time_reverse, total_entropy)
from .scenarios import (RunResult, Scenario, SweepResult, SweepRow,
                        build_scenario, effective_shock_scenario,
                        effective_shock_velocity, gaussian_pulse_scenario,
                        ly_stegoton_scenario, ly_wall_velocity,
                        rarefaction_reversal_scenario, run_reversal,
                        run_scenario, seff_sweep, smooth_riemann_scenario,
                        sweep_material_pairs)

__version__ = "0.1.0"
