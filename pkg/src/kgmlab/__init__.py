"""Radial Klein-Gordon-Maxwell standing-wave laboratory."""

from .radial import (ModelParams, RadialField, RadialGrid, default_grid,
                     dirichlet_energy, integrate3d, lp_norm, make_grid,
                     weighted_l2)
from .poisson import PhiSolveReport, phi_lower_bound_check, solve_phi
from .matter import (FrozenPotential, ShotOutcome, find_ground_state,
                     nehari_descent, nehari_scale, shoot)
from .branch import (BranchRecord, SolutionRecord, SolveSettings,
                     continue_in_epsilon, default_schedule, g_threshold,
                     solve_coupled, sweep)
from .diagnostics import (DiagnosticsReport, coulomb_tail, decay_fit,
                          diagnose, energy_and_charge, functional_values,
                          gamma_interval, nehari_residual,
                          pohozaev_coefficients, pohozaev_residual,
                          strauss_bound_check)
from .ineq import (RatioReport, TestFunctionFamily, MN_functionals,
                   dyadic_check, lemma_due_check, lp_embedding_check,
                   lp_upper_bound_check, min_kernel_double_integral,
                   prop_est_check, weight_lemma_check)
from .config import RunConfig, load_config
from .records import emit_plot_columns, load_record, persist_record

__version__ = "0.1.0"
