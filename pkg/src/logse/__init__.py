"""Spectral solvers for the logarithmic Schrödinger equation

    i psi_t = -Laplacian psi + V psi + lam ln(|psi|^2) psi

on rectangles with periodic, Dirichlet or Neumann boundaries.
"""

__version__ = "0.1.0"

from .spectral import (Grid, SpectralField, forward_transform, free_propagator,
                       inverse_transform, phi1, phi1_apply, phi1_scalar, project,
                       sobolev_norm, zero_pad)
from .nonlinearity import apply_B, g, g_eps, im_pairing_check, lipschitz_bound_check
from .potentials import PotentialSpec, disorder, square_well
from .propagators import (BlowUpError, CFLWarning, EvolutionTrace, SolverConfig,
                          StepSizeError, admissible_tau, evolve, ewi_fs_step, strang_step)
from .initial_data import (GaussonPairParams, VortexProfile, gaussian, h2_datum,
                           solve_vortex_profile, tanh_datum, two_gaussons, vortex_dipole)
from .diagnostics import (ConvergenceReport, energy, error_norms, estimate_regularity,
                          fit_order, mass, vortex_census, winding_number)
from .estimators import EWIFSSolver, StrangSolver

__all__ = [
    "Grid", "SpectralField", "forward_transform", "free_propagator", "inverse_transform",
    "phi1", "phi1_apply", "phi1_scalar", "project", "sobolev_norm", "zero_pad",
    "apply_B", "g", "g_eps", "im_pairing_check", "lipschitz_bound_check",
    "PotentialSpec", "disorder", "square_well",
    "BlowUpError", "CFLWarning", "EvolutionTrace", "SolverConfig", "StepSizeError",
    "admissible_tau", "evolve", "ewi_fs_step", "strang_step",
    "GaussonPairParams", "VortexProfile", "gaussian", "h2_datum", "solve_vortex_profile",
    "tanh_datum", "two_gaussons", "vortex_dipole",
    "ConvergenceReport", "energy", "error_norms", "estimate_regularity", "fit_order", "mass",
    "vortex_census", "winding_number",
    "EWIFSSolver", "StrangSolver",
]
