"""Equivariant wave maps on a wormhole: pseudospectral evolution, kink-chain
reduced models, threshold search and expansion-law fits."""

from .spectral import Grid, make_grid
from .wavemap_core import FieldState, ModelParams, Parity, chain_profile, initial_data, kink
from .evolve import IntegratorConfig, Trajectory, evolve_chain, evolve_field
from .diagnostics import DiagnosticsRecord, bondi_energy, compute_records, final_energy_quantum
from .ode_models import ChainState, SeriesParams, asymptotic_solution, exact_solution
from .threshold import Classification, ClassifierConfig, bisect, classify
from .fitting import FitResult, fit_log_law, fit_records, select_fit_window

__all__ = [
    "Grid", "make_grid", "FieldState", "ModelParams", "Parity", "chain_profile", "initial_data",
    "kink", "IntegratorConfig", "Trajectory", "evolve_chain", "evolve_field",
    "DiagnosticsRecord", "bondi_energy", "compute_records", "final_energy_quantum",
    "ChainState", "SeriesParams", "asymptotic_solution", "exact_solution",
    "Classification", "ClassifierConfig", "bisect", "classify",
    "FitResult", "fit_log_law", "fit_records", "select_fit_window",
]
