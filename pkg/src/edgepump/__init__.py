"""Adiabatic edge-state pumping in a hopping-modulated chain.

Simulation library for a tight-binding chain whose bond strengths are
modulated by a sliding phase: sweeping the phase pumps an edge state
across the chain, and the final occupation interferes between the two
avoided-crossing passages met along the way. Includes the reduced
two-level interference model, non-adiabaticity diagnostics, disorder
ensembles, and a CLI that writes CSV/JSON bundles.
"""

from ._kernels import BACKEND
from .model import (GOLDEN, TWO_PI, DisorderRealization, ModelParams,
                    TridiagonalOperator, bond_hoppings, build_hamiltonian,
                    d_hamiltonian_d_theta, sample_disorder)
from .spectra import (BandDiagram, EigensolverError, Spectrum, band_diagram,
                      edge_state_index, eigendecompose, ipr)
from .propagate import (NoEdgeStateError, PropagationError, ThetaSchedule,
                        Trajectory, converged_evolve, evolve,
                        final_occupations, initial_edge_state, mean_position)
from .diagnostics import (DegeneratePairError, NonAdiabaticityProfile,
                          OccupationSeries, coupling_overlap, find_naps,
                          localization_length, non_adiabaticity_profile,
                          occupations, peak_positions, transfer_matrix_xi)
from .lzs import (LzsParams, LzsSeries, branch_state, lzs_evolve,
                  lzs_hamiltonian, lzs_nonadiabaticity,
                  transition_localization)
from .harness import (AntiCrossing, EnsembleResult, RunConfig, ScalingResult,
                      SweepResult, UsageError, disorder_ensemble, edge_slot,
                      near_edge_anticrossings, regime_a_scaling,
                      regime_a_statistic, run_figure_recipe, slot_state,
                      sweep_pump_time, t_star_vs_L, theta_start_policy)

__version__ = "0.1.0"

__all__ = [
    "AntiCrossing", "BACKEND", "BandDiagram", "DegeneratePairError",
    "DisorderRealization", "EigensolverError", "EnsembleResult", "GOLDEN",
    "LzsParams", "LzsSeries", "ModelParams", "NoEdgeStateError",
    "NonAdiabaticityProfile", "OccupationSeries", "PropagationError",
    "RunConfig", "ScalingResult", "Spectrum", "SweepResult",
    "ThetaSchedule", "Trajectory", "TridiagonalOperator", "TWO_PI",
    "UsageError", "band_diagram", "bond_hoppings", "branch_state",
    "build_hamiltonian", "converged_evolve", "coupling_overlap",
    "d_hamiltonian_d_theta", "disorder_ensemble", "edge_slot",
    "edge_state_index", "eigendecompose", "evolve", "final_occupations",
    "find_naps", "initial_edge_state", "ipr", "localization_length",
    "lzs_evolve", "lzs_hamiltonian", "lzs_nonadiabaticity", "mean_position",
    "near_edge_anticrossings", "non_adiabaticity_profile", "occupations",
    "peak_positions", "regime_a_scaling", "regime_a_statistic",
    "run_figure_recipe", "sample_disorder", "slot_state", "sweep_pump_time",
    "t_star_vs_L", "theta_start_policy", "transfer_matrix_xi",
    "transition_localization",
]
