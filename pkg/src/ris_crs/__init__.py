"""Max-min rate design for RIS-aided cooperative rate splitting in a
two-user MISO downlink: exact rate model, SCA/AO optimizers, baselines,
brute-force oracle, and a Monte Carlo experiment harness."""

from .ao import Solution, Strategy, embed_solution, run_ao, solution_to_json
from .channel import (ChannelSet, ScenarioConfig, build_channel_set,
                      path_loss, sample_complex_gaussian)
from .oracle import GridSpec, allocate_common_rate, grid_search
from .rates import (PhaseConfig, RateReport, TxDesign, effective_channel,
                    evaluate_design, phase2_closed_form, slot1_rates,
                    slot2_common_rate)
from .sca_beam import (BeamIterate, SolverFailure, build_beam_subproblem,
                       init_beam_iterate, phi_lower_bound, run_algorithm1)
from .sca_phase import (PhaseIterate, build_phase_subproblem, cascade_vectors,
                        common_sinr_threshold, run_algorithm2)

__all__ = [
    "ChannelSet", "ScenarioConfig", "build_channel_set", "path_loss",
    "sample_complex_gaussian",
    "PhaseConfig", "RateReport", "TxDesign", "effective_channel",
    "evaluate_design", "phase2_closed_form", "slot1_rates",
    "slot2_common_rate",
    "BeamIterate", "SolverFailure", "build_beam_subproblem",
    "init_beam_iterate", "phi_lower_bound", "run_algorithm1",
    "PhaseIterate", "build_phase_subproblem", "cascade_vectors",
    "common_sinr_threshold", "run_algorithm2",
    "Solution", "Strategy", "embed_solution", "run_ao", "solution_to_json",
    "GridSpec", "allocate_common_rate", "grid_search",
]
__version__ = "0.1.0"
