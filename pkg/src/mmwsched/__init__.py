"""mmWave massive-MIMO downlink multi-user scheduling simulator."""

from .config import ConfigError, FrameIndex, SystemConfig, load_config, validate_config
from .link import RateTable, noise_power_prb, rate_map, sinr
from .channel import array_response, generate_realization, path_loss_db, synthesize_channel
from .beams import Codebook, beam_align, design_codebook, effective_channels
from .scheduler import (CapExceededError, PfState, SolverError, brute_force_schedule,
                        enumerate_beam_sets, enumerate_ue_tuples, pf_objective,
                        precompute_rates, round_feasible, solve_relaxed, throughput,
                        update_average)
from .harness import CampaignSpec, run_campaign, run_realization

__version__ = "0.1.0"
