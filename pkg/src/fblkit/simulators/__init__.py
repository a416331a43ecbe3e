"""Monte Carlo simulators for erasure, list, Slepian-Wolf and ARQ schemes."""
from .arq import ArqEstimates, simulate_arq
from .erasure import decode_erasure, draw_codebook, erasure_design, simulate_erasure
from .listcodes import ListEstimates, list_design, pair_log2_tail, simulate_list
from .rng import run_trials, sample_channel, trial_rng
from .slepian_wolf import binning_probs, simulate_sw, sw_design, sw_undetected_bound
from .types import (
    CodeParams, DecoderSpec, ErrorEstimates, Estimate, SimConfig, mean_ci, proportion_ci,
    wilson_halfwidth,
)

__all__ = [
    "ArqEstimates", "simulate_arq", "decode_erasure", "draw_codebook", "erasure_design",
    "simulate_erasure", "ListEstimates", "list_design", "pair_log2_tail", "simulate_list",
    "run_trials", "sample_channel", "trial_rng", "binning_probs", "simulate_sw", "sw_design",
    "sw_undetected_bound", "CodeParams", "DecoderSpec", "ErrorEstimates", "Estimate", "SimConfig",
    "mean_ci", "proportion_ci", "wilson_halfwidth",
]
