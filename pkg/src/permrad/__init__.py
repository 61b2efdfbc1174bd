"""Frequency-permutation stepped-frequency waveforms for joint radar and communications."""

from .bounds import (
    SeriesConfig,
    nn_awgn,
    nn_rayleigh,
    nn_rician,
    pairwise_rician,
    qfunc,
    subfactorial,
    union_bound_awgn,
    union_bound_rayleigh,
    union_bound_rician,
)
from .channel import (
    ChannelParams,
    FadingRealization,
    apply_channel,
    draw_fading,
    n0_from_snr_db,
)
from .errors import CapabilityError, NumericError, PermradError, ValidationError
from .lehmer import bits_per_block, permutation_to_rank, rank_to_permutation
from .radar import (
    AFGrid,
    FisherMatrix,
    af_grid,
    af_numeric_oracle,
    complex_af,
    crlb_full,
    crlb_simplified,
    fisher_matrix,
    pulse_af,
    ridge_covariance,
    zero_delay_cut,
    zero_doppler_cut,
)
from .receiver import (
    correlation_matrix,
    exhaustive_detect,
    hungarian_detect,
    statistic_matrix,
)
from .simkit import BlerPoint, SimConfig, run_bler_sweep, wilson_interval
from .waveform import ComplexSignal, WaveformParams, synthesize, tone_frequencies

__version__ = "0.1.0"

__all__ = [
    "AFGrid",
    "BlerPoint",
    "CapabilityError",
    "ChannelParams",
    "ComplexSignal",
    "FadingRealization",
    "FisherMatrix",
    "NumericError",
    "PermradError",
    "SeriesConfig",
    "SimConfig",
    "ValidationError",
    "WaveformParams",
    "af_grid",
    "af_numeric_oracle",
    "apply_channel",
    "bits_per_block",
    "complex_af",
    "correlation_matrix",
    "crlb_full",
    "crlb_simplified",
    "draw_fading",
    "exhaustive_detect",
    "fisher_matrix",
    "hungarian_detect",
    "n0_from_snr_db",
    "nn_awgn",
    "nn_rayleigh",
    "nn_rician",
    "pairwise_rician",
    "permutation_to_rank",
    "pulse_af",
    "qfunc",
    "rank_to_permutation",
    "ridge_covariance",
    "run_bler_sweep",
    "statistic_matrix",
    "subfactorial",
    "synthesize",
    "tone_frequencies",
    "union_bound_awgn",
    "union_bound_rayleigh",
    "union_bound_rician",
    "wilson_interval",
    "zero_delay_cut",
    "zero_doppler_cut",
]
