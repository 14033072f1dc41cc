"""Link-level MIMO simulator with residual transmit-RF impairments.

The package models a flat-fading MIMO link whose transmitter adds a
Gaussian error-vector-magnitude style noise term before the channel,
provides capacity and outage analysis for that model, implements coded
detection (ZF, MMSE, ML, max-log APP), and mitigates the resulting
coloured noise with a QRD-based whitening front end.
"""

__version__ = "0.1.0"

from .capacity import (
    capacity_det,
    capacity_eigen,
    capacity_limit,
    outage_cdf,
)
from .detect import maxlog_app_llrs, ml_detect, mmse_detect, zf_detect
from .harness import ExperimentConfig, run_capacity_cdf, run_fer_sweep
from .model import (
    SystemParams,
    derive_noise_params,
    draw_channel,
    noise_covariance,
    transmit,
)
from .modem import conv_encode, qam16, qam16_map, viterbi_decode
from .whiten import apply_symbol_rate, preprocess, whitening_oracle, whitening_qrd

__all__ = [
    "__version__",
    "SystemParams",
    "derive_noise_params",
    "draw_channel",
    "transmit",
    "noise_covariance",
    "capacity_det",
    "capacity_eigen",
    "capacity_limit",
    "outage_cdf",
    "qam16",
    "qam16_map",
    "conv_encode",
    "viterbi_decode",
    "zf_detect",
    "mmse_detect",
    "ml_detect",
    "maxlog_app_llrs",
    "whitening_qrd",
    "whitening_oracle",
    "preprocess",
    "apply_symbol_rate",
    "ExperimentConfig",
    "run_fer_sweep",
    "run_capacity_cdf",
]
