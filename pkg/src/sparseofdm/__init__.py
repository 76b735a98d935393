"""Sparse pilot-aided OFDM channel estimation and link-level simulation."""
from .channel import BRAZIL_D, ChannelProfile, CirState
from .estimators import AtssdEstimator, AtssdParams, ChannelEstimate, LinearInterpolationEstimator, atssd_estimate
from .harness import ExperimentConfig, LinkMetrics, load_config, run_cell, sweep, write_csv
from .ofdm_phy import FreqGrid, OfdmConfig, PilotObservation

__version__ = "0.1.0"

__all__ = [
    "AtssdEstimator",
    "AtssdParams",
    "BRAZIL_D",
    "ChannelEstimate",
    "ChannelProfile",
    "CirState",
    "ExperimentConfig",
    "FreqGrid",
    "LinearInterpolationEstimator",
    "LinkMetrics",
    "OfdmConfig",
    "PilotObservation",
    "atssd_estimate",
    "load_config",
    "run_cell",
    "sweep",
    "write_csv",
]
