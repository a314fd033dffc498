"""Analytic model and Monte Carlo simulator for the packet loss ratio and
throughput of two-copy asynchronous diversity Aloha."""

__version__ = "0.1.0"

from .analytic import (
    CurvePoint,
    EventSplit,
    FullOverlapBreakdown,
    InterferencePmf,
    analytic_curve,
    convolve,
    delta_pmf,
    first_copy_event_probabilities,
    full_overlap_breakdown,
    interference_distribution,
    n_tx_for_load,
    p_copy_decoded,
    p_packet_decoded,
    pmf_mass_by_first_event,
    single_dp_pmf,
)
from .config import SystemConfig
from .errors import (
    ConfigError,
    DivalohaError,
    InsufficientSupportError,
    InvalidParameterError,
    PlacementImpossibleError,
    RejectionLimitError,
)
from .link import (
    DecodeBudget,
    LinkModel,
    interference_budget,
    snir_at,
    snir_threshold,
    spectral_rate,
)
from .simulator import (
    Frame,
    SimResult,
    decode_frame,
    draw_frame,
    estimate_point,
    frame_rng,
    pairwise_overlap,
    per_copy_interference,
    per_copy_interference_brute,
    point_seed,
    sweep,
)

__all__ = [
    "__version__",
    "SystemConfig",
    "DivalohaError",
    "ConfigError",
    "InvalidParameterError",
    "InsufficientSupportError",
    "PlacementImpossibleError",
    "RejectionLimitError",
    "spectral_rate",
    "snir_threshold",
    "snir_at",
    "interference_budget",
    "DecodeBudget",
    "LinkModel",
    "InterferencePmf",
    "EventSplit",
    "FullOverlapBreakdown",
    "CurvePoint",
    "delta_pmf",
    "single_dp_pmf",
    "first_copy_event_probabilities",
    "pmf_mass_by_first_event",
    "full_overlap_breakdown",
    "convolve",
    "interference_distribution",
    "p_copy_decoded",
    "p_packet_decoded",
    "n_tx_for_load",
    "analytic_curve",
    "Frame",
    "frame_rng",
    "point_seed",
    "draw_frame",
    "pairwise_overlap",
    "per_copy_interference",
    "per_copy_interference_brute",
    "decode_frame",
    "SimResult",
    "estimate_point",
    "sweep",
]
