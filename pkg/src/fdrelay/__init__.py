"""Rate analysis of full-duplex massive-MIMO relaying with low-resolution ADCs.

Closed-form exact and large-antenna rates, a Monte-Carlo oracle for every
rate term, design routines and a CSV-emitting command line.
"""

from .adc import AdcModel, aqnm_transform, distortion_factor
from .channel import (
    ChannelEstimate,
    ChannelSet,
    EstimationStats,
    draw_channels,
    estimation_stats,
    mrc_mrt_products,
    simulate_pilot_estimation,
)
from .config import ConfigError, SystemConfig, db_to_linear, linear_to_db
from .design import (
    SearchBracket,
    duplex_crossover_antennas,
    duplex_crossover_loop_interference,
    optimal_relay_power_homogeneous,
    optimize_relay_power,
    required_antennas,
    required_source_power,
)
from .experiments import SweepResult, SweepSpec, run_preset, run_sweep, run_validation
from .io import parse_config
from .mc_oracle import McEstimate, McTermReport, simulate_gamma, simulate_rate, simulate_terms
from .rate_asym import (
    UNBOUNDED,
    AsymptoticReport,
    approx_rate,
    asymptotic_report,
    half_duplex_rate,
    limit_rate_infinite_M,
    placement_rates,
    scaled_power_limit,
)
from .rate_exact import RateBreakdown, amplification_gain, exact_breakdown, exact_rate

__version__ = "0.1.0"
