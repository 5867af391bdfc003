"""Concentration shift keying with common detection thresholds.

Link-level models for multi-transmitter diffusive molecular communication:
channel impulse responses towards an absorbing receiver, release-level and
threshold design for the common-threshold scheme (``csk-ct``) and the
per-transmitter benchmark, closed-form symbol error probabilities, and a
slot-level Monte Carlo simulator to check them.
"""
from .channel import (ChannelParams, CirTable, Topology, averaged_cir, build_cir_table,
                      cir, cum_hit, hit_rate)
from .detection import ErrorReport, decode, network_error_prob, symbol_error_prob
from .errors import (ConfigError, CSKError, DegenerateIntervalError, DimensionError,
                     DomainError, InfeasibleDesignError, NumericalError)
from .link import (ConcentrationSet, SignalMoments, conditional_moments, expected_isi,
                   expected_signal)
from .modulation import (ModulationDesign, count_threshold_computations,
                         design_benchmark, design_concentrations, design_cskct,
                         design_thresholds_benchmark, design_thresholds_cskct,
                         gamma_ratio, limits_spacing)
from .montecarlo import SimResult, TrialConfig, estimate_cir_empirical, run

__version__ = "0.1.0"
