"""Explosive-episode (bubble) testing under nonstationary volatility.

Sup-ADF test statistics over expanding and sliding windows (SADF/GSADF),
their time-transformed counterparts (STADF/GSTADF) that restore pivotal null
distributions under deterministic time-varying volatility, a wild-bootstrap
comparator, simulated null distributions with a disk cache, and a Monte
Carlo harness for size/power experiments.
"""

__version__ = "1.0.0"

from .dgp import (BubbleSpec, DgpSpec, SimulatedPath, VolatilityKind,
                  VolatilitySpec, cumulative_squared_volatility,
                  replication_seed_sequence, simulate, simulate_details,
                  volatility_at)
from .errors import (ConfigError, CsvParseError, DegenerateProfileError,
                     DegenerateStatisticError, DegenerateThresholdError,
                     DegenerateWindowError, InvalidSpecError,
                     SeriesTooShortError, StadfError)
from .inference import (BootstrapResult, NullDistribution, get_null_distribution,
                        load_distribution, p_value, save_distribution,
                        simulate_null, wild_bootstrap_sadf)
from .kernel import (KernelKind, KernelSpec, LocalFitResult,
                     cross_validation_score, fit, local_delta,
                     select_bandwidth, truncation_threshold)
from .montecarlo import (ExperimentConfig, RejectionTable, TimingRow,
                         check_power_monotonicity, check_T_consistency,
                         run_experiment, run_timing)
from .series import TimeSeries
from .stats import (GLS, OLS, TestResult, adf_window, default_r0, gsadf, gstadf,
                    sadf, stadf, tadf_window)
from .varprofile import (TransformedSeries, VarianceProfile, estimate_profile,
                         inverse_profile, profile_from_volatility, transform)

__all__ = [
    "BubbleSpec", "DgpSpec", "SimulatedPath", "VolatilityKind", "VolatilitySpec",
    "cumulative_squared_volatility", "replication_seed_sequence", "simulate",
    "simulate_details", "volatility_at",
    "ConfigError", "CsvParseError", "DegenerateProfileError",
    "DegenerateStatisticError", "DegenerateThresholdError",
    "DegenerateWindowError", "InvalidSpecError", "SeriesTooShortError",
    "StadfError",
    "BootstrapResult", "NullDistribution", "get_null_distribution",
    "load_distribution", "p_value", "save_distribution", "simulate_null",
    "wild_bootstrap_sadf",
    "KernelKind", "KernelSpec", "LocalFitResult", "cross_validation_score",
    "fit", "local_delta",
    "select_bandwidth", "truncation_threshold",
    "ExperimentConfig", "RejectionTable", "TimingRow",
    "check_power_monotonicity", "check_T_consistency", "run_experiment",
    "run_timing",
    "TimeSeries",
    "GLS", "OLS", "TestResult", "adf_window", "default_r0", "gsadf", "gstadf",
    "sadf", "stadf", "tadf_window",
    "TransformedSeries", "VarianceProfile", "estimate_profile",
    "inverse_profile", "profile_from_volatility", "transform",
]
