"""fblkit: finite-blocklength analysis of erasure, list and Slepian-Wolf coding."""
__version__ = "0.1.0"

from .asymptotics import (  # noqa: E402
    AsymptoticParams, ErrorSpec, ListParams, ArqParams, expected_rate_erasure, erasure_logM,
    gaussian_cdf, gaussian_quantile, hoeffding_interval, list_rates, ordinary_logM, sw_second_order,
)
from .dmc_core import (  # noqa: E402
    Channel, ChannelStats, JointPmf, Pmf, SourceStats, awgn_constants, blahut_arimoto, capacity,
    conditional_information_variance, dispersion_range, epsilon_dispersion, mutual_information,
    source_conditional_stats, unconditional_information_variance,
)
from .errors import (  # noqa: E402
    ArgumentError, FblkitError, NumericError, UnsupportedModeError, ValidationError,
)
from .hyptest import (  # noqa: E402
    BetaResult, BoundPoint, beta_bsc_product, beta_exact, dh_divergence, dt_achievability_logM,
    list_mc_bound, mc_converse_logM, sw_converse_epsilon,
)
from .mtypes import (  # noqa: E402
    SequencePair, TypeClassSpec, competitor_tail_exact, empirical_stats, lemma1_bound,
    sample_type_class,
)

__all__ = [
    "AsymptoticParams", "ErrorSpec", "ListParams", "ArqParams", "expected_rate_erasure", "erasure_logM",
    "gaussian_cdf", "gaussian_quantile", "hoeffding_interval", "list_rates", "ordinary_logM", "sw_second_order",
    "Channel", "ChannelStats", "JointPmf", "Pmf", "SourceStats", "awgn_constants", "blahut_arimoto", "capacity",
    "conditional_information_variance", "dispersion_range", "epsilon_dispersion", "mutual_information",
    "source_conditional_stats", "unconditional_information_variance",
    "ArgumentError", "FblkitError", "NumericError", "UnsupportedModeError", "ValidationError",
    "BetaResult", "BoundPoint", "beta_bsc_product", "beta_exact", "dh_divergence", "dt_achievability_logM",
    "list_mc_bound", "mc_converse_logM", "sw_converse_epsilon",
    "SequencePair", "TypeClassSpec", "competitor_tail_exact", "empirical_stats", "lemma1_bound",
    "sample_type_class",
]
