"""Capacity and reliability bounds for the DNA storage channel, plus a
desk-scale Monte Carlo simulator of the channel and its universal decoder."""

from .bounds import (
    BoundResult,
    DnaParams,
    ExtensionFamily,
    OptimizerConfig,
    bounds_sweep,
    capacity_lower_bound,
    capacity_upper_bound,
    critical_beta,
    critical_beta_prior_bsc,
    critical_beta_uniform,
    excess_rate_omega,
    lb_objective,
)
from .channel import (
    Composition,
    Dmc,
    MergedChannel,
    binomial_extend,
    make_bsc,
    make_modulo_additive,
    validate_dmc,
)
from .dnasim import (
    Codebook,
    SamplingRealization,
    decode_universal,
    make_codebook,
    monte_carlo_error,
    outage_probability,
    realization_from_u,
    sample_channel,
    type_class_log_sizes,
    type_class_sizes,
    universal_metric,
    wilson_interval,
)
from .infotheory import (
    Distribution,
    PoissonTail,
    binary_entropy,
    binary_kl,
    blahut_arimoto,
    cid,
    entropy,
    kl_divergence,
    mutual_information,
    poisson_hazard,
    poisson_pmf,
    poisson_truncated,
    uniform,
)
from .reliability import (
    ThetaVector,
    exponent_objective,
    ideal_exponent,
    reliability_lower_bound,
    reliability_minimizer,
    supported_rate,
)
from .symmetry import (
    SymmetryReport,
    check_extension_symmetry,
    gallager_partition,
    is_doubly_permutation,
)

__version__ = "0.1.0"
