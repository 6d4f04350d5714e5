"""Certificates and calculators for growth rank and dimension growth of AH algebras."""

from .bundles import (
    KClass,
    LineBundle,
    VectorBundle,
    certified_positive,
    chern_class,
    euler_class,
    euler_nonzero,
    external_tensor,
    pullback,
    tensor,
    vil_obstruction,
)
from .cohomology import CohomologyClass, add, cup, is_zero, top_term
from .construction import (
    StageState,
    advance_stage,
    certify_perforation,
    infinite_variant_blocks,
    init_stage,
    perforation_expand,
    ratio_trace,
    run_campaign,
)
from .embeddings import (
    dimdrop_schedule,
    frobenius,
    homembed_min_rank,
    homembed_witness,
    lochom_exponent,
    represent,
)
from .matching import hall_check
from .rank_calculus import (
    DescriptorGraph,
    GrowthProfile,
    binomial_decompose,
    nistor_sr,
    propagate_gr,
    prune_rank_one,
    rr_upper,
    tdg_estimate,
    very_slow_exponent,
)

__version__ = "0.1.0"
