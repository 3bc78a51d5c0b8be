"""Permutation test for whether a designated pairing of subjects is unusually similar."""

from .diagnostics import (
    DiagnosticsReport,
    check_increment_bound,
    check_linearity,
    diagnose,
    empirical_cdf_distance,
    kolmogorov_distance,
)
from .engine import (
    BoundBreakdown,
    TestReport,
    berry_esseen_bound,
    exact_pvalue,
    mc_pvalue,
    normal_pvalue,
    run_test,
    statistic,
)
from .errors import (
    DegenerateDistribution,
    EnumerationTooLarge,
    InternalConsistencyError,
    InvalidDimension,
    InvalidMatching,
    InvalidPair,
    InvalidValue,
    MatchPermError,
    TooSmall,
)
from .matchings import (
    Matching,
    SamplerConfig,
    canonical_matching,
    count_matchings,
    coupling_step,
    enumerate_matchings,
    make_rng,
    sample_matching,
)
from .matrix import (
    CenteredMatrix,
    Moments,
    SimilarityMatrix,
    center_matrix,
    exact_moments,
    ingest,
    lemma1_moments,
    read_csv,
)

__version__ = "0.1.0"
