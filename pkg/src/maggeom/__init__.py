"""Magnitude of symmetric matrices and finite metric spaces, with geometric certificates."""

__version__ = "0.1.0"

from .analysis import (
    Criterion,
    LowRankClass,
    classify_low_rank,
    entrywise_square,
    hemisphere_monte_carlo,
    negative_type_upper_bound,
    positive_weighting,
    q_spread,
    rank2_equality_example,
    rowmin_obstruction,
    rowsum_obstruction,
    spread_report,
    tensor_bound_check,
    three_point_criterion,
)
from .errors import (
    HypothesisError,
    InvalidInput,
    InvalidMatrix,
    InvalidMetric,
    MaggeomError,
    NoWeighting,
    NumericalFailure,
)
from .geometry import (
    CausalClass,
    Verdict,
    augmented_circumsphere,
    center_in_convex_hull,
    circumsphere_certificate,
    verify_certificate,
)
from .linalg import Signature, SymmetricMatrix, factorize, inner_product, signature, solve_symmetric
from .magnitude import magnitude, magnitude_inverse_sum, magnitude_of_metric, rayleigh_quotient
from .metric import MetricSpace, is_negative_type, magnitude_profile, path_metric_graph, similarity_matrix
