"""mitlab: integrability thresholds and equisingularity checks for toric psh models.

Exact jumping coefficients by rational breakpoint enumeration, an
independent numeric oracle by shell-decomposed quadrature, a divisorial
split with Lelong-number bookkeeping, and a symbolic one-dimensional
profile calculus for equisingularity obstructions.  See README.md for the
CLI and the file formats.
"""

from .errors import (
    DimensionError,
    FormatError,
    MitlabError,
    OracleError,
    PipelineError,
)
from .model import (
    LogSumTerm,
    Monomial,
    SeriesConfig,
    TailData,
    ToricModel,
    build_cluster_series,
    dump_model,
    evaluate_log_coords,
    frac,
    load_model,
    model_from_dict,
    model_to_dict,
    point_lelong,
    pullback_blowup,
    ray_valuation,
    restrict_tail,
    restriction_offset_is_exact,
    scale_model,
    single_term_series,
    siu_split,
)
from .oracle import (
    CONVERGES,
    DIVERGES,
    INCONCLUSIVE,
    ConvergenceVerdict,
    NumericBracket,
    QuadratureConfig,
    classify_convergence,
    difference_integrability_2d,
    numeric_threshold,
    shell_log_integral,
    shell_log_masses,
)
from .profiles import (
    INTEGRABLE,
    NON_INTEGRABLE,
    ConvexReparam,
    DifferenceVerdict,
    Profile,
    Segment,
    compose_reparam,
    equi_obstruction_pipeline,
    linear_profile,
    profile_difference_integrable,
    weighted_exp_integrable,
)
from .thresholds import (
    ClusterReport,
    GapWitness,
    SpectrumTable,
    ThresholdResult,
    cluster_report,
    equisingular_gap_witness,
    integrability_threshold,
    jumping_spectrum,
    monomial_membership,
    multiplier_staircase,
)

__version__ = "0.1.0"
