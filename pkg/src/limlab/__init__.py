"""Simulation and estimation laboratory for linear-in-means peer-effects
models on random networks."""

__version__ = "0.1.0"

from .errors import (
    DegenerateInnerProduct,
    DimensionMismatch,
    EdgeListFormatError,
    InvalidConfig,
    InvalidGraph,
    IsolatedNode,
    LimLabError,
    NegativeTarget,
    ProbabilityOverflow,
    SingularSystem,
)
from .netcore import (
    AveragingOperator,
    FrobeniusStats,
    Graph,
    averaging_operator,
    degrees,
    eigenvalues,
    frobenius_stats,
    neighborhood_concentration,
    read_edge_list,
    write_edge_list,
)
from .genmodels import (
    ConstantLaw,
    DcsbmConfig,
    ExpectedDegrees,
    ExplicitRho,
    LatentPositions,
    PowerLawMeanDegree,
    RdpgConfig,
    TargetMeanDegree,
    UniformLaw,
    calibrate_rho,
    expected_degrees,
    sample_bernoulli_covariates,
    sample_dcsbm,
    sample_edges_given_positions,
    sample_rdpg,
    write_latent_csv,
)
from .lim import (
    DesignMatrix,
    LimParameters,
    Outcomes,
    RankTestResult,
    RdpgLimits,
    build_design,
    equilibrium_mean,
    generate_outcomes,
    neumann_outcomes,
    rdpg_limit_objects,
    theoretical_design_rank,
)
from .identify import (
    DiagnosticsReport,
    PowersIndependence,
    VifResult,
    colinearity_report,
    distinct_eigenvalue_count,
    powers_linearly_independent,
    vif,
)
from .estimators import (
    EstimateResult,
    build_instruments,
    ols,
    profile_log_likelihood,
    qmle,
    tsls,
)
from .harness import (
    ExperimentConfig,
    RepRecord,
    SummaryRow,
    default_config,
    run_experiment,
    summarize,
)
