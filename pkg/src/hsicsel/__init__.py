"""Model-free feature selection with kernel dependence measures and valid
inference conditioned on the selection event."""

__version__ = "0.1.0"

from .errors import (
    AllIdenticalError,
    BlockTooSmallError,
    CsvIngestError,
    DegenerateDirectionError,
    DegenerateFoldsError,
    DuplicateIndexError,
    EmptyIntervalError,
    FoldTooSmallError,
    HsicSelError,
    LambdaZeroError,
    NonFiniteError,
    NotPDError,
    NotSelectedError,
    NotSymmetricError,
    NumericalDegeneracyWarning,
    OutsideTruncationError,
    RootNotBracketedWarning,
    SizeMismatchError,
    TooFewSamplesError,
    TooFewSummandsError,
)
from .kernels import GAUSSIAN, NORMALIZED_DELTA, GramMatrix, KernelSpec, center, gram, median_bandwidth
from .hsic import (
    BIASED,
    BLOCK,
    EMPIRICAL,
    INCOMPLETE,
    OAS,
    UNBIASED,
    CovarianceEstimate,
    DependencyMatrix,
    EstimatorSpec,
    HsicVector,
    estimate_H,
    estimate_M,
    estimate_cov,
    hsic_biased,
    hsic_block,
    hsic_incomplete,
    hsic_unbiased,
    project_pd,
    ustat_kernel,
)
from .nnlasso import (
    LassoProblem,
    LassoSolution,
    adaptive_weights,
    aic_lambda,
    cholesky_reformulate,
    cv_lambda,
    kkt_check,
    lambda_grid,
    solve,
)
from .inference import (
    HSIC_TARGET,
    ONE_SIDED,
    PARTIAL_TARGET,
    TWO_SIDED,
    SelectionEvent,
    TruncatedGaussian,
    TruncationResult,
    confidence_interval,
    eta_hsic,
    eta_partial,
    event_full_model,
    event_single_feature,
    p_value,
    trunc_gauss_cdf,
    truncation_points,
)
from .pipeline import Dataset, FeatureOutcome, PipelineConfig, RunReport, run_psi, screen, split
from .simulate import (
    ExperimentReport,
    SyntheticModelSpec,
    generate,
    power_experiment,
    type_one_error_experiment,
)
from .data import ingest_csv
from .report import emit_report, report_to_dict, run_report_from_dict, to_json

__all__ = [name for name in dir() if not name.startswith("_")]
