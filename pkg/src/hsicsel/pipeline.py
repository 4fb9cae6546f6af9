"""Two-fold orchestration: screen and tune on fold 1, select and infer on fold 2."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import inference, nnlasso
from ._seeds import derive_int, generator
from .errors import FoldTooSmallError, HsicSelError, NonFiniteError
from .hsic import (
    BLOCK,
    EstimatorSpec,
    OAS,
    _feature_grams,
    _pair_value,
    estimate_cov,
    estimate_H,
    estimate_M,
    project_pd,
)
from .kernels import GAUSSIAN, NORMALIZED_DELTA, GramMatrix, KernelSpec, gram

# named substreams below the master seed
_S_SPLIT = "split"
_S_CV = "cv"
_S_H = "h-subsets"
_S_M1 = "m1-subsets"
_S_M2 = "m2-subsets"

CV = "cv"
AIC = "aic"
FIXED = "fixed"


@dataclass(frozen=True)
class Dataset:
    """Covariate matrix plus a continuous or categorical response."""

    x: np.ndarray
    y: np.ndarray
    y_categorical: bool = False
    feature_names: tuple = ()
    feature_kernels: tuple | None = None  # per-column "gaussian" / "delta"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "x", x)
        y = np.asarray(self.y)
        object.__setattr__(self, "y", y)
        if x.ndim != 2:
            raise ValueError("x must be an (n, p) matrix")
        if y.shape[0] != x.shape[0]:
            raise ValueError("x and y row counts differ")
        if not np.all(np.isfinite(x)):
            raise NonFiniteError("covariates contain NaN or inf")
        if not self.y_categorical and not np.all(np.isfinite(y.astype(float))):
            raise NonFiniteError("response contains NaN or inf")
        if not self.feature_names:
            names = tuple(f"x{j + 1}" for j in range(x.shape[1]))
            object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def take(self, rows: np.ndarray) -> "Dataset":
        return Dataset(x=self.x[rows], y=self.y[rows],
                       y_categorical=self.y_categorical,
                       feature_names=self.feature_names,
                       feature_kernels=self.feature_kernels)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything `run_psi` needs besides the data."""

    split_ratio: float = 0.25
    screen_count: int | None = None  # None: keep all features
    alpha: float = 0.05
    target: str = inference.HSIC_TARGET
    side: str = inference.TWO_SIDED
    screen_estimator: EstimatorSpec = EstimatorSpec.unbiased()
    h_estimator: EstimatorSpec = EstimatorSpec.block(10)
    m_estimator: EstimatorSpec = EstimatorSpec.block(10)
    fold1_m_estimator: EstimatorSpec | None = None
    cov_method: str = OAS
    lambda_method: str = CV
    cv_folds: int = 10
    fixed_lambda: float | None = None
    adaptive_gamma: float | None = None
    pd_floor: float | None = None
    condition_full_for_hsic: bool = False
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.split_ratio < 1.0:
            raise ValueError("split ratio must lie in (0, 1)")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.screen_count is not None and self.screen_count < 1:
            raise ValueError("screen count must be positive")
        if self.target not in (inference.HSIC_TARGET, inference.PARTIAL_TARGET):
            raise ValueError(f"unknown target: {self.target!r}")
        if self.side not in (inference.ONE_SIDED, inference.TWO_SIDED):
            raise ValueError(f"unknown side: {self.side!r}")
        if self.lambda_method not in (CV, AIC, FIXED):
            raise ValueError(f"unknown lambda method: {self.lambda_method!r}")
        if self.lambda_method == FIXED and (self.fixed_lambda is None
                                            or self.fixed_lambda <= 0):
            raise ValueError("fixed lambda method needs a positive value")


@dataclass(frozen=True)
class FeatureOutcome:
    """Report row for one selected feature (or a diagnostic if not testable)."""

    feature: int
    name: str
    target: str
    side: str
    observed: float | None = None
    sigma2: float | None = None
    lower: float | None = None
    upper: float | None = None
    p_value: float | None = None
    ci_lower: float | None = None
    ci_upper: float | None = None
    significant: bool = False
    note: str | None = None


@dataclass(frozen=True)
class RunReport:
    """Full outcome of one pipeline run; serialisable and seed-reproducible."""

    config: dict
    n: int
    p: int
    fold1_rows: list
    fold2_rows: list
    screened: list
    lam: float
    weights: list
    beta: list
    selected: list
    results: list  # FeatureOutcome entries
    significant: list
    empty_selection: bool
    format_version: int = 1


def split_indices(n: int, ratio: float, rng: np.random.Generator,
                  min_rows: int = 4):
    """Seeded shuffle; the first ceil(ratio * n) rows form fold 1."""
    n1 = int(np.ceil(ratio * n))
    if n1 < min_rows or n - n1 < min_rows:
        raise FoldTooSmallError(
            f"split {n1}/{n - n1} leaves a fold below {min_rows} rows"
        )
    perm = rng.permutation(n)
    return perm[:n1], perm[n1:]


def split(dataset: Dataset, ratio: float, rng: np.random.Generator,
          min_rows: int = 4):
    """Disjoint, exhaustive two-fold split of the dataset."""
    idx1, idx2 = split_indices(dataset.n, ratio, rng, min_rows)
    return dataset.take(idx1), dataset.take(idx2)


def _column_kernels(dataset: Dataset) -> list[KernelSpec]:
    kinds = dataset.feature_kernels or (GAUSSIAN,) * dataset.p
    return [KernelSpec(kind=k) for k in kinds]


def _response_kernel(dataset: Dataset) -> KernelSpec:
    if dataset.y_categorical:
        return KernelSpec(kind=NORMALIZED_DELTA)
    return KernelSpec(kind=GAUSSIAN)


def _response_gram(dataset: Dataset) -> GramMatrix:
    y = dataset.y if dataset.y_categorical else np.asarray(dataset.y, dtype=float)
    return gram(y, _response_kernel(dataset))


def marginal_hsic(dataset: Dataset, spec: EstimatorSpec,
                  *, grams=None, y_gram=None) -> np.ndarray:
    """Per-feature dependence on the response under any estimator kind."""
    if grams is None:
        grams = _feature_grams(dataset.x, _column_kernels(dataset))
    if y_gram is None:
        y_gram = _response_gram(dataset)
    values = np.empty(dataset.p)
    for j, kg in enumerate(grams):
        values[j] = _pair_value(kg, y_gram, spec, (spec.seed, j))
    return values


def screen(dataset: Dataset, count: int, spec: EstimatorSpec,
           *, grams=None, y_gram=None):
    """Indices of the `count` features with the largest marginal estimates.

    Returned in decreasing-estimate order; ties break toward the lower index.
    Also returns the full estimate vector.
    """
    if count > dataset.p:
        raise ValueError(f"cannot screen {count} of {dataset.p} features")
    values = marginal_hsic(dataset, spec, grams=grams, y_gram=y_gram)
    order = np.lexsort((np.arange(dataset.p), -values))
    return order[:count], values


def _select_lambda(config: PipelineConfig, u1, y1, w, grid) -> float:
    if config.lambda_method == FIXED:
        return float(config.fixed_lambda)
    if config.lambda_method == AIC:
        return nnlasso.aic_lambda(u1, y1, w, grid)
    return nnlasso.cv_lambda(u1, y1, w, grid, folds=config.cv_folds,
                             seed=derive_int(config.seed, _S_CV))


def _config_dict(config: PipelineConfig) -> dict:
    return dataclasses.asdict(config)


def run_psi(dataset: Dataset, config: PipelineConfig) -> RunReport:
    """Run the full two-fold selection-and-inference sequence.

    Fold 1: marginal estimates, screening, dependence matrix, PD projection,
    least-squares reformulation, weight and lambda selection. Fold 2: fresh
    estimates on the screened features, covariance of the marginal vector,
    lasso solve, and per selected feature the selection event, truncation
    interval, p-value and confidence interval.
    """
    idx1, idx2 = split_indices(dataset.n, config.split_ratio,
                               generator(config.seed, _S_SPLIT),
                               min_rows=_min_fold_rows(config))
    fold1 = dataset.take(idx1)
    fold2 = dataset.take(idx2)

    # fold 1: screening and hyper-parameters
    grams1 = _feature_grams(fold1.x, _column_kernels(fold1))
    ygram1 = _response_gram(fold1)
    p_screen = min(config.screen_count or dataset.p, dataset.p)
    order, h1_all = screen(fold1, dataset.p, config.screen_estimator,
                           grams=grams1, y_gram=ygram1)
    screened = order[:p_screen]
    h1_sc = h1_all[screened]

    spec_m1 = config.fold1_m_estimator or config.m_estimator
    spec_m1 = dataclasses.replace(spec_m1, seed=derive_int(config.seed, _S_M1))
    m1 = estimate_M(fold1.x[:, screened], None, spec_m1,
                    grams=[grams1[j] for j in screened])
    m1p = project_pd(m1, eps=config.pd_floor)
    u1, y1 = nnlasso.cholesky_reformulate(m1p.values, h1_sc)

    q = screened.size
    if config.adaptive_gamma is not None:
        w = nnlasso.adaptive_weights(u1, y1, config.adaptive_gamma)
    else:
        w = np.ones(q)
    grid = nnlasso.lambda_grid(h1_sc, w)
    lam = _select_lambda(config, u1, y1, w, grid)

    # fold 2: estimation, selection, inference
    kernels2 = _column_kernels(fold2)
    grams2 = _feature_grams(fold2.x[:, screened],
                            [kernels2[j] for j in screened])
    ygram2 = _response_gram(fold2)
    spec_h = dataclasses.replace(config.h_estimator,
                                 seed=derive_int(config.seed, _S_H))
    h2 = estimate_H(fold2.x[:, screened], fold2.y, None, None, spec_h,
                    grams=grams2, y_gram=ygram2)
    spec_m2 = dataclasses.replace(config.m_estimator,
                                  seed=derive_int(config.seed, _S_M2))
    m2 = estimate_M(fold2.x[:, screened], None, spec_m2, grams=grams2)
    m2p = project_pd(m2, eps=config.pd_floor)
    cov = estimate_cov(h2, config.cov_method)

    problem = nnlasso.LassoProblem(h=h2.values, m=m2p.values, lam=lam, w=w)
    solution = nnlasso.solve(problem)
    active = solution.active

    report_base = dict(
        config=_config_dict(config),
        n=dataset.n,
        p=dataset.p,
        fold1_rows=[int(i) for i in idx1],
        fold2_rows=[int(i) for i in idx2],
        screened=[int(dataset_j) for dataset_j in screened],
        lam=float(lam),
        weights=[float(v) for v in w],
        beta=[float(v) for v in solution.beta],
        selected=[int(screened[j]) for j in active],
    )
    if active.size == 0:
        return RunReport(results=[], significant=[], empty_selection=True,
                         **report_base)

    full_event = None
    if config.target == inference.PARTIAL_TARGET or config.condition_full_for_hsic:
        full_event = inference.event_full_model(m2p, active, lam, w)

    results = []
    significant = []
    for j in active:
        orig = int(screened[j])
        name = dataset.feature_names[orig]
        base = dict(feature=orig, name=name, target=config.target,
                    side=config.side)
        try:
            if config.target == inference.HSIC_TARGET:
                eta = inference.eta_hsic(int(j), q)
                event = (full_event if config.condition_full_for_hsic
                         else inference.event_single_feature(
                             m2p, solution.beta, int(j), lam, w))
            else:
                eta = inference.eta_partial(m2p, active, int(j))
                event = full_event
            trunc = inference.truncation_points(event, eta, cov.values, h2.values)
            sigma2 = float(eta @ cov.values @ eta)
            null = inference.TruncatedGaussian(mu=0.0, sigma2=sigma2,
                                               lower=trunc.lower,
                                               upper=trunc.upper)
            pval = inference.p_value(null, trunc.observed, config.side)
            ci_lo, ci_hi = inference.confidence_interval(trunc, sigma2,
                                                         config.alpha,
                                                         config.side)
            is_sig = pval <= config.alpha
            results.append(FeatureOutcome(observed=trunc.observed, sigma2=sigma2,
                                          lower=trunc.lower, upper=trunc.upper,
                                          p_value=float(pval),
                                          ci_lower=float(ci_lo),
                                          ci_upper=float(ci_hi),
                                          significant=bool(is_sig), **base))
            if is_sig:
                significant.append(orig)
        except HsicSelError as exc:
            results.append(FeatureOutcome(note=f"not testable: {exc}", **base))

    return RunReport(results=results, significant=significant,
                     empty_selection=False, **report_base)


def _min_fold_rows(config: PipelineConfig) -> int:
    sizes = [4]
    for spec in (config.screen_estimator, config.h_estimator, config.m_estimator,
                 config.fold1_m_estimator):
        if spec is not None and spec.kind == BLOCK:
            sizes.append(spec.block_size)
    return max(sizes)
