"""Synthetic toy models and the type-I-error / power experiment harnesses."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import beta as beta_dist

from ._seeds import derive_int
from .inference import HSIC_TARGET
from .pipeline import Dataset, PipelineConfig, run_psi

P_FEATURES = 50

M1 = "M1"
M1P = "M1p"
M2 = "M2"
M3 = "M3"
M4 = "M4"
MODELS = (M1, M1P, M2, M3, M4)

IDENTITY = "identity"
DECAYING = "decaying"
DECAY_RHO = 0.5

NOISE_TO_SIGNAL = 0.2
_MC_DRAWS = 1_000_000
_MC_SEED = 202_406  # fixed: noise variance is a population constant per model

# features whose marginal dependence on the response is null (zero-based)
NULL_FEATURES = tuple(range(10, P_FEATURES))


@dataclass(frozen=True)
class SyntheticModelSpec:
    """Which toy model to draw, its size, signal strength and covariance."""

    model: str
    n: int
    theta: float = 1.0
    cov_form: str = IDENTITY
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model: {self.model!r}")
        if self.cov_form not in (IDENTITY, DECAYING):
            raise ValueError(f"unknown covariance form: {self.cov_form!r}")
        if self.n < 40:
            raise ValueError("need n >= 40")


def covariance_matrix(form: str) -> np.ndarray:
    if form == IDENTITY:
        return np.eye(P_FEATURES)
    idx = np.arange(P_FEATURES)
    return DECAY_RHO ** np.abs(idx[:, None] - idx[None, :])


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _signal(model: str, x: np.ndarray, theta: float) -> np.ndarray:
    if model in (M1, M1P):
        lead = theta * x[:, 0] if model == M1P else x[:, 0]
        return lead + x[:, 1:10].sum(axis=1)
    if model == M2:
        return np.sum(x[:, :5] * x[:, 5:10], axis=1)
    if model == M3:
        return theta * x[:, 0] + x[:, 1:10].sum(axis=1)
    return theta * (x[:, 0] - x[:, 0] ** 3) + x[:, 1:10].sum(axis=1)


@lru_cache(maxsize=None)
def _mc_signal_variance(model: str, theta: float, cov_form: str) -> float:
    # only the first ten coordinates enter any signal
    cov10 = covariance_matrix(cov_form)[:10, :10]
    chol = np.linalg.cholesky(cov10)
    rng = np.random.default_rng(_MC_SEED)
    total = 0.0
    total_sq = 0.0
    chunk = 200_000
    drawn = 0
    while drawn < _MC_DRAWS:
        k = min(chunk, _MC_DRAWS - drawn)
        x10 = rng.standard_normal((k, 10)) @ chol.T
        x = np.zeros((k, P_FEATURES))
        x[:, :10] = x10
        s = _signal(model, x, theta)
        total += float(s.sum())
        total_sq += float((s * s).sum())
        drawn += k
    mean = total / _MC_DRAWS
    return total_sq / _MC_DRAWS - mean * mean


def signal_variance(model: str, theta: float, cov_form: str) -> float:
    """Variance of the covariate-dependent part of the response.

    Closed forms exist under the identity covariance; correlated designs fall
    back to a cached Monte-Carlo pre-pass.
    """
    if cov_form == IDENTITY:
        if model == M2:
            return 5.0
        if model == M3:
            return theta**2 + 9.0
        if model == M4:
            # Var(X - X^3) = E[X^2 - 2X^4 + X^6] = 1 - 6 + 15 = 10 for X ~ N(0,1)
            return 10.0 * theta**2 + 9.0
    return _mc_signal_variance(model, float(theta), cov_form)


def generate(spec: SyntheticModelSpec) -> Dataset:
    """Draw one dataset from the toy model.

    Covariates come from N(0, Xi) via the Cholesky factor of Xi. Continuous
    responses add N(0, sigma2) noise with sigma2 at a 0.2 noise-to-signal
    ratio; the binary models draw labels through the logistic link.
    """
    rng = np.random.default_rng(spec.seed)
    chol = np.linalg.cholesky(covariance_matrix(spec.cov_form))
    x = rng.standard_normal((spec.n, P_FEATURES)) @ chol.T
    signal = _signal(spec.model, x, spec.theta)
    if spec.model in (M1, M1P):
        y = (rng.random(spec.n) < _sigmoid(signal)).astype(int)
        return Dataset(x=x, y=y, y_categorical=True)
    sigma2 = NOISE_TO_SIGNAL * signal_variance(spec.model, spec.theta, spec.cov_form)
    y = signal + rng.normal(0.0, np.sqrt(sigma2), size=spec.n)
    return Dataset(x=x, y=y)


@dataclass(frozen=True)
class ExperimentEntry:
    """Rejection counts for one configuration point."""

    theta: float | None
    tests: int
    rejections: int
    rate: float | None
    ci_lower: float | None
    ci_upper: float | None


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregated harness output, reproducible from (config, seed) alone."""

    kind: str
    model: dict
    config: dict
    reps: int
    rep_seeds: list
    entries: list
    format_version: int = 1


def _binomial_interval(rejections: int, tests: int):
    # Clopper-Pearson at 95%
    if tests == 0:
        return None, None
    lo = 0.0 if rejections == 0 else float(
        beta_dist.ppf(0.025, rejections, tests - rejections + 1))
    hi = 1.0 if rejections == tests else float(
        beta_dist.ppf(0.975, rejections + 1, tests - rejections))
    return lo, hi


def _entry(theta, tests: int, rejections: int) -> ExperimentEntry:
    rate = rejections / tests if tests > 0 else None
    lo, hi = _binomial_interval(rejections, tests)
    return ExperimentEntry(theta=theta, tests=tests, rejections=rejections,
                           rate=rate, ci_lower=lo, ci_upper=hi)


def _count_rejections(report, features, alpha: float):
    tests = 0
    rejections = 0
    for res in report.results:
        if res.feature in features and res.p_value is not None:
            tests += 1
            if res.p_value <= alpha:
                rejections += 1
    return tests, rejections


def type_one_error_experiment(config: PipelineConfig, model: SyntheticModelSpec,
                              reps: int) -> ExperimentReport:
    """Rejection rate of the marginal target over the null features 11..50."""
    if reps < 1:
        raise ValueError("need at least one replicate")
    if config.target != HSIC_TARGET:
        raise ValueError("the type-I harness tests the marginal target")
    null_set = frozenset(NULL_FEATURES)
    tests = 0
    rejections = 0
    rep_seeds = []
    for r in range(reps):
        data_seed = derive_int(config.seed, "rep-data", r)
        run_seed = derive_int(config.seed, "rep-run", r)
        rep_seeds.append([data_seed, run_seed])
        data = generate(dataclasses.replace(model, seed=data_seed))
        report = run_psi(data, dataclasses.replace(config, seed=run_seed))
        t, k = _count_rejections(report, null_set, config.alpha)
        tests += t
        rejections += k
    return ExperimentReport(
        kind="type1",
        model=dataclasses.asdict(model),
        config=dataclasses.asdict(config),
        reps=reps,
        rep_seeds=rep_seeds,
        entries=[_entry(None, tests, rejections)],
    )


def power_experiment(config: PipelineConfig, model: SyntheticModelSpec,
                     theta_grid, reps: int) -> ExperimentReport:
    """Rejection ratio for the first feature across a signal-strength grid."""
    thetas = [float(t) for t in theta_grid]
    if not thetas:
        raise ValueError("theta grid is empty")
    if reps < 1:
        raise ValueError("need at least one replicate")
    entries = []
    rep_seeds = []
    for ti, theta in enumerate(thetas):
        tests = 0
        rejections = 0
        for r in range(reps):
            data_seed = derive_int(config.seed, "rep-data", ti, r)
            run_seed = derive_int(config.seed, "rep-run", ti, r)
            rep_seeds.append([data_seed, run_seed])
            data = generate(dataclasses.replace(model, theta=theta,
                                                seed=data_seed))
            report = run_psi(data, dataclasses.replace(config, seed=run_seed))
            t, k = _count_rejections(report, {0}, config.alpha)
            tests += t
            rejections += k
        entries.append(_entry(theta, tests, rejections))
    return ExperimentReport(
        kind="power",
        model=dataclasses.asdict(model),
        config=dataclasses.asdict(config),
        reps=reps,
        rep_seeds=rep_seeds,
        entries=entries,
    )
