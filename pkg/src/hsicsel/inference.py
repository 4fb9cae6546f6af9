"""Selection-event polyhedra, truncation points, truncated-Gaussian pivots,
p-values and confidence intervals conditioned on the selection."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.optimize
from scipy.special import log_ndtr, ndtr

from .errors import (
    DegenerateDirectionError,
    EmptyIntervalError,
    LambdaZeroError,
    NotSelectedError,
    NumericalDegeneracyWarning,
    OutsideTruncationError,
    RootNotBracketedWarning,
)
from .hsic import DependencyMatrix

ONE_SIDED = "one"
TWO_SIDED = "two"

HSIC_TARGET = "hsic"
PARTIAL_TARGET = "partial"

# |z| beyond which the CDF switches to log-space tail evaluation
_TAIL_Z = 6.0
_SLACK = 1e-8


@dataclass(frozen=True)
class SelectionEvent:
    """Affine representation {A H <= b} of a selection outcome.

    ``a_matrix`` is stored with columns in the original feature order;
    ``ordering`` records the (selected, complement) permutation used during
    construction, mapping internal positions to original indices.
    """

    a_matrix: np.ndarray
    b: np.ndarray
    ordering: np.ndarray


@dataclass(frozen=True)
class TruncatedGaussian:
    """N(mu, sigma2) truncated to [lower, upper]."""

    mu: float
    sigma2: float
    lower: float
    upper: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise DegenerateDirectionError("variance must be positive")
        if not self.lower < self.upper:
            raise EmptyIntervalError(
                f"truncation interval [{self.lower}, {self.upper}] is empty"
            )


@dataclass(frozen=True)
class TruncationResult:
    """Truncation interval for one target direction plus the pieces behind it."""

    eta: np.ndarray
    c_vector: np.ndarray
    z_vector: np.ndarray
    lower: float
    upper: float
    observed: float


def _matrix(m) -> np.ndarray:
    return m.values if isinstance(m, DependencyMatrix) else np.asarray(m, dtype=float)


def event_full_model(m, selected, lam: float, w: np.ndarray) -> SelectionEvent:
    """Polyhedron of {selected set == S} for the non-negative weighted lasso.

    Stacks the positivity constraints on the selected block and the dual
    feasibility constraints on its complement, both affine in H. The row
    block acting on the complement enters as (1/lam) [-M_cs Mss^-1 | Id]
    (equivalently H_c - M_cs Mss^-1 H_s <= lam (w_c - M_cs Mss^-1 w_s)),
    which is what the KKT conditions give for the zero coordinates.
    """
    mv = _matrix(m)
    p = mv.shape[0]
    sel = np.asarray(selected, dtype=int)
    if sel.size == 0:
        raise NotSelectedError("selected set is empty")
    if lam <= 0:
        raise LambdaZeroError("selection event undefined for lambda <= 0")
    w = np.asarray(w, dtype=float)
    comp = np.setdiff1d(np.arange(p), sel)
    ordering = np.concatenate([sel, comp])

    mss_inv = np.linalg.inv(mv[np.ix_(sel, sel)])
    a_perm = np.zeros((p, p))
    b = np.empty(p)
    k = sel.size
    a_perm[:k, :k] = -mss_inv / lam
    b[:k] = -mss_inv @ w[sel]
    if comp.size:
        mcs = mv[np.ix_(comp, sel)]
        proj = mcs @ mss_inv
        a_perm[k:, :k] = -proj / lam
        a_perm[k:, k:] = np.eye(comp.size) / lam
        b[k:] = w[comp] - proj @ w[sel]

    a_orig = np.zeros((p, p))
    a_orig[:, ordering] = a_perm
    return SelectionEvent(a_matrix=a_orig, b=b, ordering=ordering)


def event_single_feature(m, beta: np.ndarray, j: int, lam: float,
                         w: np.ndarray) -> SelectionEvent:
    """Polyhedron of {feature j is selected}: a single half-space on H_j."""
    mv = _matrix(m)
    p = mv.shape[0]
    beta = np.asarray(beta, dtype=float)
    if lam <= 0:
        raise LambdaZeroError("selection event undefined for lambda <= 0")
    if not beta[j] > 0:
        raise NotSelectedError(f"feature {j} has beta <= 0")
    beta_minus = beta.copy()
    beta_minus[j] = 0.0
    a = np.zeros((1, p))
    a[0, j] = -1.0
    b = np.array([-float(mv[j] @ beta_minus) - lam * float(w[j])])
    return SelectionEvent(a_matrix=a, b=b, ordering=np.arange(p))


def eta_hsic(j: int, p: int) -> np.ndarray:
    """Direction of the marginal dependence target: the j-th unit vector."""
    if not 0 <= j < p:
        raise IndexError(f"feature index {j} out of range for p={p}")
    eta = np.zeros(p)
    eta[j] = 1.0
    return eta


def eta_partial(m, selected, j: int) -> np.ndarray:
    """Direction of the partial target: row of Mss^-1 scattered to S positions."""
    mv = _matrix(m)
    sel = np.asarray(selected, dtype=int)
    pos = np.flatnonzero(sel == j)
    if pos.size == 0:
        raise IndexError(f"feature {j} is not in the selected set")
    mss_inv = np.linalg.inv(mv[np.ix_(sel, sel)])
    eta = np.zeros(mv.shape[0])
    eta[sel] = mss_inv[pos[0]]
    return eta


def truncation_points(event: SelectionEvent, eta: np.ndarray, sigma: np.ndarray,
                      h: np.ndarray) -> TruncationResult:
    """Truncation interval of eta.H implied by {A H <= b}.

    The lower point maximises (b_j - (AZ)_j)/(AC)_j over rows with negative
    AC, the upper point minimises over rows with positive AC; rows with zero
    AC do not constrain the target.
    """
    eta = np.asarray(eta, dtype=float)
    h = np.asarray(h, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    a = event.a_matrix
    b = event.b

    direction_var = float(eta @ sigma @ eta)
    if direction_var <= 0:
        raise DegenerateDirectionError("eta' Sigma eta must be positive")
    margin = a @ h - b
    if np.max(margin, initial=-np.inf) > _SLACK:
        raise OutsideTruncationError(
            f"observed H violates the event by {np.max(margin):.3e}"
        )

    c = sigma @ eta / direction_var
    observed = float(eta @ h)
    z = h - c * observed
    ac = a @ c
    az = a @ z
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = (b - az) / ac
    neg = ac < 0
    pos = ac > 0
    lower = float(np.max(ratios[neg])) if neg.any() else -np.inf
    upper = float(np.min(ratios[pos])) if pos.any() else np.inf
    if lower >= upper:
        raise EmptyIntervalError(
            f"degenerate truncation interval [{lower}, {upper}]"
        )
    if observed < lower or observed > upper:
        if observed < lower - _SLACK or observed > upper + _SLACK:
            raise OutsideTruncationError(
                f"observed {observed} outside [{lower}, {upper}] beyond slack"
            )
        observed = min(max(observed, lower), upper)
    return TruncationResult(eta=eta, c_vector=c, z_vector=z,
                            lower=lower, upper=upper, observed=observed)


def _z(x: float, mu: float, sd: float) -> float:
    if np.isinf(x):
        return x
    return (x - mu) / sd


def trunc_gauss_cdf(x: float, tg: TruncatedGaussian) -> float:
    """CDF of the truncated Gaussian at x, stable for far-tail intervals.

    x is clamped into [lower, upper]. When the whole interval sits more than
    6 sigma to one side of the mean, the ratio is evaluated through
    log-CDF/log-survival differences; otherwise plain (complementary) normal
    CDFs are used, picking the side that avoids cancellation.
    """
    sd = np.sqrt(tg.sigma2)
    x = min(max(x, tg.lower), tg.upper)
    za = _z(tg.lower, tg.mu, sd)
    zb = _z(tg.upper, tg.mu, sd)
    zx = _z(x, tg.mu, sd)

    if za >= _TAIL_Z:
        # interval in the far right tail: work with log survival values
        la = log_ndtr(-za)
        lx = log_ndtr(-zx)
        lb = log_ndtr(-zb)
        den = np.expm1(lb - la)
        if den == 0.0 or not np.isfinite(den):
            return _degenerate_value(za, zx)
        value = np.expm1(lx - la) / den
    elif zb <= -_TAIL_Z:
        la = log_ndtr(za)
        lx = log_ndtr(zx)
        lb = log_ndtr(zb)
        den = np.expm1(la - lb)
        if den == 0.0 or not np.isfinite(den):
            return _degenerate_value(za, zx)
        value = np.exp(lx - lb) * np.expm1(la - lx) / den
    elif za >= 0.0:
        # right half: survival differences keep full relative precision
        num = ndtr(-za) - ndtr(-zx)
        den = ndtr(-za) - ndtr(-zb)
        if den <= 0.0:
            return _degenerate_value(za, zx)
        value = num / den
    else:
        num = ndtr(zx) - ndtr(za)
        den = ndtr(zb) - ndtr(za)
        if den <= 0.0:
            return _degenerate_value(za, zx)
        value = num / den
    return float(min(max(value, 0.0), 1.0))


def _degenerate_value(za: float, zx: float) -> float:
    # mass concentrates at the interval endpoint nearest the mean
    warnings.warn("truncated CDF denominator underflowed; returning boundary value",
                  NumericalDegeneracyWarning, stacklevel=3)
    if za >= 0.0:
        return 1.0  # x >= lower endpoint always holds after clamping
    return 0.0


def p_value(tg: TruncatedGaussian, observed: float, side: str = TWO_SIDED) -> float:
    """Conditional p-value from the truncated-Gaussian pivot.

    One-sided: 1 - F(observed) for the alternative "target > hypothesis";
    two-sided: 2 min(F, 1 - F).
    """
    cdf = trunc_gauss_cdf(observed, tg)
    if side == ONE_SIDED:
        return float(1.0 - cdf)
    if side == TWO_SIDED:
        return float(min(1.0, 2.0 * min(cdf, 1.0 - cdf)))
    raise ValueError(f"unknown test side: {side!r}")


def _solve_mean(trunc: TruncationResult, sigma2: float, target: float) -> float:
    """Mean value mu with 1 - F_mu(observed) == target; +-inf when out of reach."""
    sd = float(np.sqrt(sigma2))
    obs = trunc.observed

    def gap(mu: float) -> float:
        tg = TruncatedGaussian(mu=mu, sigma2=sigma2,
                               lower=trunc.lower, upper=trunc.upper)
        return 1.0 - trunc_gauss_cdf(obs, tg) - target

    lo, hi = obs - sd, obs + sd
    limit_lo, limit_hi = obs - 20.0 * sd, obs + 20.0 * sd
    step = sd
    while gap(lo) > 0.0 and lo > limit_lo:
        step *= 2.0
        lo = max(lo - step, limit_lo)
    while gap(hi) < 0.0 and hi < limit_hi:
        step *= 2.0
        hi = min(hi + step, limit_hi)
    if gap(lo) > 0.0:
        warnings.warn("confidence bound not bracketed below; returning -inf",
                      RootNotBracketedWarning, stacklevel=3)
        return -np.inf
    if gap(hi) < 0.0:
        warnings.warn("confidence bound not bracketed above; returning +inf",
                      RootNotBracketedWarning, stacklevel=3)
        return np.inf
    return float(scipy.optimize.brentq(gap, lo, hi, xtol=1e-12 * max(sd, 1.0),
                                       rtol=8.9e-16))


def confidence_interval(trunc: TruncationResult, sigma2: float, alpha: float,
                        side: str = TWO_SIDED):
    """Conditional confidence interval for the target mean at level alpha.

    Endpoints solve 1 - F_mu(observed) = alpha (one-sided lower bound) or
    alpha/2 and 1 - alpha/2 (two-sided) by monotone root finding in mu.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if side == ONE_SIDED:
        return _solve_mean(trunc, sigma2, alpha), np.inf
    if side == TWO_SIDED:
        lower = _solve_mean(trunc, sigma2, alpha / 2.0)
        upper = _solve_mean(trunc, sigma2, 1.0 - alpha / 2.0)
        return lower, upper
    raise ValueError(f"unknown test side: {side!r}")
