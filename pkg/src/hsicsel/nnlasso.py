"""Non-negative weighted lasso on dependence estimates: solver, KKT checks,
lambda selection (CV / AIC) and adaptive penalty weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from ._solver import cd_path, cd_solve
from .errors import DegenerateFoldsError, NotPDError

WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True)
class LassoProblem:
    """Instance of: minimise -b.H + 0.5 b.M.b + lam w.b over b >= 0."""

    h: np.ndarray
    m: np.ndarray
    lam: float
    w: np.ndarray

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if np.any(np.asarray(self.w) < 0):
            raise ValueError("weights must be non-negative")

    def objective(self, beta: np.ndarray) -> float:
        beta = np.asarray(beta, dtype=float)
        return float(
            -beta @ self.h + 0.5 * beta @ self.m @ beta + self.lam * beta @ self.w
        )


@dataclass(frozen=True)
class LassoSolution:
    """Optimum with its active set, dual slacks and KKT certification."""

    beta: np.ndarray
    active: np.ndarray  # indices with beta > 0
    slacks: np.ndarray  # u = -H + M beta + lam w
    kkt_residual: float
    converged: bool
    sweeps: int


def cholesky_reformulate(m: np.ndarray, h: np.ndarray):
    """Rewrite the quadratic problem as a least-squares lasso.

    Returns upper-triangular U with M = U^T U and the vector y solving
    U^T y = H, so that 0.5 ||y - U b||^2 + lam w.b matches the original
    objective up to the constant 0.5 ||y||^2.
    """
    m = np.asarray(m, dtype=float)
    h = np.asarray(h, dtype=float)
    try:
        lower = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPDError("matrix is not positive definite") from exc
    y = scipy.linalg.solve_triangular(lower, h, lower=True)
    return lower.T.copy(), y


def solve(problem: LassoProblem, tol: float = 1e-12,
          max_sweeps: int | None = None,
          beta0: np.ndarray | None = None) -> LassoSolution:
    """Cyclic coordinate descent with a non-negativity clamp per coordinate."""
    h = np.asarray(problem.h, dtype=float)
    m = np.asarray(problem.m, dtype=float)
    w = np.asarray(problem.w, dtype=float)
    p = h.shape[0]
    if max_sweeps is None:
        max_sweeps = 10 * p * 1000
    beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=float)
    sweeps, converged = cd_solve(m, h, problem.lam, w, beta, tol, max_sweeps)
    slacks = -h + m @ beta + problem.lam * w
    residual = _kkt_residual(beta, slacks)
    return LassoSolution(
        beta=beta,
        active=np.flatnonzero(beta > 0.0),
        slacks=slacks,
        kkt_residual=residual,
        converged=bool(converged),
        sweeps=int(sweeps),
    )


def _kkt_residual(beta: np.ndarray, slacks: np.ndarray) -> float:
    dual = float(np.max(-np.minimum(slacks, 0.0), initial=0.0))
    primal = float(np.max(-np.minimum(beta, 0.0), initial=0.0))
    comp = float(np.max(beta * slacks, initial=0.0))
    return max(dual, primal, comp)


def kkt_check(solution: LassoSolution, problem: LassoProblem) -> float:
    """Largest violation of stationarity, feasibility or complementarity."""
    beta = np.asarray(solution.beta, dtype=float)
    slacks = -problem.h + problem.m @ beta + problem.lam * problem.w
    return _kkt_residual(beta, slacks)


def lambda_grid(h: np.ndarray, w: np.ndarray, num: int = 50,
                span: float = 1e-3) -> np.ndarray:
    """Log-spaced grid from lambda_max (smallest lambda with beta = 0) down.

    lambda_max = max_j H_j / w_j over positive weights; if no positive ratio
    exists, every positive lambda already gives the zero solution and a unit
    grid is returned.
    """
    h = np.asarray(h, dtype=float)
    w = np.asarray(w, dtype=float)
    mask = w > 0
    lam_max = float(np.max(h[mask] / w[mask], initial=0.0)) if mask.any() else 0.0
    if lam_max <= 0.0:
        return np.array([1.0])
    return np.geomspace(lam_max, span * lam_max, num)


def _ls_path(x: np.ndarray, y: np.ndarray, lams: np.ndarray, w: np.ndarray):
    # least-squares form via its gram representation
    m = x.T @ x
    h = x.T @ y
    betas, _ = cd_path(m, h, lams, w, 1e-12, 100_000)
    return betas


def cv_lambda(u: np.ndarray, y: np.ndarray, w: np.ndarray, grid,
              folds: int = 10, seed: int = 0) -> float:
    """Pick lambda by K-fold CV on the rows of the least-squares form.

    Rows are shuffled once with the given seed and split into contiguous
    folds; the score is the mean held-out 0.5 ||y - U beta||^2. Ties break
    toward the larger (sparser) lambda.
    """
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("lambda grid is empty")
    if folds < 2:
        raise DegenerateFoldsError("need at least 2 folds")
    n = y.shape[0]
    if n < folds:
        raise DegenerateFoldsError(f"{n} rows cannot form {folds} folds")
    order = np.argsort(-grid, kind="stable")
    lams = grid[order]
    perm = np.random.default_rng(seed).permutation(n)
    scores = np.zeros(lams.shape[0])
    for part in np.array_split(perm, folds):
        train = np.setdiff1d(perm, part, assume_unique=True)
        betas = _ls_path(u[train], y[train], lams, np.asarray(w, dtype=float))
        resid = y[part][None, :] - betas @ u[part].T
        scores += 0.5 * np.sum(resid * resid, axis=1)
    scores /= folds
    return float(lams[np.argmin(scores)])


def aic_lambda(u: np.ndarray, y: np.ndarray, w: np.ndarray, grid) -> float:
    """Pick lambda by n log(RSS/n) + 2 |active set| on the full fit."""
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("lambda grid is empty")
    order = np.argsort(-grid, kind="stable")
    lams = grid[order]
    betas = _ls_path(u, y, lams, np.asarray(w, dtype=float))
    n = y.shape[0]
    resid = y[None, :] - betas @ u.T
    rss = np.maximum(np.sum(resid * resid, axis=1), 1e-300)
    sizes = np.sum(betas > 0.0, axis=1)
    scores = n * np.log(rss / n) + 2.0 * sizes
    return float(lams[np.argmin(scores)])


def adaptive_weights(u: np.ndarray, y: np.ndarray, gamma: float) -> np.ndarray:
    """Weights 1 / max(pilot, 1e-6)^gamma from a non-negative least-squares pilot.

    The pilot respects the sign constraint of the selection problem; zero
    pilot coordinates get the floored (large) weight instead of infinity.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    pilot, _ = scipy.optimize.nnls(np.asarray(u, dtype=float),
                                   np.asarray(y, dtype=float))
    return 1.0 / np.maximum(pilot, WEIGHT_FLOOR) ** gamma
