"""Cyclic coordinate descent inner loops for the non-negative weighted lasso.

The loops are written in plain numeric Python so that numba can compile them;
without numba they run as-is, just slower.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return deco


@njit(cache=True)
def cd_solve(m, h, lam, w, beta, tol, max_sweeps):
    """Minimise -b.H + 0.5 b.M.b + lam w.b over b >= 0, updating beta in place.

    One coordinate at a time: beta_j <- max(0, (h_j - sum_{k!=j} M_jk beta_k
    - lam w_j) / M_jj). Stops once the largest coordinate change in a sweep
    falls below tol * (1 + max |beta|). Returns (sweeps, converged).
    """
    p = beta.shape[0]
    r = h - m @ beta  # r_j = h_j - (M beta)_j, maintained across updates
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        max_delta = 0.0
        max_beta = 0.0
        for j in range(p):
            mjj = m[j, j]
            old = beta[j]
            if mjj > 0.0:
                val = (r[j] + mjj * old - lam * w[j]) / mjj
                new = val if val > 0.0 else 0.0
                if new != old:
                    delta = new - old
                    for k in range(p):
                        r[k] -= m[k, j] * delta
                    beta[j] = new
                change = abs(beta[j] - old)
                if change > max_delta:
                    max_delta = change
            if abs(beta[j]) > max_beta:
                max_beta = abs(beta[j])
        if max_delta <= tol * (1.0 + max_beta):
            converged = True
            break
    return sweeps, converged


@njit(cache=True)
def cd_path(m, h, lams, w, tol, max_sweeps):
    """Warm-started solves along a descending lambda sequence."""
    p = h.shape[0]
    betas = np.zeros((lams.shape[0], p))
    beta = np.zeros(p)
    ok = True
    for i in range(lams.shape[0]):
        _, converged = cd_solve(m, h, lams[i], w, beta, tol, max_sweeps)
        if not converged:
            ok = False
        betas[i] = beta
    return betas, ok
