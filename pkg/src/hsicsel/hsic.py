"""HSIC point estimators, their summands, covariance estimation, PD projection.

Four estimators are provided: the biased trace form, the unbiased form, the
block estimator (mean of unbiased estimates over consecutive blocks) and the
incomplete U-statistic estimator (mean of the degree-4 kernel over randomly
drawn index 4-subsets). The block and incomplete estimators also expose their
summands, which feed the empirical/OAS covariance estimate of the marginal
dependence vector.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    BlockTooSmallError,
    DuplicateIndexError,
    NotSymmetricError,
    SizeMismatchError,
    TooFewSamplesError,
    TooFewSummandsError,
)
from .kernels import GramMatrix, KernelSpec, center, gram

BIASED = "biased"
UNBIASED = "unbiased"
BLOCK = "block"
INCOMPLETE = "incomplete"

EMPIRICAL = "empirical"
OAS = "oas"


@dataclass(frozen=True)
class EstimatorSpec:
    """Which HSIC estimator to run, with its size parameter and RNG seed.

    ``block_size`` is only read for the block estimator, ``ratio`` (the l in
    m = l*n subset draws) and ``seed`` only for the incomplete one.
    """

    kind: str
    block_size: int = 10
    ratio: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (BIASED, UNBIASED, BLOCK, INCOMPLETE):
            raise ValueError(f"unknown estimator kind: {self.kind!r}")
        if self.kind == BLOCK and self.block_size < 4:
            raise BlockTooSmallError("block size must be at least 4")
        if self.kind == INCOMPLETE and self.ratio < 1:
            raise ValueError("subset ratio must be a positive integer")

    @classmethod
    def biased(cls) -> "EstimatorSpec":
        return cls(kind=BIASED)

    @classmethod
    def unbiased(cls) -> "EstimatorSpec":
        return cls(kind=UNBIASED)

    @classmethod
    def block(cls, block_size: int) -> "EstimatorSpec":
        return cls(kind=BLOCK, block_size=block_size)

    @classmethod
    def incomplete(cls, ratio: int, seed: int = 0) -> "EstimatorSpec":
        return cls(kind=INCOMPLETE, ratio=ratio, seed=seed)

    def label(self) -> str:
        if self.kind == BLOCK:
            return f"block:{self.block_size}"
        if self.kind == INCOMPLETE:
            return f"inc:{self.ratio}"
        return self.kind


@dataclass(frozen=True)
class HsicVector:
    """Per-feature dependence estimates with their summands.

    ``summands[j]`` holds the per-block unbiased estimates (block) or the
    per-subset kernel evaluations (incomplete) for feature j; its mean equals
    ``values[j]``. ``scale`` is the CLT rate unit (number of blocks, or the
    subset count m).
    """

    values: np.ndarray
    summands: np.ndarray  # shape (p, scale)
    scale: int


@dataclass(frozen=True)
class DependencyMatrix:
    """Symmetric matrix of pairwise feature dependence estimates."""

    values: np.ndarray
    pd_projected: bool = False
    floor: float | None = None


@dataclass(frozen=True)
class CovarianceEstimate:
    """Covariance of the dependence vector itself (summand covariance / count)."""

    values: np.ndarray
    method: str
    sample_count: int


def _check_pair(k: GramMatrix, l: GramMatrix, min_n: int) -> int:
    if k.values.shape != l.values.shape:
        raise SizeMismatchError(
            f"Gram shapes differ: {k.values.shape} vs {l.values.shape}"
        )
    if k.centered or l.centered:
        raise ValueError("estimators expect uncentered Gram matrices")
    n = k.n
    if n < min_n:
        raise TooFewSamplesError(f"need at least {min_n} samples, got {n}")
    return n


def hsic_biased(k: GramMatrix, l: GramMatrix) -> float:
    """Biased estimate tr(K Gamma L Gamma) / (n-1)^2."""
    n = _check_pair(k, l, 2)
    kc = center(k).values
    # tr(Kbar L) with both symmetric
    return float(np.sum(kc * l.values) / (n - 1) ** 2)


def _unbiased_from_arrays(kt: np.ndarray, lt: np.ndarray) -> float:
    # kt, lt: Gram matrices with zeroed diagonals
    n = kt.shape[0]
    t1 = float(np.sum(kt * lt))
    krow = kt.sum(axis=1)
    lrow = lt.sum(axis=1)
    t2 = krow.sum() * lrow.sum() / ((n - 1) * (n - 2))
    t3 = 2.0 / (n - 2) * float(krow @ lrow)
    return (t1 + t2 - t3) / (n * (n - 3))


def _zero_diag(values: np.ndarray) -> np.ndarray:
    out = values.copy()
    np.fill_diagonal(out, 0.0)
    return out


def hsic_unbiased(k: GramMatrix, l: GramMatrix) -> float:
    """Unbiased estimate built from K and L with zeroed diagonals; needs n >= 4."""
    _check_pair(k, l, 4)
    return _unbiased_from_arrays(_zero_diag(k.values), _zero_diag(l.values))


def ustat_kernel(k: GramMatrix, l: GramMatrix, quadruple) -> float:
    """Degree-4 U-statistic kernel h on one index quadruple.

    Averages K_st (L_st + L_uv - 2 L_su) over all 24 orderings (s,t,u,v) of
    the four distinct indices.
    """
    idx = tuple(int(i) for i in quadruple)
    if len(set(idx)) != 4:
        raise DuplicateIndexError(f"indices must be distinct, got {idx}")
    kv = k.values if isinstance(k, GramMatrix) else np.asarray(k)
    lv = l.values if isinstance(l, GramMatrix) else np.asarray(l)
    total = 0.0
    for s, t, u, v in itertools.permutations(idx):
        total += kv[s, t] * (lv[s, t] + lv[u, v] - 2.0 * lv[s, u])
    return total / 24.0


def _h_batch(kv: np.ndarray, lv: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """Vectorised h over many 4-subsets; algebraically equal to ustat_kernel."""
    ks = kv[subsets[:, :, None], subsets[:, None, :]]  # (m, 4, 4)
    ls = lv[subsets[:, :, None], subsets[:, None, :]]
    prod = ks * ls
    # sum over unordered within-subset pairs of K_ab L_ab
    a_term = 0.5 * (prod.sum(axis=(1, 2)) - np.trace(prod, axis1=1, axis2=2))
    # complementary-pair cross terms K_st L_uv over the 3 pairings, both roles
    b_term = (
        ks[:, 0, 1] * ls[:, 2, 3] + ks[:, 2, 3] * ls[:, 0, 1]
        + ks[:, 0, 2] * ls[:, 1, 3] + ks[:, 1, 3] * ls[:, 0, 2]
        + ks[:, 0, 3] * ls[:, 1, 2] + ks[:, 1, 2] * ls[:, 0, 3]
    )
    krow = ks.sum(axis=2) - np.diagonal(ks, axis1=1, axis2=2)
    lrow = ls.sum(axis=2) - np.diagonal(ls, axis1=1, axis2=2)
    cross = (krow * lrow).sum(axis=1)
    return (8.0 * a_term + 4.0 * b_term - 2.0 * cross) / 24.0


def _block_views(values: np.ndarray, block_size: int):
    """Diagonal B-by-B tiles (with zeroed diagonal), their row sums and sums."""
    n_blocks = values.shape[0] // block_size
    used = n_blocks * block_size
    tiles = values[:used, :used].reshape(n_blocks, block_size, n_blocks, block_size)
    tiles = tiles[np.arange(n_blocks), :, np.arange(n_blocks), :].copy()
    idx = np.arange(block_size)
    tiles[:, idx, idx] = 0.0
    rows = tiles.sum(axis=2)
    return tiles, rows, rows.sum(axis=1)


def _block_summands(kv: np.ndarray, lv: np.ndarray, block_size: int) -> np.ndarray:
    b = block_size
    kt, krow, ksum = _block_views(kv, b)
    lt, lrow, lsum = _block_views(lv, b)
    t1 = np.einsum("bij,bij->b", kt, lt)
    t2 = ksum * lsum / ((b - 1) * (b - 2))
    t3 = 2.0 / (b - 2) * np.einsum("bi,bi->b", krow, lrow)
    return (t1 + t2 - t3) / (b * (b - 3))


def hsic_block(x, y, x_kernel: KernelSpec, y_kernel: KernelSpec, block_size: int):
    """Block estimate: mean of unbiased estimates over consecutive size-B blocks.

    Data beyond the last full block is dropped; the sample order is kept as
    given. Returns ``(value, summands)`` where the summands are the per-block
    estimates.
    """
    kg = gram(x, x_kernel)
    lg = gram(y, y_kernel)
    n = _check_pair(kg, lg, 4)
    if block_size < 4:
        raise BlockTooSmallError("block size must be at least 4")
    if n < block_size:
        raise BlockTooSmallError(f"block size {block_size} exceeds sample count {n}")
    summands = _block_summands(kg.values, lg.values, block_size)
    return float(summands.mean()), summands


def _draw_subsets(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    # uniform over ordered 4-tuples without replacement == uniform over 4-subsets
    return np.argsort(rng.random((m, n)), axis=1)[:, :4]


def _incomplete_from_subsets(kv, lv, subsets: np.ndarray):
    summands = _h_batch(kv, lv, np.asarray(subsets))
    return float(summands.mean()), summands


def hsic_incomplete(x, y, x_kernel: KernelSpec, y_kernel: KernelSpec, ratio: int,
                    rng: np.random.Generator):
    """Incomplete U-statistic estimate of size ``ratio``.

    Draws m = ratio * n index 4-subsets uniformly with replacement and averages
    the degree-4 kernel over them. Deterministic for a given generator state.
    Returns ``(value, summands)`` with the per-subset kernel evaluations.
    """
    kg = gram(x, x_kernel)
    lg = gram(y, y_kernel)
    n = _check_pair(kg, lg, 4)
    subsets = _draw_subsets(n, ratio * n, rng)
    return _incomplete_from_subsets(kg.values, lg.values, subsets)


def _resolve_kernels(x: np.ndarray, x_kernels) -> list[KernelSpec]:
    p = x.shape[1]
    if isinstance(x_kernels, KernelSpec):
        return [x_kernels] * p
    specs = list(x_kernels)
    if len(specs) != p:
        raise SizeMismatchError(f"got {len(specs)} kernel specs for {p} features")
    return specs


def _feature_grams(x: np.ndarray, x_kernels) -> list[GramMatrix]:
    return [gram(x[:, j], spec) for j, spec in enumerate(_resolve_kernels(x, x_kernels))]


def estimate_H(x, y, x_kernels, y_kernel: KernelSpec, spec: EstimatorSpec,
               *, grams: list[GramMatrix] | None = None,
               y_gram: GramMatrix | None = None) -> HsicVector:
    """Marginal feature-response dependence vector with summands.

    Only the block and incomplete estimators are allowed here since the
    downstream pivot needs summands. Incomplete subset draws are independent
    across features, seeded from ``(spec.seed, feature index)``.
    """
    if spec.kind not in (BLOCK, INCOMPLETE):
        raise ValueError("estimate_H requires a block or incomplete estimator")
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("x must be an (n, p) matrix")
    n, p = x.shape
    if grams is None:
        grams = _feature_grams(x, x_kernels)
    if y_gram is None:
        y_gram = gram(y, y_kernel)
    lv = y_gram.values

    rows = []
    if spec.kind == BLOCK:
        b = spec.block_size
        if n < b:
            raise BlockTooSmallError(f"block size {b} exceeds sample count {n}")
        for kg in grams:
            rows.append(_block_summands(kg.values, lv, b))
    else:
        m = spec.ratio * n
        if n < 4:
            raise TooFewSamplesError("incomplete estimator needs n >= 4")
        for j, kg in enumerate(grams):
            rng = np.random.default_rng(np.random.SeedSequence((spec.seed, j)))
            subsets = _draw_subsets(n, m, rng)
            rows.append(_h_batch(kg.values, lv, subsets))
    summands = np.asarray(rows)
    return HsicVector(values=summands.mean(axis=1), summands=summands,
                      scale=summands.shape[1])


def _pair_value(kg: GramMatrix, lg: GramMatrix, spec: EstimatorSpec,
                pair_seed: tuple) -> float:
    if spec.kind == BIASED:
        return hsic_biased(kg, lg)
    if spec.kind == UNBIASED:
        return hsic_unbiased(kg, lg)
    if spec.kind == BLOCK:
        if kg.n < spec.block_size:
            raise BlockTooSmallError(
                f"block size {spec.block_size} exceeds sample count {kg.n}")
        return float(_block_summands(kg.values, lg.values, spec.block_size).mean())
    rng = np.random.default_rng(np.random.SeedSequence(pair_seed))
    n = kg.n
    subsets = _draw_subsets(n, spec.ratio * n, rng)
    return _incomplete_from_subsets(kg.values, lg.values, subsets)[0]


def estimate_M(x, x_kernels, spec: EstimatorSpec,
               *, grams: list[GramMatrix] | None = None) -> DependencyMatrix:
    """Pairwise feature-feature dependence matrix; any estimator kind allowed.

    Each pair is computed once and mirrored, so the result is exactly
    symmetric. Incomplete draws get an independent stream per pair.
    """
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    if spec.kind == BLOCK and n < spec.block_size:
        raise BlockTooSmallError(f"block size {spec.block_size} exceeds sample count {n}")
    if grams is None:
        grams = _feature_grams(x, x_kernels)

    if spec.kind == BLOCK:
        views = [_block_views(g.values, spec.block_size) for g in grams]
        b = spec.block_size
        values = np.empty((p, p))
        for s in range(p):
            kt, krow, ksum = views[s]
            for r in range(s, p):
                lt, lrow, lsum = views[r]
                t1 = np.einsum("bij,bij->b", kt, lt)
                t2 = ksum * lsum / ((b - 1) * (b - 2))
                t3 = 2.0 / (b - 2) * np.einsum("bi,bi->b", krow, lrow)
                val = float(((t1 + t2 - t3) / (b * (b - 3))).mean())
                values[s, r] = val
                values[r, s] = val
        return DependencyMatrix(values=values)

    values = np.empty((p, p))
    for s in range(p):
        for r in range(s, p):
            val = _pair_value(grams[s], grams[r], spec, (spec.seed, s, r))
            values[s, r] = val
            values[r, s] = val
    return DependencyMatrix(values=values)


def default_pd_floor(values: np.ndarray) -> float:
    """Scale-aware eigenvalue floor: 1e-6 times the top eigenvalue, at least 1e-6."""
    top = float(np.linalg.eigvalsh(values)[-1])
    return 1e-6 * max(top, 1.0)


def project_pd(m: DependencyMatrix | np.ndarray, eps: float | None = None) -> DependencyMatrix:
    """Clip eigenvalues below ``eps`` up to ``eps`` and reassemble the matrix."""
    values = m.values if isinstance(m, DependencyMatrix) else np.asarray(m, dtype=float)
    if values.shape[0] != values.shape[1] or not np.allclose(values, values.T, atol=1e-10):
        raise NotSymmetricError("matrix must be symmetric")
    if eps is None:
        eps = default_pd_floor(values)
    eigvals, eigvecs = np.linalg.eigh(values)
    if eigvals[0] >= eps:
        return DependencyMatrix(values=values, pd_projected=True, floor=eps)
    clipped = np.maximum(eigvals, eps)
    out = (eigvecs * clipped) @ eigvecs.T
    out = 0.5 * (out + out.T)
    return DependencyMatrix(values=out, pd_projected=True, floor=eps)


def _oas_shrinkage(s: np.ndarray, count: int) -> float:
    p = s.shape[0]
    tr_s = float(np.trace(s))
    tr_s2 = float(np.sum(s * s))  # trace(S @ S) for symmetric S
    num = (1.0 - 2.0 / p) * tr_s2 + tr_s**2
    den = (count + 1.0 - 2.0 / p) * (tr_s2 - tr_s**2 / p)
    if den <= 0.0:
        return 1.0
    return min(1.0, num / den)


def estimate_cov(h: HsicVector, method: str = OAS) -> CovarianceEstimate:
    """Covariance of the dependence vector from its summands.

    The sample covariance of the summand vectors is divided by the summand
    count, so the result estimates the covariance of the estimate itself.
    The OAS variant first shrinks the summand covariance toward
    (tr(S)/p) * Id with the Chen-et-al. shrinkage weight; for p = 1 it
    reduces to the empirical variance.
    """
    if method not in (EMPIRICAL, OAS):
        raise ValueError(f"unknown covariance method: {method!r}")
    summands = np.asarray(h.summands, dtype=float)
    p, count = summands.shape
    if count < 2:
        raise TooFewSummandsError("need at least two summands per feature")
    s = np.atleast_2d(np.cov(summands, ddof=1))
    if method == EMPIRICAL or p == 1:
        return CovarianceEstimate(values=s / count, method=method, sample_count=count)
    rho = _oas_shrinkage(s, count)
    target = np.trace(s) / p * np.eye(p)
    shrunk = (1.0 - rho) * s + rho * target
    return CovarianceEstimate(values=shrunk / count, method=OAS, sample_count=count)
