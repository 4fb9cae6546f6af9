"""Gram matrices for Gaussian and normalized-delta kernels, bandwidths, centering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import AllIdenticalError, NonFiniteError

GAUSSIAN = "gaussian"
NORMALIZED_DELTA = "delta"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice for one variable.

    ``bandwidth=None`` on a Gaussian kernel means: apply the median heuristic
    to the sample the Gram matrix is built on. The delta kernel carries no
    bandwidth.
    """

    kind: str = GAUSSIAN
    bandwidth: float | None = None

    def __post_init__(self):
        if self.kind not in (GAUSSIAN, NORMALIZED_DELTA):
            raise ValueError(f"unknown kernel kind: {self.kind!r}")
        if self.kind == NORMALIZED_DELTA and self.bandwidth is not None:
            raise ValueError("delta kernel does not take a bandwidth")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")


@dataclass(frozen=True)
class GramMatrix:
    """An n-by-n kernel matrix plus a flag recording whether it was centered."""

    values: np.ndarray
    centered: bool = False

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _as_2d(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return x


def median_bandwidth(samples) -> float:
    """Median of all pairwise Euclidean distances of the sample.

    The returned value is used as sigma in the Gaussian kernel. An even
    number of distances yields the average of the two middle ones. If the
    median is zero but some distances are positive, the smallest positive
    distance is used instead so that the bandwidth stays valid.
    """
    x = _as_2d(samples)
    if x.shape[0] < 2:
        raise ValueError("need at least two samples for the median heuristic")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("samples contain NaN or inf")
    dists = pdist(x)
    med = float(np.median(dists))
    if med > 0.0:
        return med
    positive = dists[dists > 0.0]
    if positive.size == 0:
        raise AllIdenticalError("all samples identical; bandwidth undefined")
    return float(positive.min())


def gram(samples, spec: KernelSpec) -> GramMatrix:
    """Build the uncentered Gram matrix of a sample under the given kernel.

    Gaussian: G_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)) with sigma either
    explicit or the median heuristic of this sample. Normalized delta:
    G_ij = 1/n_c when both labels equal c, with n_c counted in this sample.
    """
    if spec.kind == GAUSSIAN:
        x = _as_2d(samples)
        if not np.all(np.isfinite(x)):
            raise NonFiniteError("samples contain NaN or inf")
        sigma = spec.bandwidth if spec.bandwidth is not None else median_bandwidth(x)
        d2 = squareform(pdist(x, metric="sqeuclidean"), checks=False)
        values = np.exp(-d2 / (2.0 * sigma * sigma))
        return GramMatrix(values=values, centered=False)

    labels = np.asarray(samples)
    if labels.ndim != 1:
        labels = labels.reshape(labels.shape[0])
    if labels.dtype.kind == "f" and not np.all(np.isfinite(labels)):
        raise NonFiniteError("labels contain NaN or inf")
    _, codes, counts = np.unique(labels, return_inverse=True, return_counts=True)
    eq = codes[:, None] == codes[None, :]
    values = np.where(eq, 1.0 / counts[codes][:, None], 0.0)
    return GramMatrix(values=values, centered=False)


def center(g: GramMatrix) -> GramMatrix:
    """Double-center a Gram matrix: G -> Gamma G Gamma with Gamma = Id - (1/n) 1 1^T."""
    v = g.values
    row = v.mean(axis=1, keepdims=True)
    col = v.mean(axis=0, keepdims=True)
    total = v.mean()
    return GramMatrix(values=v - row - col + total, centered=True)
