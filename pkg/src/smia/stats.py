"""First- and second-moment estimation and outlier exclusion.

Covariances use the divisor-``n`` (population) convention by default.  With
that convention the moments of a pooled sample split into parts ``a`` and
``b`` with weight ``alpha = n_b / (n_a + n_b)`` satisfy the mixture
identities exactly:

    mu    = (1 - alpha) mu_a + alpha mu_b
    sigma = (1 - alpha) sigma_a + alpha sigma_b
            + alpha (1 - alpha) (mu_b - mu_a)(mu_b - mu_a)^T

which makes the mixture model machine-checkable on finite data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    AllRowsRemovedError,
    DimensionMismatchError,
    TooFewSamplesError,
    ValidationError,
)
from .validation import check_feature_matrix, check_in_range, check_vector

#: Variance floor used when standardizing coordinates for outlier scoring.
VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class MomentStats:
    """Mean vector, covariance matrix, and the sample count behind them."""

    mu: np.ndarray
    sigma: np.ndarray
    n: int

    @property
    def dim(self) -> int:
        return self.mu.shape[0]


def estimate_moments(x, ddof: int = 0) -> MomentStats:
    """Column means and covariance of a feature matrix.

    ``ddof=0`` (the default) divides by ``n``; ``ddof=1`` gives the unbiased
    divisor ``n - 1``.  The covariance is symmetrized as ``(S + S^T) / 2`` to
    suppress floating-point asymmetry from the accumulation order.
    """
    x = check_feature_matrix(x, "x")
    n = x.shape[0]
    if ddof not in (0, 1):
        raise ValidationError(f"ddof must be 0 or 1, got {ddof}")
    if n - ddof < 1:
        raise TooFewSamplesError(f"need more than {ddof} rows for ddof={ddof}")
    mu = x.mean(axis=0)
    centered = x - mu
    sigma = centered.T @ centered / (n - ddof)
    sigma = (sigma + sigma.T) / 2.0
    return MomentStats(mu=mu, sigma=sigma, n=n)


def mean_gap_outer(mu_v, mu_t) -> np.ndarray:
    """Outer product of the mean gap: ``(mu_v - mu_t)(mu_v - mu_t)^T``.

    Symmetric, positive semidefinite, and rank at most one.
    """
    mu_v = check_vector(mu_v, "mu_v")
    mu_t = check_vector(mu_t, "mu_t")
    if mu_v.shape != mu_t.shape:
        raise DimensionMismatchError(
            f"mean vectors have lengths {mu_v.size} and {mu_t.size}"
        )
    gap = mu_v - mu_t
    return np.outer(gap, gap)


def filter_outliers(
    x,
    ref: MomentStats,
    z_threshold: float = 6.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Drop rows that deviate wildly from a reference distribution.

    A row is removed when its largest per-coordinate standardized deviation
    ``|x_j - mu_j| / sqrt(sigma_jj + 1e-12)`` exceeds ``z_threshold``.  The
    per-coordinate rule deliberately avoids inverting a possibly singular
    covariance.  Returns the surviving rows in their original order together
    with the removed row indices.  Removing everything is treated as a
    pathological input and raises :class:`AllRowsRemovedError`.
    """
    x = check_feature_matrix(x, "x")
    check_in_range(z_threshold, "z_threshold", low=0.0, low_open=True)
    if ref.n < 2:
        raise TooFewSamplesError("reference moments must come from at least 2 samples")
    if x.shape[1] != ref.dim:
        raise DimensionMismatchError(
            f"x has d={x.shape[1]} but reference moments have d={ref.dim}"
        )
    scale = np.sqrt(np.diag(ref.sigma) + VARIANCE_FLOOR)
    z = np.abs(x - ref.mu) / scale
    removed_mask = z.max(axis=1) > z_threshold
    removed = np.flatnonzero(removed_mask)
    if removed.size == x.shape[0]:
        raise AllRowsRemovedError(
            f"all {x.shape[0]} rows exceed z_threshold={z_threshold}; aborting audit"
        )
    return x[~removed_mask], removed
