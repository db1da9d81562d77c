"""Synthetic Gaussian populations and known-alpha mixtures.

These generators are the ground truth behind every known-alpha test: a
mixture built with :func:`gen_mixture` has an exactly reconstructable
member/non-member composition, so estimator output can be checked against
the realized mixing fraction rather than an asymptotic claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, NotPSDError, ValidationError
from .validation import check_feature_matrix, check_positive_int, check_seed

#: Diagonal jitter added when a covariance factorization fails outright.
CHOLESKY_JITTER = 1e-10


@dataclass(frozen=True)
class GaussianPopulationSpec:
    """Mean, covariance, sample count, and seed for one population."""

    mu: np.ndarray
    sigma: np.ndarray
    n: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float).ravel())
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float))
        d = self.mu.shape[0]
        if self.sigma.shape != (d, d):
            raise DimensionMismatchError(
                f"sigma must be {d}x{d} to match mu, got {self.sigma.shape}"
            )
        if np.abs(self.sigma - self.sigma.T).max() > 1e-12:
            raise ValidationError("sigma must be symmetric within 1e-12")
        check_positive_int(self.n, "n")
        check_seed(self.seed)


def gen_gaussian(spec: GaussianPopulationSpec) -> np.ndarray:
    """Draw ``n`` i.i.d. samples from N(mu, sigma) via Cholesky.

    Singular covariances get a one-shot 1e-10 diagonal jitter; if the
    factorization still fails the matrix is genuinely indefinite and
    :class:`NotPSDError` is raised.  Deterministic given the seed.
    """
    try:
        chol = np.linalg.cholesky(spec.sigma)
    except np.linalg.LinAlgError:
        try:
            chol = np.linalg.cholesky(
                spec.sigma + CHOLESKY_JITTER * np.eye(spec.sigma.shape[0])
            )
        except np.linalg.LinAlgError as exc:
            raise NotPSDError("covariance is not positive semidefinite") from exc
    rng = np.random.default_rng(spec.seed)
    z = rng.standard_normal((spec.n, spec.mu.shape[0]))
    return spec.mu + z @ chol.T


def gen_mixture(
    pool_t,
    pool_v,
    alpha: float,
    n: int,
    seed: int,
) -> tuple[np.ndarray, tuple[int, int]]:
    """Compose an audit set by mixing draws from two pools.

    ``round(alpha * n)`` rows (round-half-up, so the true fraction is exactly
    reconstructable from ``n`` and ``alpha``) come from ``pool_v`` and the
    rest from ``pool_t``, each drawn uniformly with replacement; the combined
    rows are then shuffled.  Returns the matrix and the realized
    ``(n_from_t, n_from_v)`` counts.
    """
    pool_t = check_feature_matrix(pool_t, "pool_t")
    pool_v = check_feature_matrix(pool_v, "pool_v")
    if pool_t.shape[1] != pool_v.shape[1]:
        raise DimensionMismatchError(
            f"pools differ in dimension: {pool_t.shape[1]} vs {pool_v.shape[1]}"
        )
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must be in [0, 1], got {alpha}")
    check_positive_int(n, "n")
    check_seed(seed)
    n_from_v = int(math.floor(alpha * n + 0.5))
    n_from_t = n - n_from_v
    rng = np.random.default_rng(seed)
    parts = []
    if n_from_t:
        parts.append(pool_t[rng.integers(0, pool_t.shape[0], size=n_from_t)])
    if n_from_v:
        parts.append(pool_v[rng.integers(0, pool_v.shape[0], size=n_from_v)])
    x_f = np.vstack(parts)
    return x_f[rng.permutation(n)], (n_from_t, n_from_v)
