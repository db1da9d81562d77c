"""Forgetting-rate estimation by low-order moment matching.

The audit set is modeled as an alpha-mixture of the non-member and member
populations.  Its moments are then

    mu_f    = alpha mu_v + (1 - alpha) mu_t
    sigma_f = alpha sigma_v + (1 - alpha) sigma_t
              + (alpha - alpha^2) (mu_v - mu_t)(mu_v - mu_t)^T

and alpha is recovered by minimizing the squared residual

    R^2(alpha) = ||sigma_f - mixture_sigma(alpha)||_F^2
                 + mean_weight * ||mu_f - mixture_mu(alpha)||_2^2

over [0, 1].  With ``mean_weight=0`` only covariances constrain alpha (the
means still enter through the gap outer product); the default of 1.0 lets
first moments constrain it too.  R^2 is a quartic polynomial in alpha, so a
coarse grid plus trisection refinement finds the global minimum robustly,
including in the flat degenerate case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DegeneratePopulationsError,
    DimensionMismatchError,
    ValidationError,
)
from .stats import MomentStats, estimate_moments, mean_gap_outer
from .validation import check_feature_matrix, check_same_features

#: Populations whose mean gap and covariance gap are both below this are
#: treated as indistinguishable.
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class Smia0Config:
    """Solver controls for the moment-matching estimator."""

    grid_step: float = 1e-3
    refine_tol: float = 1e-6
    mean_weight: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.grid_step <= 0.1:
            raise ValidationError(f"grid_step must be in (0, 0.1], got {self.grid_step}")
        if not 0.0 < self.refine_tol <= self.grid_step:
            raise ValidationError(
                f"refine_tol must be in (0, grid_step], got {self.refine_tol}"
            )
        if self.mean_weight < 0.0:
            raise ValidationError(f"mean_weight must be nonnegative, got {self.mean_weight}")


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must be in [0, 1], got {alpha}")
    return alpha


def _check_dims(*stats: MomentStats) -> int:
    dims = {s.dim for s in stats}
    if len(dims) > 1:
        raise DimensionMismatchError(f"moment statistics differ in dimension: {dims}")
    return dims.pop()


def mixture_moments(alpha: float, t: MomentStats, v: MomentStats) -> MomentStats:
    """Moments of an alpha-mixture of the two reference populations."""
    alpha = _check_alpha(alpha)
    _check_dims(t, v)
    delta2 = mean_gap_outer(v.mu, t.mu)
    mu = alpha * v.mu + (1.0 - alpha) * t.mu
    sigma = alpha * v.sigma + (1.0 - alpha) * t.sigma + (alpha - alpha**2) * delta2
    return MomentStats(mu=mu, sigma=sigma, n=t.n + v.n)


def residual(
    alpha: float,
    t: MomentStats,
    v: MomentStats,
    f: MomentStats,
    mean_weight: float = 1.0,
) -> float:
    """Squared moment-matching residual R^2 at a candidate alpha."""
    alpha = _check_alpha(alpha)
    return float(
        _residual_batch(np.array([alpha]), t, v, f, mean_weight)[0]
    )


def _residual_batch(
    alphas: np.ndarray,
    t: MomentStats,
    v: MomentStats,
    f: MomentStats,
    mean_weight: float,
) -> np.ndarray:
    """Vectorized R^2 over a batch of alphas."""
    _check_dims(t, v, f)
    delta2 = mean_gap_outer(v.mu, t.mu)
    a = alphas[:, None, None]
    mix_sigma = a * v.sigma + (1.0 - a) * t.sigma + (a - a**2) * delta2
    r = np.sum((f.sigma - mix_sigma) ** 2, axis=(1, 2))
    if mean_weight > 0.0:
        am = alphas[:, None]
        mix_mu = am * v.mu + (1.0 - am) * t.mu
        r = r + mean_weight * np.sum((f.mu - mix_mu) ** 2, axis=1)
    return r


def _check_identifiable(t: MomentStats, v: MomentStats) -> None:
    mean_gap = float(np.linalg.norm(v.mu - t.mu))
    cov_gap = float(np.linalg.norm(v.sigma - t.sigma))
    if mean_gap < DEGENERACY_TOL and cov_gap < DEGENERACY_TOL:
        raise DegeneratePopulationsError(
            "member and non-member moments coincide; alpha is unidentifiable"
        )


def solve_alpha(
    t: MomentStats,
    v: MomentStats,
    f: MomentStats,
    config: Smia0Config | None = None,
) -> tuple[float, float]:
    """Minimize R^2 over [0, 1]; returns ``(alpha_hat, residual_at_opt)``.

    Coarse grid at ``grid_step``, then trisection refinement around the best
    grid point until the bracket width drops below ``refine_tol``.  Ties
    break toward the smaller alpha so the audit never over-claims
    forgetting.
    """
    if config is None:
        config = Smia0Config()
    _check_identifiable(t, v)
    n_cells = max(1, round(1.0 / config.grid_step))
    grid = np.linspace(0.0, 1.0, n_cells + 1)
    values = _residual_batch(grid, t, v, f, config.mean_weight)
    best = int(np.argmin(values))  # first minimum = smallest alpha on ties
    lo = grid[max(0, best - 1)]
    hi = grid[min(len(grid) - 1, best + 1)]
    while hi - lo > config.refine_tol:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        r1, r2 = _residual_batch(np.array([m1, m2]), t, v, f, config.mean_weight)
        if r1 <= r2:
            hi = m2
        else:
            lo = m1
    # Evaluate the bracket bounds too so boundary optima come back as exact
    # 0.0 or 1.0 rather than half a tolerance inside.
    candidates = np.array([lo, (lo + hi) / 2.0, hi])
    cand_res = _residual_batch(candidates, t, v, f, config.mean_weight)
    pick = int(np.argmin(cand_res))  # first minimum = smallest alpha on ties
    return float(candidates[pick]), float(cand_res[pick])


def smia0_point_estimate(x_t, x_v, x_f, config: Smia0Config | None = None) -> float:
    """Single-pass moment-matching forgetting-rate estimate.

    Estimates moments of the three sample matrices and solves for alpha.
    This is the per-group body handed to the bootstrap engine.
    """
    x_t = check_feature_matrix(x_t, "x_t")
    x_v = check_feature_matrix(x_v, "x_v")
    x_f = check_feature_matrix(x_f, "x_f")
    check_same_features(x_t, x_v, x_f, names=("x_t", "x_v", "x_f"))
    alpha, _ = solve_alpha(
        estimate_moments(x_t), estimate_moments(x_v), estimate_moments(x_f), config
    )
    return alpha
