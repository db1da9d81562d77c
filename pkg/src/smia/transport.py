"""Entropy-regularized optimal transport and the distance-ratio estimator.

The Sinkhorn-Knopp solver computes a coupling ``gamma`` between two discrete
measures by alternately rescaling the Gibbs kernel ``K = exp(-C / epsilon)``:

    u <- a / (K v),   v <- b / (K^T u),   gamma = diag(u) K diag(v)

and returns the transport cost ``w_eps = sum(gamma * C)`` without the
entropy term.  The log-domain variant iterates the dual potentials with
logsumexp and is immune to the underflow that kills the linear domain at
small epsilon; it is the default.

``exact_ot_small`` is an exhaustive-enumeration oracle for tiny uniform
instances, used to pin down the entropic solver in tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

try:  # optional accelerator for small instances; numpy path is the fallback
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

from .exceptions import (
    DegeneratePopulationsError,
    DimensionMismatchError,
    NonProbabilityWeightsError,
    NumericalUnderflowError,
    ValidationError,
)
from .kernels import _sq_dists
from .validation import check_feature_matrix, check_same_features

#: diag(u) K diag(v) denominators below this floor indicate linear-domain collapse.
UNDERFLOW_FLOOR = 1e-300

#: Fallback regularization when the cost matrix gives no usable scale.
EPSILON_FALLBACK = 1e-3


@dataclass(frozen=True)
class SinkhornConfig:
    """Solver controls for entropy-regularized transport.

    ``epsilon=None`` resolves per cost matrix via :func:`default_epsilon`.
    """

    epsilon: float | None = None
    p: int = 2
    max_iters: int = 1000
    tol: float = 1e-6
    log_domain: bool = True

    def __post_init__(self):
        if self.epsilon is not None and self.epsilon <= 0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.p) != self.p or self.p < 1:
            raise ValidationError(f"cost exponent p must be a positive integer, got {self.p}")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be positive")
        if self.tol <= 0:
            raise ValidationError("tol must be positive")


@dataclass(frozen=True)
class TransportPlan:
    """Converged coupling plus the cost it was computed against."""

    gamma: np.ndarray
    cost: np.ndarray
    w_eps: float
    iterations: int
    max_marginal_violation: float
    epsilon: float
    entropy: float


def cost_matrix(x, y, p: int = 2) -> np.ndarray:
    """Pairwise cost ``C[i, j] = ||x_i - y_j||_2^p``."""
    x = check_feature_matrix(x, "x")
    y = check_feature_matrix(y, "y")
    check_same_features(x, y, names=("x", "y"))
    if int(p) != p or p < 1:
        raise ValidationError(f"cost exponent p must be a positive integer, got {p}")
    sq = _sq_dists(x, y)
    if p == 2:
        return sq
    dist = np.sqrt(sq, out=sq)
    return dist if p == 1 else dist**p


def default_epsilon(c: np.ndarray) -> float:
    """Scale-adaptive regularization: 5% of the median cost entry.

    Falls back to 5% of the mean when the median is zero (point-mass-heavy
    costs) and to a small constant when every entry is zero, where the
    transport cost is zero regardless of epsilon.
    """
    scale = float(np.median(c))
    if scale <= 0.0:
        scale = float(np.mean(c))
    if scale <= 0.0:
        return EPSILON_FALLBACK
    return 0.05 * scale


def _check_weights(w, n: int, name: str) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if w.shape[0] != n:
        raise DimensionMismatchError(
            f"{name} has length {w.shape[0]} but the cost matrix needs {n}"
        )
    if (w < 0).any() or abs(w.sum() - 1.0) > 1e-9:
        raise NonProbabilityWeightsError(
            f"{name} must be nonnegative and sum to 1 within 1e-9"
        )
    return w


def sinkhorn(a, b, c, config: SinkhornConfig | None = None) -> TransportPlan:
    """Solve entropy-regularized transport between discrete measures.

    ``a`` and ``b`` are probability weights over the rows/columns of the
    cost matrix ``c``.  Iteration stops when the worst marginal violation of
    the current coupling drops to ``config.tol`` or after
    ``config.max_iters`` rounds, whichever comes first.
    """
    if config is None:
        config = SinkhornConfig()
    c = np.asarray(c, dtype=float)
    if c.ndim != 2:
        raise ValidationError("cost matrix must be 2-D")
    if not np.isfinite(c).all():
        raise ValidationError("cost matrix must be finite")
    n, m = c.shape
    a = _check_weights(a, n, "a")
    b = _check_weights(b, m, "b")
    eps = config.epsilon if config.epsilon is not None else default_epsilon(c)

    if config.log_domain:
        gamma, iters, viol = _sinkhorn_log(a, b, c, eps, config)
    else:
        gamma, iters, viol = _sinkhorn_linear(a, b, c, eps, config)

    w_eps = float(np.sum(gamma * c))
    with np.errstate(divide="ignore", invalid="ignore"):
        glogg = np.where(gamma > 0.0, gamma * np.log(np.where(gamma > 0, gamma, 1.0)), 0.0)
    return TransportPlan(
        gamma=gamma,
        cost=c,
        w_eps=w_eps,
        iterations=iters,
        max_marginal_violation=viol,
        epsilon=eps,
        entropy=float(glogg.sum()),
    )


def _marginal_violation(gamma, a, b) -> float:
    return float(
        max(
            np.abs(gamma.sum(axis=1) - a).max(),
            np.abs(gamma.sum(axis=0) - b).max(),
        )
    )


def _sinkhorn_linear(a, b, c, eps, config):
    k = np.exp(-c / eps)
    if (k.sum(axis=1) == 0.0).any() or (k.sum(axis=0) == 0.0).any():
        raise NumericalUnderflowError(
            "Gibbs kernel has an all-zero row or column; use log_domain=True "
            "or increase epsilon"
        )
    v = np.ones_like(b)
    u = np.ones_like(a)
    iters = 0
    viol = np.inf
    for iters in range(1, config.max_iters + 1):
        kv = k @ v
        ktu = None
        if (kv < UNDERFLOW_FLOOR).any():
            raise NumericalUnderflowError(
                "scaling denominators collapsed; use log_domain=True or increase epsilon"
            )
        u = a / kv
        ktu = k.T @ u
        if (ktu < UNDERFLOW_FLOOR).any():
            raise NumericalUnderflowError(
                "scaling denominators collapsed; use log_domain=True or increase epsilon"
            )
        v = b / ktu
        gamma = u[:, None] * k * v[None, :]
        viol = _marginal_violation(gamma, a, b)
        if viol <= config.tol:
            break
    return gamma, iters, viol


def _logsumexp(m, axis):
    mx = m.max(axis=axis, keepdims=True)
    out = mx.squeeze(axis) + np.log(np.exp(m - mx).sum(axis=axis))
    return out


#: Instances with at most this many cost entries route to the compiled loop,
#: where per-iteration numpy overhead would otherwise dominate.
SMALL_PROBLEM_SIZE = 4096


def _log_loop_small_py(log_a, log_b, mc, a, b, tol, max_iters):
    """Scalar log-domain loop; same iteration as the vectorized solver.

    Convergence is decided on the directly-summed coupling marginals, so the
    reported violation is authoritative for the returned plan.
    """
    n, m = mc.shape
    phi = np.zeros(n)
    psi = np.zeros(m)
    r = np.zeros(n)
    gamma = np.zeros((n, m))
    viol = np.inf
    iters = 0
    for it in range(max_iters):
        for i in range(n):
            mx = mc[i, 0] + psi[0]
            for j in range(1, m):
                v = mc[i, j] + psi[j]
                if v > mx:
                    mx = v
            s = 0.0
            for j in range(m):
                s += np.exp(mc[i, j] + psi[j] - mx)
            r[i] = mx + np.log(s)
        if it > 0:
            quick = 0.0
            for i in range(n):
                d = abs(np.exp(phi[i] + r[i]) - a[i])
                if d > quick:
                    quick = d
            if quick <= tol:
                viol = _fill_gamma_viol(gamma, phi, psi, mc, a, b)
                if viol <= tol:
                    return gamma, iters, viol
        for i in range(n):
            phi[i] = log_a[i] - r[i]
        for j in range(m):
            mx = mc[0, j] + phi[0]
            for i in range(1, n):
                v = mc[i, j] + phi[i]
                if v > mx:
                    mx = v
            s = 0.0
            for i in range(n):
                s += np.exp(mc[i, j] + phi[i] - mx)
            psi[j] = log_b[j] - (mx + np.log(s))
        iters += 1
    viol = _fill_gamma_viol(gamma, phi, psi, mc, a, b)
    return gamma, iters, viol


def _fill_gamma_viol_py(gamma, phi, psi, mc, a, b):
    n, m = mc.shape
    viol = 0.0
    for i in range(n):
        for j in range(m):
            gamma[i, j] = np.exp(phi[i] + mc[i, j] + psi[j])
    for i in range(n):
        s = 0.0
        for j in range(m):
            s += gamma[i, j]
        d = abs(s - a[i])
        if d > viol:
            viol = d
    for j in range(m):
        s = 0.0
        for i in range(n):
            s += gamma[i, j]
        d = abs(s - b[j])
        if d > viol:
            viol = d
    return viol


if njit is not None:
    _fill_gamma_viol = njit(cache=True)(_fill_gamma_viol_py)
    _log_loop_small = njit(cache=True)(_log_loop_small_py)
else:  # pragma: no cover
    _fill_gamma_viol = _fill_gamma_viol_py
    _log_loop_small = _log_loop_small_py


def _sinkhorn_log(a, b, c, eps, config):
    # Scaled dual potentials phi = f/eps, psi = g/eps against mc = -C/eps,
    # so gamma = exp(phi_i + mc_ij + psi_j).  After each full round the
    # column marginals hold exactly by construction, so the convergence
    # check only needs the row sums — and those reuse the logsumexp of the
    # next phi update, keeping the per-iteration cost at two reductions.
    with np.errstate(divide="ignore"):
        log_a = np.log(a)
        log_b = np.log(b)
    mc = c / -eps
    if c.size <= SMALL_PROBLEM_SIZE:
        return _log_loop_small(log_a, log_b, mc, a, b, config.tol, config.max_iters)
    phi = np.zeros_like(a)
    psi = np.zeros_like(b)
    iters = 0
    for i in range(config.max_iters):
        r = _logsumexp(mc + psi[None, :], axis=1)
        if i > 0 and np.abs(np.exp(phi + r) - a).max() <= config.tol:
            # Confirm against the materialized coupling: its reduction order
            # differs from the logsumexp route by a few ulps.
            gamma = np.exp(phi[:, None] + mc + psi[None, :])
            viol = _marginal_violation(gamma, a, b)
            if viol <= config.tol:
                return gamma, iters, viol
        phi = log_a - r
        psi = log_b - _logsumexp(mc + phi[:, None], axis=0)
        iters += 1
    gamma = np.exp(phi[:, None] + mc + psi[None, :])
    return gamma, iters, _marginal_violation(gamma, a, b)


def exact_ot_small(x, y, p: int = 2) -> float:
    """Exact transport cost between tiny uniform samples by enumeration.

    Uniform weights and equal counts reduce transport to an assignment
    problem: ``(1/n) min over permutations of sum_i ||x_i - y_pi(i)||^p``.
    Enumeration is deliberate (this is a test oracle), hence the ``n <= 8``
    cap.
    """
    x = check_feature_matrix(x, "x")
    y = check_feature_matrix(y, "y")
    check_same_features(x, y, names=("x", "y"))
    n, m = x.shape[0], y.shape[0]
    if n != m:
        raise ValidationError(f"exact oracle needs equal sizes, got {n} and {m}")
    if n > 8:
        raise ValidationError(f"exact oracle is capped at n=8, got {n}")
    c = cost_matrix(x, y, p)
    best = min(
        sum(c[i, j] for i, j in enumerate(perm))
        for perm in itertools.permutations(range(n))
    )
    return float(best) / n


def smia_w_point_estimate(
    x_t,
    x_v,
    x_f,
    config: SinkhornConfig | None = None,
    mode: str = "ratio",
) -> float:
    """Forgetting rate from regularized transport distances.

    ``mode="ratio"`` (default) returns ``W(f, t) / W(v, t)`` clamped to
    [0, 1]: when the audit embedding lies on the segment between the two
    reference populations, its distance from the member side scales linearly
    with the mixing weight.  ``mode="polarization"`` additionally computes
    ``W(f, v)`` and recovers the inner product ``<A, B>`` from the three
    squared distances via the polarization identity, with
    ``alpha = <A, B> / ||B||^2``.

    A single epsilon, resolved from the reference-pair cost matrix, is used
    for every distance so all three live on the same regularization scale.
    """
    if mode not in ("ratio", "polarization"):
        raise ValidationError(f"mode must be 'ratio' or 'polarization', got {mode!r}")
    if config is None:
        config = SinkhornConfig()
    x_t = check_feature_matrix(x_t, "x_t")
    x_v = check_feature_matrix(x_v, "x_v")
    x_f = check_feature_matrix(x_f, "x_f")
    check_same_features(x_t, x_v, x_f, names=("x_t", "x_v", "x_f"))

    def uniform(k: int) -> np.ndarray:
        return np.full(k, 1.0 / k)

    c_vt = cost_matrix(x_v, x_t, config.p)
    if config.epsilon is None:
        config = SinkhornConfig(
            epsilon=default_epsilon(c_vt),
            p=config.p,
            max_iters=config.max_iters,
            tol=config.tol,
            log_domain=config.log_domain,
        )
    w_vt = sinkhorn(uniform(x_v.shape[0]), uniform(x_t.shape[0]), c_vt, config).w_eps
    if w_vt < 1e-9:
        raise DegeneratePopulationsError(
            "transport distance between member and non-member sets is zero; "
            "alpha is unidentifiable"
        )
    c_ft = cost_matrix(x_f, x_t, config.p)
    w_ft = sinkhorn(uniform(x_f.shape[0]), uniform(x_t.shape[0]), c_ft, config).w_eps
    if mode == "ratio":
        alpha = w_ft / w_vt
    else:
        c_fv = cost_matrix(x_f, x_v, config.p)
        w_fv = sinkhorn(uniform(x_f.shape[0]), uniform(x_v.shape[0]), c_fv, config).w_eps
        inner = (w_ft**2 + w_vt**2 - w_fv**2) / 2.0
        alpha = inner / w_vt**2
    return float(min(1.0, max(0.0, alpha)))
