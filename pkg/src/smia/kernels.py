"""Kernel functions, mean-embedding geometry, and MMD estimators.

Four kernel families are supported:

* ``rbf``: ``k(x, y) = exp(-||x - y||^2 / (2 sigma^2))``
* ``laplacian``: ``k(x, y) = exp(-||x - y||_1 / sigma)``
* ``polynomial``: ``k(x, y) = (x . y + c)^p``
* ``rational_quadratic``: ``k(x, y) = (1 + ||x - y||^2 / (2 alpha_rq sigma^2))^(-alpha_rq)``

The squared maximum mean discrepancy between samples ``X`` and ``Y`` is the
RKHS distance between their empirical mean embeddings and expands into three
Gram-block averages:

    MMD^2(X, Y) = mean(k(X, X)) + mean(k(Y, Y)) - 2 mean(k(X, Y))

The forgetting-rate estimator based on these embeddings reduces to a convex
quadratic in alpha whose constrained minimizer has a closed form; see
:func:`smia_m_alpha`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .exceptions import (
    AllPointsIdenticalError,
    DegenerateEmbeddingsError,
    DimensionMismatchError,
    TooFewSamplesError,
    ValidationError,
)
from .validation import check_feature_matrix, check_same_features

KERNEL_FAMILIES = ("rbf", "laplacian", "polynomial", "rational_quadratic")

#: Reject Gram computations beyond this many rows per matrix (O(n^2) memory).
DEFAULT_MAX_GRAM_ROWS = 20_000


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family tag plus its parameters.

    Only the parameters relevant to ``family`` are consulted; the rest are
    ignored.  ``sigma=None`` means "resolve by the median heuristic" and is
    accepted here so that specs can be built before data is seen.
    """

    family: str = "rbf"
    sigma: float | None = None
    c: float = 1.0
    p: int = 2
    alpha_rq: float = 1.0

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ValidationError(
                f"unknown kernel family {self.family!r}; expected one of {KERNEL_FAMILIES}"
            )
        if self.family == "polynomial":
            if self.c < 0:
                raise ValidationError("polynomial bias c must be nonnegative")
            if int(self.p) != self.p or self.p < 1:
                raise ValidationError("polynomial degree p must be a positive integer")
        elif self.family == "rational_quadratic" and self.alpha_rq <= 0:
            raise ValidationError("alpha_rq must be positive")
        if self.sigma is not None and self.sigma <= 0:
            raise ValidationError("sigma must be positive when given")

    @property
    def needs_sigma(self) -> bool:
        return self.family in ("rbf", "laplacian", "rational_quadratic")

    def with_sigma(self, sigma: float) -> "KernelSpec":
        return dataclasses.replace(self, sigma=sigma)

    def _check_ready(self) -> None:
        if self.needs_sigma and self.sigma is None:
            raise ValidationError(
                f"kernel {self.family!r} needs sigma; set it or use the median heuristic"
            )


def _sq_dists(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, clipped at zero.

    Built in place on the Gram product to keep large-n memory traffic down.
    """
    sq = x @ y.T
    sq *= -2.0
    sq += np.einsum("ij,ij->i", x, x)[:, None]
    sq += np.einsum("ij,ij->i", y, y)[None, :]
    np.maximum(sq, 0.0, out=sq)
    return sq


def gram_matrix(
    spec: KernelSpec,
    x,
    y,
    max_rows: int = DEFAULT_MAX_GRAM_ROWS,
) -> np.ndarray:
    """Dense kernel Gram matrix ``K[i, j] = k(x_i, y_j)``.

    Inputs larger than ``max_rows`` rows are rejected outright rather than
    silently subsampled; raise the cap explicitly if you mean it.
    """
    x = check_feature_matrix(x, "x")
    y = check_feature_matrix(y, "y")
    check_same_features(x, y, names=("x", "y"))
    if x.shape[0] > max_rows or y.shape[0] > max_rows:
        raise ValidationError(
            f"Gram computation over {x.shape[0]}x{y.shape[0]} rows exceeds the "
            f"cap of {max_rows}; pass max_rows explicitly to override"
        )
    spec._check_ready()
    if spec.family == "rbf":
        g = _sq_dists(x, y)
        g /= -2.0 * spec.sigma**2
        return np.exp(g, out=g)
    if spec.family == "laplacian":
        g = cdist(x, y, "cityblock")
        g /= -spec.sigma
        return np.exp(g, out=g)
    if spec.family == "polynomial":
        return (x @ y.T + spec.c) ** int(spec.p)
    # rational quadratic
    g = _sq_dists(x, y)
    g /= 2.0 * spec.alpha_rq * spec.sigma**2
    g += 1.0
    return g ** (-spec.alpha_rq)


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate the kernel on a single pair of vectors."""
    xv = np.asarray(x, dtype=float).ravel()
    yv = np.asarray(y, dtype=float).ravel()
    if xv.shape != yv.shape:
        raise DimensionMismatchError(
            f"vectors have lengths {xv.size} and {yv.size}"
        )
    return float(gram_matrix(spec, xv.reshape(1, -1), yv.reshape(1, -1))[0, 0])


def median_heuristic(x, y) -> float:
    """Bandwidth as the median pairwise Euclidean distance of ``x`` and ``y`` pooled.

    Over all unordered pairs ``i < j`` of the concatenation.  For an even
    number of pairs the lower of the two middle values is taken, so the
    result is always an observed distance and the rule is deterministic.
    """
    x = check_feature_matrix(x, "x")
    y = check_feature_matrix(y, "y")
    check_same_features(x, y, names=("x", "y"))
    z = np.vstack([x, y])
    if z.shape[0] < 2:
        raise TooFewSamplesError("median heuristic needs at least two points")
    dists = pdist(z)  # condensed vector of the n(n-1)/2 pairs i < j
    k = (dists.size - 1) // 2
    dists.partition(k)  # in place; pdist returned a fresh buffer
    sigma = float(dists[k])
    if sigma <= 0.0:
        raise AllPointsIdenticalError(
            "median pairwise distance is zero; supply sigma explicitly"
        )
    return sigma


def _cross_mean(spec: KernelSpec, x, y, max_rows: int) -> float:
    """Mean of the cross Gram block, in a canonical argument orientation.

    Summation order would otherwise differ between ``(x, y)`` and ``(y, x)``
    by float reassociation, breaking the exact-symmetry guarantee of the MMD
    estimators.
    """
    if (x.shape[0], x.tobytes()) <= (y.shape[0], y.tobytes()):
        return float(gram_matrix(spec, x, y, max_rows).mean())
    return float(gram_matrix(spec, y, x, max_rows).mean())


def mmd2_biased(x, y, spec: KernelSpec, max_rows: int = DEFAULT_MAX_GRAM_ROWS) -> float:
    """Biased (V-statistic) squared MMD estimate; nonnegative by construction.

    Values in ``(-1e-12, 0)`` arising from float noise are clamped to zero.
    Exactly symmetric in its two sample arguments.
    """
    x = check_feature_matrix(x, "x")
    y = check_feature_matrix(y, "y")
    kxx = gram_matrix(spec, x, x, max_rows)
    kyy = gram_matrix(spec, y, y, max_rows)
    val = float(kxx.mean() + kyy.mean() - 2.0 * _cross_mean(spec, x, y, max_rows))
    if -1e-12 < val < 0.0:
        val = 0.0
    return val


def mmd2_unbiased(x, y, spec: KernelSpec, max_rows: int = DEFAULT_MAX_GRAM_ROWS) -> float:
    """Unbiased (U-statistic) squared MMD estimate; may legitimately be negative.

    Diagonal Gram terms are excluded, which requires at least two samples on
    each side.
    """
    x = check_feature_matrix(x, "x")
    y = check_feature_matrix(y, "y")
    n, m = x.shape[0], y.shape[0]
    if n < 2 or m < 2:
        raise TooFewSamplesError("unbiased MMD needs at least two samples per set")
    kxx = gram_matrix(spec, x, x, max_rows)
    kyy = gram_matrix(spec, y, y, max_rows)
    term_x = (kxx.sum() - np.trace(kxx)) / (n * (n - 1))
    term_y = (kyy.sum() - np.trace(kyy)) / (m * (m - 1))
    return float(term_x + term_y - 2.0 * _cross_mean(spec, x, y, max_rows))


@dataclass(frozen=True)
class EmbeddingGeometry:
    """Pairwise inner products of the three empirical mean embeddings.

    ``tt, vv, ff`` are squared embedding norms for the member, non-member,
    and audit sets; ``tv, tf, vf`` are the cross inner products.  Each block
    is the mean of the corresponding Gram matrix.
    """

    tt: float
    vv: float
    ff: float
    tv: float
    tf: float
    vf: float


def embedding_geometry(
    x_t,
    x_v,
    x_f,
    spec: KernelSpec,
    max_rows: int = DEFAULT_MAX_GRAM_ROWS,
) -> EmbeddingGeometry:
    """Mean-embedding inner products for member/non-member/audit samples."""
    x_t = check_feature_matrix(x_t, "x_t")
    x_v = check_feature_matrix(x_v, "x_v")
    x_f = check_feature_matrix(x_f, "x_f")
    check_same_features(x_t, x_v, x_f, names=("x_t", "x_v", "x_f"))
    return EmbeddingGeometry(
        tt=float(gram_matrix(spec, x_t, x_t, max_rows).mean()),
        vv=float(gram_matrix(spec, x_v, x_v, max_rows).mean()),
        ff=float(gram_matrix(spec, x_f, x_f, max_rows).mean()),
        tv=float(gram_matrix(spec, x_t, x_v, max_rows).mean()),
        tf=float(gram_matrix(spec, x_t, x_f, max_rows).mean()),
        vf=float(gram_matrix(spec, x_v, x_f, max_rows).mean()),
    )


def embedding_gap_norm2(geom: EmbeddingGeometry) -> float:
    """``||mu_v - mu_t||^2`` in the RKHS, from the Gram blocks."""
    return geom.vv + geom.tt - 2.0 * geom.tv


def embedding_gap_inner(geom: EmbeddingGeometry) -> float:
    """``<mu_f - mu_t, mu_v - mu_t>`` in the RKHS, from the Gram blocks."""
    return geom.vf - geom.tf - geom.tv + geom.tt


def smia_m_alpha(geom: EmbeddingGeometry) -> float:
    """Forgetting rate minimizing ``||mu_f - alpha mu_v - (1-alpha) mu_t||^2``.

    The objective is a convex quadratic in alpha with leading coefficient
    ``D = ||mu_v - mu_t||^2``, so the unconstrained minimizer ``T / D`` with
    ``T = <mu_f - mu_t, mu_v - mu_t>`` clamped to ``[0, 1]`` is the exact
    constrained optimum.  Raises :class:`DegenerateEmbeddingsError` when the
    reference embeddings coincide (``D <= 1e-12``).
    """
    d = embedding_gap_norm2(geom)
    if d <= 1e-12:
        raise DegenerateEmbeddingsError(
            "member and non-member embeddings coincide; alpha is unidentifiable"
        )
    alpha = embedding_gap_inner(geom) / d
    return float(min(1.0, max(0.0, alpha)))


def resolve_kernel(spec: KernelSpec | None, x_t, x_v) -> KernelSpec:
    """Fill in a missing bandwidth from the reference sets.

    The median heuristic is computed over the member and non-member sets
    only, never the audit set, so the bandwidth cannot leak audit-set
    information.
    """
    if spec is None:
        spec = KernelSpec()
    if spec.needs_sigma and spec.sigma is None:
        spec = spec.with_sigma(median_heuristic(x_t, x_v))
    return spec


def smia_m_point_estimate(
    x_t,
    x_v,
    x_f,
    spec: KernelSpec | None = None,
    max_rows: int = DEFAULT_MAX_GRAM_ROWS,
) -> float:
    """Single-pass kernel-embedding forgetting-rate estimate.

    Defaults to an RBF kernel with median-heuristic bandwidth over the two
    reference sets.  This is the per-group body handed to the bootstrap
    engine.
    """
    spec = resolve_kernel(spec, x_t, x_v)
    return smia_m_alpha(embedding_geometry(x_t, x_v, x_f, spec, max_rows))
