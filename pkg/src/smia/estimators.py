"""Scikit-learn style auditors wrapping the three point estimators.

Usage follows the usual estimator protocol: construct with hyperparameters,
``fit`` on the member and non-member reference sets, then either
``predict_alpha(X)`` for a single point estimate of the forgetting rate of
an audit set ``X``, or ``audit(X)`` for the full bootstrap protocol with
confidence interval and report.

    >>> auditor = Smia0Auditor(k=200, seed=7).fit(members, nonmembers)
    >>> report = auditor.audit(pending)
    >>> report.alpha_p50

All auditors are ``get_params``/``set_params``/``clone`` compatible, so they
compose with model-selection tooling.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .bootstrap import (
    MAX_FAILED_FRACTION,
    BootstrapConfig,
    group_rngs,
    percentile_summary,
    resample_indices,
    run_bootstrap_audit,
)
from .exceptions import TooManyFailedGroupsError, ValidationError
from .io import AuditReport
from .kernels import (
    EmbeddingGeometry,
    KernelSpec,
    embedding_gap_inner,
    embedding_gap_norm2,
    gram_matrix,
    resolve_kernel,
    smia_m_alpha,
)
from .moment import Smia0Config, smia0_point_estimate, solve_alpha
from .stats import estimate_moments, filter_outliers
from .transport import (
    SinkhornConfig,
    cost_matrix,
    default_epsilon,
    sinkhorn,
    smia_w_point_estimate,
)
from .validation import check_feature_matrix, check_same_features


class BaseAuditor(BaseEstimator):
    """Shared fit/filter/bootstrap plumbing for the forgetting-rate auditors."""

    method: str  # report tag, set by subclasses

    def fit(self, members, nonmembers) -> "BaseAuditor":
        """Store the member and non-member reference feature matrices."""
        members = check_feature_matrix(members, "members")
        nonmembers = check_feature_matrix(nonmembers, "nonmembers")
        check_same_features(members, nonmembers, names=("members", "nonmembers"))
        self.members_ = members
        self.nonmembers_ = nonmembers
        self.n_features_in_ = members.shape[1]
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "members_"):
            raise ValidationError("auditor is not fitted; call fit(members, nonmembers)")

    def _check_audit_matrix(self, x) -> np.ndarray:
        self._check_fitted()
        x = check_feature_matrix(x, "X")
        check_same_features(self.members_, x, names=("members", "X"))
        return x

    def predict_alpha(self, x) -> float:
        """Single-pass forgetting-rate point estimate for an audit set."""
        x = self._check_audit_matrix(x)
        return self._point_estimate(self.members_, self.nonmembers_, x)

    def _filtered_sets(self, x):
        """Apply outlier exclusion against the pooled reference moments."""
        if not self.outlier_filter:
            return self.members_, self.nonmembers_, x, {}
        ref = estimate_moments(np.vstack([self.members_, self.nonmembers_]))
        x_t, rm_t = filter_outliers(self.members_, ref, self.z_threshold)
        x_v, rm_v = filter_outliers(self.nonmembers_, ref, self.z_threshold)
        x_f, rm_f = filter_outliers(x, ref, self.z_threshold)
        removed = {
            "removed_member": float(rm_t.size),
            "removed_nonmember": float(rm_v.size),
            "removed_audit": float(rm_f.size),
            "z_threshold": float(self.z_threshold),
        }
        return x_t, x_v, x_f, removed

    def audit(self, x) -> AuditReport:
        """Full protocol: outlier exclusion, bootstrap, percentile report."""
        x = self._check_audit_matrix(x)
        x_t, x_v, x_f, removed = self._filtered_sets(x)
        config = BootstrapConfig(
            k=self.k, seed=self.seed, resample_fraction=self.resample_fraction
        )
        diag = dict(removed)
        diag.update(self._point_diagnostics(x_t, x_v, x_f))
        return self._run_audit(x_t, x_v, x_f, config, diag)

    # Subclass hooks -------------------------------------------------------

    def _point_estimate(self, x_t, x_v, x_f) -> float:
        raise NotImplementedError

    def _point_diagnostics(self, x_t, x_v, x_f) -> dict[str, float]:
        return {}

    def _run_audit(self, x_t, x_v, x_f, config, diag) -> AuditReport:
        return run_bootstrap_audit(
            self._point_estimate,
            x_t,
            x_v,
            x_f,
            config,
            method=self.method,
            diagnostics=diag,
            threads=self.threads,
        )


class Smia0Auditor(BaseAuditor):
    """Forgetting-rate auditor matching first and second moments.

    Parameters mirror the grid/trisection solver: ``grid_step`` is the
    coarse grid spacing on [0, 1], ``refine_tol`` the final bracket width,
    and ``mean_weight`` the weight of the mean residual next to the
    covariance Frobenius term (0 disables it).
    """

    method = "smia0"

    def __init__(
        self,
        grid_step: float = 1e-3,
        refine_tol: float = 1e-6,
        mean_weight: float = 1.0,
        outlier_filter: bool = True,
        z_threshold: float = 6.0,
        k: int = 200,
        seed: int = 42,
        resample_fraction: float = 1.0,
        threads: int = 1,
    ):
        self.grid_step = grid_step
        self.refine_tol = refine_tol
        self.mean_weight = mean_weight
        self.outlier_filter = outlier_filter
        self.z_threshold = z_threshold
        self.k = k
        self.seed = seed
        self.resample_fraction = resample_fraction
        self.threads = threads

    def _config(self) -> Smia0Config:
        return Smia0Config(
            grid_step=self.grid_step,
            refine_tol=self.refine_tol,
            mean_weight=self.mean_weight,
        )

    def _point_estimate(self, x_t, x_v, x_f) -> float:
        return smia0_point_estimate(x_t, x_v, x_f, self._config())

    def _point_diagnostics(self, x_t, x_v, x_f) -> dict[str, float]:
        alpha, res = solve_alpha(
            estimate_moments(x_t),
            estimate_moments(x_v),
            estimate_moments(x_f),
            self._config(),
        )
        return {
            "alpha_point": alpha,
            "residual_at_opt": res,
            "grid_step": self.grid_step,
            "refine_tol": self.refine_tol,
            "mean_weight": self.mean_weight,
        }


class SmiaMAuditor(BaseAuditor):
    """Forgetting-rate auditor in kernel mean-embedding space.

    ``sigma=None`` resolves the bandwidth by the median heuristic over the
    two reference sets at audit time.  The bootstrap path precomputes the
    Gram blocks once and reweights them by resample multiplicities, which is
    algebraically identical to recomputing embeddings on resampled rows but
    turns each group into six matrix-vector products.
    """

    method = "smia_m"

    def __init__(
        self,
        kernel: str = "rbf",
        sigma: float | None = None,
        poly_c: float = 1.0,
        poly_p: int = 2,
        rq_alpha: float = 1.0,
        max_rows: int = 20_000,
        outlier_filter: bool = True,
        z_threshold: float = 6.0,
        k: int = 200,
        seed: int = 42,
        resample_fraction: float = 1.0,
        threads: int = 1,
    ):
        self.kernel = kernel
        self.sigma = sigma
        self.poly_c = poly_c
        self.poly_p = poly_p
        self.rq_alpha = rq_alpha
        self.max_rows = max_rows
        self.outlier_filter = outlier_filter
        self.z_threshold = z_threshold
        self.k = k
        self.seed = seed
        self.resample_fraction = resample_fraction
        self.threads = threads

    def _spec(self, x_t, x_v) -> KernelSpec:
        return resolve_kernel(
            KernelSpec(
                family=self.kernel,
                sigma=self.sigma,
                c=self.poly_c,
                p=self.poly_p,
                alpha_rq=self.rq_alpha,
            ),
            x_t,
            x_v,
        )

    def _point_estimate(self, x_t, x_v, x_f) -> float:
        spec = self._spec(x_t, x_v)
        return smia_m_alpha(self._geometry_direct(x_t, x_v, x_f, spec))

    def _geometry_direct(self, x_t, x_v, x_f, spec) -> EmbeddingGeometry:
        from .kernels import embedding_geometry

        return embedding_geometry(x_t, x_v, x_f, spec, self.max_rows)

    def _point_diagnostics(self, x_t, x_v, x_f) -> dict[str, float]:
        # Geometry-derived diagnostics are filled in by _run_audit, which
        # already holds the Gram blocks.
        return {
            "poly_c": self.poly_c,
            "poly_p": float(self.poly_p),
            "rq_alpha": self.rq_alpha,
        }

    def _run_audit(self, x_t, x_v, x_f, config, diag) -> AuditReport:
        spec = self._spec(x_t, x_v)
        g_tt = gram_matrix(spec, x_t, x_t, self.max_rows)
        g_vv = gram_matrix(spec, x_v, x_v, self.max_rows)
        g_ff = gram_matrix(spec, x_f, x_f, self.max_rows)
        g_tv = gram_matrix(spec, x_t, x_v, self.max_rows)
        g_tf = gram_matrix(spec, x_t, x_f, self.max_rows)
        g_vf = gram_matrix(spec, x_v, x_f, self.max_rows)

        # Draw all group indices up front (same substreams and draw order as
        # the generic engine), then batch the quadratic forms over groups.
        n_t, n_v, n_f = x_t.shape[0], x_v.shape[0], x_f.shape[0]
        draw = lambda n: max(1, round(config.resample_fraction * n))
        d_t, d_v, d_f = draw(n_t), draw(n_v), draw(n_f)
        w_t = np.empty((config.k, n_t))
        w_v = np.empty((config.k, n_v))
        w_f = np.empty((config.k, n_f))
        for i, rng in enumerate(group_rngs(config.seed, config.k)):
            w_t[i] = np.bincount(resample_indices(n_t, d_t, rng), minlength=n_t)
            w_v[i] = np.bincount(resample_indices(n_v, d_v, rng), minlength=n_v)
            w_f[i] = np.bincount(resample_indices(n_f, d_f, rng), minlength=n_f)
        w_t /= d_t
        w_v /= d_v
        w_f /= d_f

        def quads(block, wa, wb):
            return np.einsum("kn,nk->k", wa, block @ wb.T)

        tt = quads(g_tt, w_t, w_t)
        vv = quads(g_vv, w_v, w_v)
        ff = quads(g_ff, w_f, w_f)
        tv = quads(g_tv, w_t, w_v)
        tf = quads(g_tf, w_t, w_f)
        vf = quads(g_vf, w_v, w_f)
        gap = vv + tt - 2.0 * tv
        ok = gap > 1e-12
        failed = int(config.k - ok.sum())
        if failed > MAX_FAILED_FRACTION * config.k:
            raise TooManyFailedGroupsError(
                f"{failed} of {config.k} bootstrap groups had degenerate "
                f"embeddings (limit is {MAX_FAILED_FRACTION:.0%})"
            )
        inner = vf - tf - tv + tt
        alphas = np.clip(inner[ok] / gap[ok], 0.0, 1.0)
        p5, p50, p95 = percentile_summary(alphas)

        # Full-data geometry (uniform weights) for diagnostics.
        geom = EmbeddingGeometry(
            tt=float(g_tt.mean()),
            vv=float(g_vv.mean()),
            ff=float(g_ff.mean()),
            tv=float(g_tv.mean()),
            tf=float(g_tf.mean()),
            vf=float(g_vf.mean()),
        )
        full_gap = embedding_gap_norm2(geom)
        diagnostics = {
            "failed_groups": float(failed),
            "groups_used": float(int(ok.sum())),
            "resample_fraction": config.resample_fraction,
            "embedding_gap_norm2": full_gap,
        }
        if full_gap > 1e-12:
            diagnostics["alpha_unclamped"] = embedding_gap_inner(geom) / full_gap
        if spec.sigma is not None:
            diagnostics["sigma"] = spec.sigma
        diagnostics.update(diag)
        return AuditReport(
            method=self.method,
            alpha_p5=p5,
            alpha_p50=p50,
            alpha_p95=p95,
            k_bootstrap=config.k,
            seed=config.seed,
            n_member=n_t,
            n_nonmember=n_v,
            n_audit=n_f,
            kernel=spec,
            diagnostics=diagnostics,
        ).validate()


class SmiaWAuditor(BaseAuditor):
    """Forgetting-rate auditor from regularized transport distances.

    ``epsilon=None`` resolves to 5% of the median reference-pair cost at
    audit time; ``wp`` is the cost exponent.  ``mode`` selects the
    distance-ratio mapping (default) or the three-distance polarization
    mapping.
    """

    method = "smia_w"

    def __init__(
        self,
        epsilon: float | None = None,
        wp: int = 2,
        mode: str = "ratio",
        max_iters: int = 1000,
        tol: float = 1e-6,
        log_domain: bool = True,
        outlier_filter: bool = True,
        z_threshold: float = 6.0,
        k: int = 200,
        seed: int = 42,
        resample_fraction: float = 1.0,
        threads: int = 1,
    ):
        self.epsilon = epsilon
        self.wp = wp
        self.mode = mode
        self.max_iters = max_iters
        self.tol = tol
        self.log_domain = log_domain
        self.outlier_filter = outlier_filter
        self.z_threshold = z_threshold
        self.k = k
        self.seed = seed
        self.resample_fraction = resample_fraction
        self.threads = threads

    def _config(self, epsilon: float | None = None) -> SinkhornConfig:
        return SinkhornConfig(
            epsilon=self.epsilon if epsilon is None else epsilon,
            p=self.wp,
            max_iters=self.max_iters,
            tol=self.tol,
            log_domain=self.log_domain,
        )

    def _resolve_epsilon(self, x_t, x_v) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return default_epsilon(cost_matrix(x_v, x_t, self.wp))

    def _point_estimate(self, x_t, x_v, x_f) -> float:
        return smia_w_point_estimate(x_t, x_v, x_f, self._config(), self.mode)

    def _point_diagnostics(self, x_t, x_v, x_f) -> dict[str, float]:
        eps = self._resolve_epsilon(x_t, x_v)
        cfg = self._config(eps)
        n_t, n_v, n_f = x_t.shape[0], x_v.shape[0], x_f.shape[0]
        plan_vt = sinkhorn(
            np.full(n_v, 1 / n_v), np.full(n_t, 1 / n_t), cost_matrix(x_v, x_t, self.wp), cfg
        )
        plan_ft = sinkhorn(
            np.full(n_f, 1 / n_f), np.full(n_t, 1 / n_t), cost_matrix(x_f, x_t, self.wp), cfg
        )
        return {
            "epsilon": eps,
            "wp": float(self.wp),
            "w_nonmember_member": plan_vt.w_eps,
            "w_audit_member": plan_ft.w_eps,
            "sinkhorn_iterations": float(plan_vt.iterations + plan_ft.iterations),
            "max_marginal_violation": max(
                plan_vt.max_marginal_violation, plan_ft.max_marginal_violation
            ),
        }

    def _run_audit(self, x_t, x_v, x_f, config, diag) -> AuditReport:
        # Pin epsilon on the full reference pair so every bootstrap group
        # sees the same regularization scale.
        eps = self._resolve_epsilon(x_t, x_v)
        cfg = self._config(eps)

        def estimate(xt, xv, xf):
            return smia_w_point_estimate(xt, xv, xf, cfg, self.mode)

        return run_bootstrap_audit(
            estimate,
            x_t,
            x_v,
            x_f,
            config,
            method=self.method,
            epsilon=eps,
            diagnostics=diag,
            threads=self.threads,
        )
