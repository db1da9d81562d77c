"""Bootstrap resampling loop, percentile summaries, and report assembly.

Each of the K groups resamples all three sample sets with replacement and
re-runs the point estimator; the 5th/50th/95th nearest-rank percentiles of
the resulting alpha values form the reported interval.  Group randomness is
drawn from index-derived substreams of the master seed, so reports are
identical regardless of execution order or worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import (
    DegeneratePopulationsError,
    TooManyFailedGroupsError,
    ValidationError,
)
from .io import AuditReport
from .kernels import KernelSpec
from .validation import check_feature_matrix, check_positive_int, check_seed

#: Abort the audit when more than this fraction of groups fail.
MAX_FAILED_FRACTION = 0.2


@dataclass(frozen=True)
class BootstrapConfig:
    """Number of groups, master seed, and per-group resample fraction."""

    k: int = 200
    seed: int = 42
    resample_fraction: float = 1.0

    def __post_init__(self):
        check_positive_int(self.k, "k")
        check_seed(self.seed)
        if not 0.0 < self.resample_fraction <= 1.0:
            raise ValidationError(
                f"resample_fraction must be in (0, 1], got {self.resample_fraction}"
            )


def group_rngs(seed: int, k: int) -> list[np.random.Generator]:
    """One independent generator per bootstrap group, derived by index."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(k)]


def resample_indices(n: int, n_draw: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform with-replacement row indices, in draw order."""
    return rng.integers(0, n, size=n_draw)


def bootstrap_resample(x, n_draw: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n_draw`` rows i.i.d. with replacement from ``x``."""
    x = check_feature_matrix(x, "x")
    check_positive_int(n_draw, "n_draw")
    return x[resample_indices(x.shape[0], n_draw, rng)]


def percentile_summary(alphas) -> tuple[float, float, float]:
    """Nearest-rank 5th/50th/95th percentiles of a nonempty list.

    Sorted ascending, the q-percentile is the value at 0-based index
    ``ceil(q * K) - 1``, clamped to the valid range.  No interpolation, so
    every reported value is one that actually occurred.
    """
    values = np.sort(np.asarray(alphas, dtype=float))
    k = values.size
    if k == 0:
        raise ValidationError("percentile summary of an empty list")

    def rank(q: float) -> float:
        idx = int(np.ceil(q * k)) - 1
        return float(values[min(max(idx, 0), k - 1)])

    return rank(0.05), rank(0.50), rank(0.95)


def _draw_sizes(n: int, fraction: float) -> int:
    return max(1, round(fraction * n))


def run_bootstrap_audit(
    estimator: Callable[[np.ndarray, np.ndarray, np.ndarray], float] | None,
    x_t,
    x_v,
    x_f,
    config: BootstrapConfig | None = None,
    *,
    method: str = "smia0",
    kernel: KernelSpec | None = None,
    epsilon: float | None = None,
    diagnostics: dict[str, float] | None = None,
    threads: int = 1,
    index_estimator: Callable[[np.ndarray, np.ndarray, np.ndarray], float] | None = None,
) -> AuditReport:
    """Run K resampled estimates and assemble the audit report.

    ``estimator`` maps resampled ``(x_t, x_v, x_f)`` matrices to an alpha in
    [0, 1].  Groups where it raises :class:`DegeneratePopulationsError` are
    excluded and counted in the diagnostics; if more than 20% of groups fail
    the whole audit fails.  ``threads`` only parallelizes the groups — the
    per-group substreams make the report independent of scheduling.

    ``index_estimator``, when given, replaces ``estimator`` and receives the
    drawn row-index arrays instead of materialized matrices.  The index
    draws are identical either way, so estimators that can exploit resample
    multiplicities (e.g. precomputed Gram blocks) stay on the same
    randomness contract.
    """
    if config is None:
        config = BootstrapConfig()
    if (estimator is None) == (index_estimator is None):
        raise ValidationError("exactly one of estimator/index_estimator is required")
    x_t = check_feature_matrix(x_t, "x_t")
    x_v = check_feature_matrix(x_v, "x_v")
    x_f = check_feature_matrix(x_f, "x_f")
    draw_t = _draw_sizes(x_t.shape[0], config.resample_fraction)
    draw_v = _draw_sizes(x_v.shape[0], config.resample_fraction)
    draw_f = _draw_sizes(x_f.shape[0], config.resample_fraction)
    rngs = group_rngs(config.seed, config.k)

    def run_group(rng: np.random.Generator) -> float | None:
        it = resample_indices(x_t.shape[0], draw_t, rng)
        iv = resample_indices(x_v.shape[0], draw_v, rng)
        ifa = resample_indices(x_f.shape[0], draw_f, rng)
        try:
            if index_estimator is not None:
                return float(index_estimator(it, iv, ifa))
            return float(estimator(x_t[it], x_v[iv], x_f[ifa]))
        except DegeneratePopulationsError:
            return None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_group, rngs))
    else:
        results = [run_group(rng) for rng in rngs]

    alphas = [a for a in results if a is not None]
    failed = config.k - len(alphas)
    if failed > MAX_FAILED_FRACTION * config.k:
        raise TooManyFailedGroupsError(
            f"{failed} of {config.k} bootstrap groups failed "
            f"(limit is {MAX_FAILED_FRACTION:.0%})"
        )
    p5, p50, p95 = percentile_summary(alphas)
    diag = {
        "failed_groups": float(failed),
        "groups_used": float(len(alphas)),
        "resample_fraction": config.resample_fraction,
    }
    if diagnostics:
        diag.update(diagnostics)
    return AuditReport(
        method=method,
        alpha_p5=p5,
        alpha_p50=p50,
        alpha_p95=p95,
        k_bootstrap=config.k,
        seed=config.seed,
        n_member=x_t.shape[0],
        n_nonmember=x_v.shape[0],
        n_audit=x_f.shape[0],
        kernel=kernel,
        epsilon=epsilon,
        diagnostics=diag,
    ).validate()
