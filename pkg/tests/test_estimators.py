import numpy as np
import pytest
from sklearn.base import clone

from smia import (
    DegeneratePopulationsError,
    DimensionMismatchError,
    KernelSpec,
    Smia0Auditor,
    SmiaMAuditor,
    SmiaWAuditor,
    ValidationError,
    gen_gaussian,
    gen_mixture,
    GaussianPopulationSpec,
    run_bootstrap_audit,
    BootstrapConfig,
    smia_m_point_estimate,
)
from smia.kernels import resolve_kernel

ALL_AUDITORS = [Smia0Auditor, SmiaMAuditor, SmiaWAuditor]


@pytest.fixture(scope="module")
def known_mixture():
    pool_t = gen_gaussian(GaussianPopulationSpec(np.zeros(2), np.eye(2), 400, 80))
    pool_v = gen_gaussian(
        GaussianPopulationSpec(np.array([3.0, 0.0]), np.eye(2), 400, 81)
    )
    x_f, _ = gen_mixture(pool_t, pool_v, 0.3, 400, 82)
    return pool_t, pool_v, x_f


@pytest.mark.parametrize("cls", ALL_AUDITORS)
def test_sklearn_params_round_trip(cls):
    est = cls(k=17, seed=123)
    params = est.get_params()
    assert params["k"] == 17 and params["seed"] == 123
    cloned = clone(est)
    assert cloned.get_params() == params
    est.set_params(k=5)
    assert est.get_params()["k"] == 5


@pytest.mark.parametrize("cls", ALL_AUDITORS)
def test_predict_requires_fit(cls):
    with pytest.raises(ValidationError):
        cls().predict_alpha(np.zeros((3, 2)))


def test_fit_rejects_mismatched_dims():
    with pytest.raises(DimensionMismatchError):
        Smia0Auditor().fit(np.zeros((3, 2)), np.zeros((3, 3)))
    fitted = Smia0Auditor().fit(np.zeros((3, 2)), np.ones((3, 2)))
    with pytest.raises(DimensionMismatchError):
        fitted.predict_alpha(np.zeros((3, 1)))


@pytest.mark.parametrize(
    "cls,kwargs,tol",
    [
        (Smia0Auditor, {}, 0.05),
        (SmiaMAuditor, {}, 0.05),
        (SmiaWAuditor, {"wp": 2}, 0.12),
    ],
)
def test_point_estimates_near_truth(cls, kwargs, tol, known_mixture):
    pool_t, pool_v, x_f = known_mixture
    est = cls(**kwargs).fit(pool_t, pool_v)
    assert abs(est.predict_alpha(x_f) - 0.3) <= tol


@pytest.mark.parametrize(
    "cls,method",
    [(Smia0Auditor, "smia0"), (SmiaMAuditor, "smia_m"), (SmiaWAuditor, "smia_w")],
)
def test_audit_reports_are_tagged_and_valid(cls, method, known_mixture):
    pool_t, pool_v, x_f = known_mixture
    report = cls(k=20, seed=7).fit(pool_t, pool_v).audit(x_f)
    assert report.method == method
    assert report.alpha_p5 <= report.alpha_p50 <= report.alpha_p95
    assert report.k_bootstrap == 20
    assert report.n_member == 400 and report.n_audit == 400
    report.validate()
    if method == "smia_m":
        assert isinstance(report.kernel, KernelSpec)
        assert report.kernel.sigma is not None
        assert "sigma" in report.diagnostics
    if method == "smia_w":
        assert report.epsilon is not None
        assert "sinkhorn_iterations" in report.diagnostics
    if method == "smia0":
        assert "residual_at_opt" in report.diagnostics


def test_outlier_filter_drops_blowup_rows(known_mixture):
    pool_t, pool_v, x_f = known_mixture
    corrupted = np.vstack([x_f, [[1e9, -1e9]]])
    report = Smia0Auditor(k=15, seed=3).fit(pool_t, pool_v).audit(corrupted)
    assert report.diagnostics["removed_audit"] == 1.0
    assert report.n_audit == corrupted.shape[0] - 1
    assert abs(report.alpha_p50 - 0.3) <= 0.1


def test_filter_off_keeps_rows(known_mixture):
    pool_t, pool_v, x_f = known_mixture
    corrupted = np.vstack([x_f, [[1e9, -1e9]]])
    report = (
        Smia0Auditor(k=15, seed=3, outlier_filter=False)
        .fit(pool_t, pool_v)
        .audit(corrupted)
    )
    assert "removed_audit" not in report.diagnostics
    assert report.n_audit == corrupted.shape[0]


def test_degenerate_references_fail_audit(known_mixture):
    # Identical references are unidentifiable; the audit fails outright
    # instead of reporting a number.
    pool_t, _, _ = known_mixture
    with pytest.raises(DegeneratePopulationsError):
        Smia0Auditor(k=10, seed=1).fit(pool_t, pool_t).audit(pool_t)


def test_smia_m_fast_path_matches_generic_engine(known_mixture):
    pool_t, pool_v, x_f = known_mixture
    fast = (
        SmiaMAuditor(k=25, seed=5, outlier_filter=False)
        .fit(pool_t, pool_v)
        .audit(x_f)
    )
    spec = resolve_kernel(KernelSpec(), pool_t, pool_v)
    generic = run_bootstrap_audit(
        lambda a, b, c: smia_m_point_estimate(a, b, c, spec),
        pool_t,
        pool_v,
        x_f,
        BootstrapConfig(k=25, seed=5),
        method="smia_m",
    )
    assert fast.alpha_p5 == pytest.approx(generic.alpha_p5, abs=1e-10)
    assert fast.alpha_p50 == pytest.approx(generic.alpha_p50, abs=1e-10)
    assert fast.alpha_p95 == pytest.approx(generic.alpha_p95, abs=1e-10)


def test_smia_m_explicit_sigma_respected(known_mixture):
    pool_t, pool_v, x_f = known_mixture
    report = SmiaMAuditor(sigma=2.5, k=10, seed=2).fit(pool_t, pool_v).audit(x_f)
    assert report.kernel.sigma == 2.5
    assert report.diagnostics["sigma"] == 2.5


def test_smia_w_polarization_mode(known_mixture):
    pool_t, pool_v, x_f = known_mixture
    est = SmiaWAuditor(mode="polarization", k=10, seed=2).fit(pool_t, pool_v)
    report = est.audit(x_f)
    assert 0.0 <= report.alpha_p50 <= 1.0


def test_audit_deterministic_across_threads(known_mixture):
    pool_t, pool_v, x_f = known_mixture
    reports = [
        Smia0Auditor(k=16, seed=44, threads=th).fit(pool_t, pool_v).audit(x_f)
        for th in (1, 4)
    ]
    assert reports[0].to_dict() == reports[1].to_dict()
