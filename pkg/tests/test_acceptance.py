"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s`` to see
them stream).

Criteria are oracle- and property-based: known-truth synthetic mixtures for
the estimators, exhaustive/brute-force oracles for the kernel and transport
layers, and closed-form reference values for the bound calculators.
"""

import math
import time

import numpy as np
import pytest

from smia import (
    GaussianPopulationSpec,
    KernelSpec,
    Smia0Auditor,
    SmiaMAuditor,
    SmiaWAuditor,
    SinkhornConfig,
    cost_matrix,
    estimate_moments,
    exact_ot_small,
    gen_gaussian,
    gen_mixture,
    load_report,
    mixture_moments,
    mmd2_biased,
    mmd2_unbiased,
    sinkhorn,
    smia_m_alpha,
    statistical_error_term,
    tnr_curve,
)
from smia.cli import main
from tests.oracles import (
    FAMILIES,
    mmd2_triple_loop,
    quadratic_objective,
    random_geometry,
)

TRUE_ALPHAS = (0.0, 0.1, 0.3, 0.5, 0.9, 1.0)
N_PER_SET = 2000
REPETITIONS = 50
SWEEP_BUDGET_SECONDS = 300.0


def _criterion(name: str, ok: bool, detail: str = ""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f": {detail}"
    print(line)
    assert ok, line


def _mixture_dataset(alpha: float, rep: int):
    base = 1_000_003 * int(round(alpha * 10)) + 17 * rep
    x_t = gen_gaussian(GaussianPopulationSpec(np.zeros(2), np.eye(2), N_PER_SET, base))
    x_v = gen_gaussian(
        GaussianPopulationSpec(np.array([3.0, 0.0]), np.eye(2), N_PER_SET, base + 1)
    )
    x_f, _ = gen_mixture(x_t, x_v, alpha, N_PER_SET, base + 2)
    return x_t, x_v, x_f


def _recovery_sweep(make_auditor):
    fractions = {}
    for alpha in TRUE_ALPHAS:
        point_hits = 0
        coverage_hits = 0
        for rep in range(REPETITIONS):
            x_t, x_v, x_f = _mixture_dataset(alpha, rep)
            report = make_auditor(seed=7_000_000 + rep).fit(x_t, x_v).audit(x_f)
            point_hits += abs(report.alpha_p50 - alpha) <= 0.05
            coverage_hits += report.alpha_p5 <= alpha <= report.alpha_p95
        fractions[alpha] = (point_hits / REPETITIONS, coverage_hits / REPETITIONS)
    return fractions


def test_criterion_known_alpha_recovery():
    started = time.monotonic()
    results = {
        "smia0": _recovery_sweep(lambda seed: Smia0Auditor(k=50, seed=seed)),
        "smia_m": _recovery_sweep(lambda seed: SmiaMAuditor(k=50, seed=seed)),
    }

    # Transport estimator on the point-mass construction: every feasible
    # coupling onto a point mass costs the same, so the ratio is the exact
    # resampled mixing fraction.
    x_t = np.zeros((80, 1))
    x_v = np.full((80, 1), 4.0)
    x_f = np.vstack([np.zeros((60, 1)), np.full((20, 1), 4.0)])
    w_report = SmiaWAuditor(wp=1, k=50, seed=13).fit(x_t, x_v).audit(x_f)
    elapsed = time.monotonic() - started

    failures = []
    for method, per_alpha in results.items():
        for alpha, (point_frac, cover_frac) in per_alpha.items():
            if point_frac < 0.6:
                failures.append(f"{method}@{alpha}: p50 within 0.05 in {point_frac:.0%}")
            if cover_frac < 0.6:
                failures.append(f"{method}@{alpha}: coverage {cover_frac:.0%}")
    if abs(w_report.alpha_p50 - 0.25) > 0.10:
        failures.append(f"smia_w point-mass p50={w_report.alpha_p50:.3f}")
    if elapsed >= SWEEP_BUDGET_SECONDS:
        failures.append(f"sweep took {elapsed:.0f}s")
    _criterion(
        "known-alpha recovery (smia0/smia_m sweep + smia_w point masses)",
        not failures,
        "; ".join(failures) or f"sweep {elapsed:.0f}s",
    )


def test_criterion_mixture_moment_exactness():
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 80))
        d = int(rng.integers(1, 5))
        x = rng.uniform(-10, 10, size=(n, d))
        n_a = int(rng.integers(1, n))
        alpha = (n - n_a) / n
        mixed = mixture_moments(
            alpha, estimate_moments(x[:n_a]), estimate_moments(x[n_a:])
        )
        whole = estimate_moments(x)
        worst = max(
            worst,
            np.abs(mixed.mu - whole.mu).max(),
            np.abs(mixed.sigma - whole.sigma).max(),
        )
    _criterion(
        "mixture-moment pooling identity over 100 random splits",
        worst <= 1e-9,
        f"worst deviation {worst:.2e}",
    )


def test_criterion_closed_form_alpha_matches_dense_grid():
    rng = np.random.default_rng(102)
    grid = np.linspace(0.0, 1.0, 1_000_001)
    worst = 0.0
    for _ in range(100):
        geom = random_geometry(rng)
        closed = smia_m_alpha(geom)
        brute = grid[int(np.argmin(quadratic_objective(geom, grid)))]
        worst = max(worst, abs(closed - brute))
    _criterion(
        "embedding-space closed form vs 1e-6 grid search on 100 geometries",
        worst <= 2e-6,
        f"worst gap {worst:.2e}",
    )


def test_criterion_mmd_oracle_equivalence():
    rng = np.random.default_rng(103)
    worst = 0.0
    for spec in FAMILIES:
        for _ in range(50):
            x = rng.standard_normal((int(rng.integers(2, 9)), 2))
            y = rng.standard_normal((int(rng.integers(2, 9)), 2)) + 0.5
            worst = max(
                worst,
                abs(mmd2_biased(x, y, spec) - mmd2_triple_loop(x, y, spec, True)),
                abs(mmd2_unbiased(x, y, spec) - mmd2_triple_loop(x, y, spec, False)),
            )
    pts = np.array([[0.0], [1.0]])
    exact_ok = mmd2_unbiased(pts, pts, KernelSpec("polynomial", c=0.0, p=1)) == -0.5
    _criterion(
        "MMD estimators vs triple-loop oracle (50 instances x 4 kernels)",
        worst <= 1e-10 and exact_ok,
        f"worst gap {worst:.2e}, hand case exact={exact_ok}",
    )


def test_criterion_sinkhorn_against_exact_transport():
    rng = np.random.default_rng(104)
    worst_rel = 0.0
    worst_viol = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 7))
        d = int(rng.integers(1, 4))
        p = int(rng.integers(1, 3))
        x = rng.standard_normal((n, d))
        y = rng.standard_normal((n, d)) + rng.uniform(0, 2)
        c = cost_matrix(x, y, p)
        cfg = SinkhornConfig(epsilon=1e-3 * c.max(), p=p, max_iters=500_000, tol=1e-6)
        weights = np.full(n, 1.0 / n)
        plan = sinkhorn(weights, weights, c, cfg)
        exact = exact_ot_small(x, y, p)
        worst_viol = max(worst_viol, plan.max_marginal_violation)
        worst_rel = max(worst_rel, abs(plan.w_eps - exact) / exact)
    _criterion(
        "regularized transport vs exhaustive oracle (50 instances, n<=6)",
        worst_viol <= 1e-6 and worst_rel <= 0.05,
        f"worst marginal violation {worst_viol:.2e}, worst relative error {worst_rel:.2%}",
    )


def test_criterion_tnr_curve_reconstruction():
    tnr, feasible = tnr_curve(0.99, 0.9999, 0.1)
    exact_ok = feasible and abs(tnr - 0.9009) <= 1e-12
    values = [tnr_curve(0.99, 0.9999, p)[0] for p in np.linspace(0.001, 1.0, 1000)]
    monotone = all(a <= b + 1e-12 for a, b in zip(values, values[1:]))
    _criterion(
        "detection-rate curve: reference point and monotonicity",
        exact_ok and monotone,
        f"tnr(p=0.1)={tnr!r}, monotone={monotone}",
    )


def test_criterion_bound_calculators():
    unit_a = statistical_error_term(0.0, 2, math.exp(-1))
    unit_b = statistical_error_term(3.0, 8, math.exp(-1))
    monotone = True
    ms = [1, 2, 10, 100, 10_000]
    chi2s = [0.0, 0.5, 2.0, 10.0]
    deltas = [0.5, 0.1, 0.01]
    for chi2 in chi2s:
        for delta in deltas:
            vals = [statistical_error_term(chi2, m, delta) for m in ms]
            monotone &= all(a > b for a, b in zip(vals, vals[1:]))
    for m in ms:
        for delta in deltas:
            vals = [statistical_error_term(c, m, delta) for c in chi2s]
            monotone &= all(a <= b for a, b in zip(vals, vals[1:]))
    for chi2 in chi2s:
        for m in ms:
            vals = [statistical_error_term(chi2, m, d) for d in deltas]
            monotone &= all(a < b for a, b in zip(vals, vals[1:]))
    _criterion(
        "error-bound calculators: exact unit values and monotonicity grids",
        unit_a == 1.0 and unit_b == 1.0 and monotone,
        f"units=({unit_a!r}, {unit_b!r}), monotone={monotone}",
    )


@pytest.mark.parametrize("method", ["smia0", "smia-m", "smia-w"])
def test_criterion_cli_determinism(method, tmp_path, capsys):
    outdir = tmp_path / "fixtures"
    assert (
        main(
            ["synth", "--alpha", "0.3", "--n", "240", "--seed", "33", "--outdir", str(outdir)]
        )
        == 0
    )
    capsys.readouterr()  # drop the synth banner before capturing audits
    payloads = []
    stdouts = []
    for i, threads in enumerate((1, 1, 8)):
        out = tmp_path / f"r{i}.json"
        code = main(
            [
                "audit",
                "--member", str(outdir / "member.csv"),
                "--nonmember", str(outdir / "nonmember.csv"),
                "--audit", str(outdir / "audit.csv"),
                "--method", method,
                "--k", "20",
                "--seed", "5",
                "--threads", str(threads),
                "--out", str(out),
            ]
        )
        stdouts.append(capsys.readouterr().out)
        assert code == 0
        payloads.append(out.read_bytes())
    identical = payloads[0] == payloads[1] == payloads[2] and stdouts[0] == stdouts[2]
    report = load_report(tmp_path / "r0.json")
    _criterion(
        f"CLI determinism across reruns and thread counts ({method})",
        identical,
        f"alpha_p50={report.alpha_p50:.4f}",
    )
