import math

import numpy as np
import pytest

from smia import (
    BoundInputs,
    DimensionMismatchError,
    ValidationError,
    auditing_bound,
    chi2_divergence,
    renyi_inf_divergence,
    statistical_error_term,
    tnr_curve,
)


def kl_divergence(p, q):
    """Local oracle: sum p_i log(p_i / q_i) over the support of p."""
    total = 0.0
    for pi, qi in zip(p, q):
        if pi > 0:
            total += pi * math.log(pi / qi)
    return total


def random_distribution(rng, k):
    w = rng.uniform(0.05, 1.0, size=k)
    return w / w.sum()


def test_chi2_cases():
    assert chi2_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert chi2_divergence([1.0, 0.0], [0.5, 0.5]) == 1.0
    assert math.isinf(chi2_divergence([1.0, 0.0], [0.0, 1.0]))


def test_chi2_zero_iff_equal():
    rng = np.random.default_rng(70)
    for _ in range(20):
        p = random_distribution(rng, 5)
        assert chi2_divergence(p, p) <= 1e-12
        q = random_distribution(rng, 5)
        if np.abs(q - p).max() > 1e-6:
            assert chi2_divergence(q, p) > 1e-12


def test_chi2_validation():
    with pytest.raises(DimensionMismatchError):
        chi2_divergence([1.0], [0.5, 0.5])
    with pytest.raises(ValidationError):
        chi2_divergence([0.6, 0.6], [0.5, 0.5])


def test_renyi_cases():
    assert renyi_inf_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert renyi_inf_divergence([0.8, 0.2], [0.5, 0.5]) == pytest.approx(
        math.log(1.6), abs=1e-12
    )
    assert math.isinf(renyi_inf_divergence([0.5, 0.5], [1.0, 0.0]))


def test_renyi_dominates_kl():
    rng = np.random.default_rng(71)
    for _ in range(100):
        k = int(rng.integers(2, 8))
        dt, df = random_distribution(rng, k), random_distribution(rng, k)
        assert renyi_inf_divergence(dt, df) >= kl_divergence(dt, df) - 1e-12


def test_statistical_error_unit_values():
    assert statistical_error_term(0.0, 2, math.exp(-1)) == 1.0
    assert statistical_error_term(3.0, 8, math.exp(-1)) == 1.0


def test_statistical_error_vanishes_as_delta_approaches_one():
    assert statistical_error_term(0.0, 2, 1.0 - 1e-12) <= 1e-5


def test_statistical_error_monotonicity_grids():
    chi2s = [0.0, 0.5, 2.0, 10.0]
    ms = [1, 2, 10, 100, 10_000]
    deltas = [0.5, 0.1, 0.01, 1e-4]
    for chi2 in chi2s:
        for delta in deltas:
            vals = [statistical_error_term(chi2, m, delta) for m in ms]
            assert all(a > b for a, b in zip(vals, vals[1:]))  # decreasing in m
    for m in ms:
        for delta in deltas:
            vals = [statistical_error_term(c, m, delta) for c in chi2s]
            assert all(a <= b for a, b in zip(vals, vals[1:]))  # nondecreasing in chi2
    for chi2 in chi2s:
        for m in ms:
            vals = [statistical_error_term(chi2, m, d) for d in deltas]
            assert all(a < b for a, b in zip(vals, vals[1:]))  # increasing in log(1/delta)


def test_statistical_error_validation():
    with pytest.raises(ValidationError):
        statistical_error_term(-0.1, 2, 0.5)
    with pytest.raises(ValidationError):
        statistical_error_term(0.0, 0, 0.5)
    with pytest.raises(ValidationError):
        statistical_error_term(0.0, 2, 1.0)


def test_auditing_bound_reduces_without_shift():
    b = BoundInputs(empirical_risk=0.05, chi2=1.0, m=50, delta=0.1, d_inf=0.0)
    assert auditing_bound(b) == 0.05 + statistical_error_term(1.0, 50, 0.1)


def test_auditing_bound_shift_adds_one():
    base = BoundInputs(empirical_risk=0.05, chi2=1.0, m=50, delta=0.1, d_inf=0.0)
    shifted = BoundInputs(empirical_risk=0.05, chi2=1.0, m=50, delta=0.1, d_inf=2.0)
    assert auditing_bound(shifted) - auditing_bound(base) == pytest.approx(1.0, abs=1e-12)


def test_auditing_bound_vanishes_in_the_limit():
    b = BoundInputs(empirical_risk=0.0, chi2=0.0, m=10**12, delta=0.5, d_inf=0.0)
    assert auditing_bound(b) <= 1e-5


def test_bound_inputs_validation():
    with pytest.raises(ValidationError):
        BoundInputs(empirical_risk=1.5, chi2=0.0, m=10, delta=0.1, d_inf=0.0)
    with pytest.raises(ValidationError):
        BoundInputs(empirical_risk=0.5, chi2=0.0, m=10, delta=0.1, d_inf=-1.0)


def test_tnr_all_nonmembers():
    assert tnr_curve(0.9, 0.97, 1.0) == (0.9, True)


def test_tnr_reference_configuration():
    tnr, feasible = tnr_curve(0.99, 0.9999, 0.1)
    assert feasible
    assert abs(tnr - 0.9009) <= 1e-12


def test_tnr_infeasible_when_nonmembers_rare():
    tnr, feasible = tnr_curve(0.99, 0.9999, 0.005)
    assert not feasible
    assert tnr == 0.0


def test_tnr_nondecreasing_in_p():
    ps = np.linspace(0.001, 1.0, 500)
    values = [tnr_curve(0.99, 0.9999, float(p))[0] for p in ps]
    assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


def test_tnr_validation():
    with pytest.raises(ValidationError):
        tnr_curve(0.99, 0.9999, 0.0)
    with pytest.raises(ValidationError):
        tnr_curve(1.2, 0.9, 0.5)
