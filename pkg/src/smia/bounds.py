"""Calculators for the auditing-error bounds and the detection-rate curve.

These evaluate closed-form expressions on finite-support distributions; they
estimate nothing.  The central quantity is the risk bound

    risk <= empirical_risk + sqrt((2/m) (chi2 + 1) log(1/delta)) + sqrt(d_inf / 2)

whose middle term is the statistical error of learning a membership
classifier from m samples and whose last term prices the shift between the
classifier's training distribution and the distribution actually audited.

``tnr_curve`` reconstructs how a fixed-accuracy binary attacker's true
negative rate collapses as non-members get rare: from the accuracy
decomposition ``acc = (1 - p) tpr + p tnr``, solve for tnr at a given
non-member proportion p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, ValidationError
from .validation import check_in_range, check_positive_int


def check_distribution(probs, name: str = "probs") -> np.ndarray:
    """Validate a finite-support probability vector."""
    p = np.asarray(probs, dtype=float).ravel()
    if p.size == 0:
        raise ValidationError(f"{name} must not be empty")
    if not np.isfinite(p).all() or (p < 0).any():
        raise ValidationError(f"{name} must be nonnegative and finite")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValidationError(f"{name} must sum to 1 within 1e-9, got {p.sum()!r}")
    return p


def _check_pair(q, p, names: tuple[str, str]) -> tuple[np.ndarray, np.ndarray]:
    qv = check_distribution(q, names[0])
    pv = check_distribution(p, names[1])
    if qv.size != pv.size:
        raise DimensionMismatchError(
            f"{names[0]} and {names[1]} have support sizes {qv.size} and {pv.size}"
        )
    return qv, pv


def chi2_divergence(q, p) -> float:
    """Chi-squared divergence ``sum (q_i - p_i)^2 / p_i``.

    Infinite when ``q`` puts mass where ``p`` has none.
    """
    qv, pv = _check_pair(q, p, ("q", "p"))
    if ((pv == 0) & (qv > 0)).any():
        return math.inf
    mask = pv > 0
    return float(np.sum((qv[mask] - pv[mask]) ** 2 / pv[mask]))


def renyi_inf_divergence(dt, df) -> float:
    """Order-infinity Renyi divergence ``log sup dt_i / df_i``.

    The supremum runs over the support of ``dt``; infinite when ``df``
    vanishes somewhere ``dt`` does not.
    """
    tv, fv = _check_pair(dt, df, ("dt", "df"))
    mask = tv > 0
    if (fv[mask] == 0).any():
        return math.inf
    return float(np.log(np.max(tv[mask] / fv[mask])))


def statistical_error_term(chi2: float, m: int, delta: float) -> float:
    """``sqrt((2/m) (chi2 + 1) log(1/delta))``."""
    if chi2 < 0:
        raise ValidationError(f"chi2 must be nonnegative, got {chi2}")
    check_positive_int(m, "m")
    check_in_range(delta, "delta", low=0.0, high=1.0, low_open=True, high_open=True)
    if math.isinf(chi2):
        return math.inf
    return math.sqrt((2.0 / m) * (chi2 + 1.0) * (-math.log(delta)))


@dataclass(frozen=True)
class BoundInputs:
    """Inputs to the full auditing-error bound."""

    empirical_risk: float
    chi2: float
    m: int
    delta: float
    d_inf: float

    def __post_init__(self):
        check_in_range(self.empirical_risk, "empirical_risk", low=0.0, high=1.0)
        if self.chi2 < 0:
            raise ValidationError(f"chi2 must be nonnegative, got {self.chi2}")
        check_positive_int(self.m, "m")
        check_in_range(self.delta, "delta", low=0.0, high=1.0, low_open=True, high_open=True)
        if self.d_inf < 0:
            raise ValidationError(f"d_inf must be nonnegative, got {self.d_inf}")


def auditing_bound(b: BoundInputs) -> float:
    """Empirical risk + statistical error + distribution-shift penalty."""
    return (
        b.empirical_risk
        + statistical_error_term(b.chi2, b.m, b.delta)
        + math.sqrt(b.d_inf / 2.0)
    )


def tnr_curve(
    accuracy: float, tpr: float, p_nonmember: float
) -> tuple[float, bool]:
    """True negative rate implied by overall accuracy at a non-member share.

    Solves ``accuracy = (1 - p) tpr + p tnr`` for tnr and clamps to [0, 1].
    The flag is False when the unclamped solution falls outside [0, 1],
    meaning no classifier realizes that (accuracy, tpr) at this mixture.
    """
    check_in_range(accuracy, "accuracy", low=0.0, high=1.0, low_open=True)
    check_in_range(tpr, "tpr", low=0.0, high=1.0, low_open=True)
    check_in_range(p_nonmember, "p_nonmember", low=0.0, high=1.0, low_open=True)
    tnr = (accuracy - (1.0 - p_nonmember) * tpr) / p_nonmember
    feasible = 0.0 <= tnr <= 1.0
    return float(min(1.0, max(0.0, tnr))), feasible
