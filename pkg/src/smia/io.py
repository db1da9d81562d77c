"""Feature-matrix CSV and audit-report JSON persistence.

Feature CSV format: UTF-8, header line ``f0,f1,...,f{d-1}``, then one row of
``d`` decimal fields per sample.  The decimal separator is always ``.`` and
the field separator always ``,`` regardless of locale; rows end with ``\\n``
or ``\\r\\n``.  Values are written with 17 significant digits so that a
write/load round trip is lossless for 64-bit floats.

Report JSON: a single object with a fixed key order (method, alpha_p5,
alpha_p50, alpha_p95, k_bootstrap, seed, n_member, n_nonmember, n_audit,
kernel, epsilon, diagnostics).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import (
    EmptyMatrixError,
    NonFiniteValueError,
    RaggedRowError,
    ValidationError,
)
from .kernels import KernelSpec
from .validation import check_feature_matrix, check_positive_int, check_seed

METHODS = ("smia0", "smia_m", "smia_w")

_KERNEL_KEYS = ("family", "sigma", "c", "p", "alpha_rq")


def load_feature_matrix(path) -> np.ndarray:
    """Load a feature CSV into an ``(n, d)`` float64 array.

    The header labels are ignored but their count fixes ``d``; a data row of
    any other width raises :class:`RaggedRowError` with its index.  Values
    must parse to finite floats.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise EmptyMatrixError(f"{path}: missing header line")
    d = len(lines[0].split(","))
    rows = []
    for i, line in enumerate(lines[1:]):
        fields = line.split(",")
        if len(fields) != d:
            raise RaggedRowError(i, d, len(fields))
        try:
            row = [float(f) for f in fields]
        except ValueError as exc:
            raise ValidationError(f"{path}: row {i}: {exc}") from exc
        rows.append(row)
    if not rows:
        raise EmptyMatrixError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    if not np.isfinite(data).all():
        i, j = np.argwhere(~np.isfinite(data))[0]
        raise NonFiniteValueError(f"{path}: row {i}, column {j} is not finite")
    return data


def write_feature_matrix(x, path) -> None:
    """Write a feature matrix in the CSV format read by :func:`load_feature_matrix`."""
    x = check_feature_matrix(x, "x")
    d = x.shape[1]
    lines = [",".join(f"f{j}" for j in range(d))]
    for row in x:
        lines.append(",".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class AuditReport:
    """Result of one bootstrap audit: point estimate, interval, provenance."""

    method: str
    alpha_p5: float
    alpha_p50: float
    alpha_p95: float
    k_bootstrap: int
    seed: int
    n_member: int
    n_nonmember: int
    n_audit: int
    kernel: KernelSpec | None = None
    epsilon: float | None = None
    diagnostics: dict[str, float] = field(default_factory=dict)

    def validate(self) -> "AuditReport":
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got {self.method!r}")
        for name in ("alpha_p5", "alpha_p50", "alpha_p95"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name}={v!r} outside [0, 1]")
        if not self.alpha_p5 <= self.alpha_p50 <= self.alpha_p95:
            raise ValidationError(
                "alpha percentiles must be ordered: "
                f"p5={self.alpha_p5}, p50={self.alpha_p50}, p95={self.alpha_p95}"
            )
        check_positive_int(self.k_bootstrap, "k_bootstrap")
        check_seed(self.seed)
        for name in ("n_member", "n_nonmember", "n_audit"):
            check_positive_int(getattr(self, name), name)
        if self.epsilon is not None and self.epsilon <= 0:
            raise ValidationError("epsilon must be positive when given")
        for key, val in self.diagnostics.items():
            if not isinstance(val, (int, float)):
                raise ValidationError(f"diagnostics[{key!r}] must be numeric")
        return self

    def to_dict(self) -> dict:
        kernel = None
        if self.kernel is not None:
            kernel = {k: getattr(self.kernel, k) for k in _KERNEL_KEYS}
        return {
            "method": self.method,
            "alpha_p5": self.alpha_p5,
            "alpha_p50": self.alpha_p50,
            "alpha_p95": self.alpha_p95,
            "k_bootstrap": self.k_bootstrap,
            "seed": self.seed,
            "n_member": self.n_member,
            "n_nonmember": self.n_nonmember,
            "n_audit": self.n_audit,
            "kernel": kernel,
            "epsilon": self.epsilon,
            "diagnostics": {k: float(v) for k, v in sorted(self.diagnostics.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuditReport":
        kernel = d.get("kernel")
        if kernel is not None:
            kernel = KernelSpec(**{k: kernel[k] for k in _KERNEL_KEYS})
        return cls(
            method=d["method"],
            alpha_p5=d["alpha_p5"],
            alpha_p50=d["alpha_p50"],
            alpha_p95=d["alpha_p95"],
            k_bootstrap=d["k_bootstrap"],
            seed=d["seed"],
            n_member=d["n_member"],
            n_nonmember=d["n_nonmember"],
            n_audit=d["n_audit"],
            kernel=kernel,
            epsilon=d.get("epsilon"),
            diagnostics=dict(d.get("diagnostics", {})),
        ).validate()


def write_report(report: AuditReport, path) -> None:
    """Serialize a validated report as JSON with deterministic key order."""
    report.validate()
    Path(path).write_text(
        json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
    )


def load_report(path) -> AuditReport:
    """Parse and validate a report JSON file."""
    return AuditReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
