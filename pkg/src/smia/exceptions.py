"""Exception hierarchy.

Two families matter for control flow.  :class:`ValidationError` and its
subclasses signal malformed inputs or parameters and map to CLI exit code 1.
:class:`AuditFailureError` and its subclasses signal audits that cannot
produce a trustworthy number (degenerate populations, pathological data,
numerical collapse) and map to CLI exit code 2.
"""


class SmiaError(Exception):
    """Base class for all toolkit-specific errors."""


class ValidationError(SmiaError, ValueError):
    """Invalid input data or parameters."""


class EmptyMatrixError(ValidationError):
    """A feature matrix has no data rows."""


class RaggedRowError(ValidationError):
    """A CSV data row does not match the header width."""

    def __init__(self, row_index: int, expected: int, got: int):
        self.row_index = row_index
        self.expected = expected
        self.got = got
        super().__init__(
            f"row {row_index}: expected {expected} fields, got {got}"
        )


class NonFiniteValueError(ValidationError):
    """A feature value is NaN or infinite."""


class DimensionMismatchError(ValidationError):
    """Inputs that must share a dimension do not."""


class TooFewSamplesError(ValidationError):
    """An operation needs more samples than were supplied."""


class AllPointsIdenticalError(ValidationError):
    """Median pairwise distance is zero; a bandwidth cannot be inferred."""


class NotPSDError(ValidationError):
    """A covariance matrix is not positive semidefinite, even after jitter."""


class NonProbabilityWeightsError(ValidationError):
    """Marginal weights are negative or do not sum to one."""


class AuditFailureError(SmiaError):
    """An audit run cannot produce a trustworthy estimate."""


class DegeneratePopulationsError(AuditFailureError):
    """Member and non-member populations are statistically indistinguishable,
    so the forgetting rate is unidentifiable."""


class DegenerateEmbeddingsError(DegeneratePopulationsError):
    """Kernel mean embeddings of the two reference populations coincide."""


class AllRowsRemovedError(AuditFailureError):
    """Outlier filtering removed every row; the input is pathological."""


class TooManyFailedGroupsError(AuditFailureError):
    """More than the tolerated fraction of bootstrap groups failed."""


class NumericalUnderflowError(AuditFailureError):
    """The Gibbs kernel collapsed to zero in linear-domain scaling.

    Retry with ``log_domain=True`` or a larger regularization strength.
    """
