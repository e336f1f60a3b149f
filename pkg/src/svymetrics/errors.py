"""Exception hierarchy.

Errors are split into data problems (bad files, schemas, designs) and
numerical failures (undefined metrics, non-convergence).  The CLI maps the
two branches to distinct exit codes.
"""


class SvymetricsError(Exception):
    """Base class for all library errors."""


class DataValidationError(SvymetricsError):
    """Invalid input data: bad weights, missing columns, malformed specs."""


class SchemaError(DataValidationError):
    """A data schema is internally inconsistent or does not match a file."""


class DesignError(DataValidationError):
    """A sampling design is invalid against its target population."""


class DegenerateSplitError(DataValidationError):
    """A train/test split would leave one side empty."""


class NumericalError(SvymetricsError):
    """Base class for numerical failures."""


class UndefinedMetricError(NumericalError):
    """A metric's denominator is zero (e.g. no positives in the data)."""


class NonConvergenceError(NumericalError):
    """An iterative fit did not converge within its iteration budget."""


class SeparationError(NonConvergenceError):
    """Complete or quasi-complete separation detected in a logistic fit."""


class AggregationError(NumericalError):
    """Too few successful replicates to aggregate."""
