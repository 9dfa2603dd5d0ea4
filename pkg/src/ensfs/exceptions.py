"""Errors and warning categories raised across the package."""


class EnsfsError(Exception):
    """Base class for all package errors."""


class ConfigError(EnsfsError):
    """Invalid or malformed run configuration (CLI exit code 2)."""


class SchemaMismatch(EnsfsError):
    """Data file and metadata sidecar disagree."""


class InvalidLevel(EnsfsError):
    """Cell value is not a declared level / not a parsable finite number."""


class UnknownLevel(EnsfsError):
    """Encoding was asked for a label outside the declared level list."""


class UnknownFeatureName(EnsfsError):
    """A feature name does not exist in the dataset."""


class AllColumnsDropped(EnsfsError):
    """Cleaning removed every feature column."""


class AllRowsDropped(EnsfsError):
    """Cleaning removed every row."""


class DegenerateColumn(EnsfsError):
    """Column has fewer than two distinct values where spread is required."""


class ZeroVariance(EnsfsError):
    """Standardization attempted with a zero standard deviation."""


class CensoredBelowCutoff(EnsfsError):
    """Censored observation with survival months at or below the last cutoff."""


class DimensionMismatch(EnsfsError):
    """Matrix/vector shapes are incompatible."""


class LengthMismatch(EnsfsError):
    """Paired vectors have different lengths."""


class EmptyTrainingSet(EnsfsError):
    """A model was fit on zero rows."""


class EmptySelection(EnsfsError):
    """A metric that conditions on a non-empty selected set got an empty one."""


class InfeasibleSpec(EnsfsError):
    """Synthetic data spec cannot be satisfied."""


class EnsfsWarning(UserWarning):
    """Base class for package warnings."""


class ImputationFallbackWarning(EnsfsWarning):
    """No neighbor had the value observed; fell back to the column median."""


class ConstantColumnWarning(EnsfsWarning):
    """A constant column was encountered; correlation treated as zero."""


class RankDeficientWarning(EnsfsWarning):
    """Design matrix is rank deficient; minimum-norm solution returned."""


class ConvergenceWarning(EnsfsWarning):
    """Solver hit the sweep cap before reaching tolerance."""


class DegenerateStabilityWarning(EnsfsWarning):
    """Stability denominator degenerate (mean set size 0 or n)."""


class NoFeasibleConfigWarning(EnsfsWarning):
    """No grid point met the size constraint; reporting the closest one."""
