"""Exception types raised across the package.

Each stage of the pipeline has its own exception class so callers can
distinguish a bad input file from a solver that failed to converge.
"""


class TaxonetError(Exception):
    """Base class for all package errors."""


class LoadError(TaxonetError):
    """Count table file is malformed (negative/non-numeric/missing cells,
    duplicate labels, ragged rows)."""


class FilterError(TaxonetError):
    """Taxa filtering removed every taxon."""


class TransformError(TaxonetError):
    """A data transform received input it cannot handle (zeros without a
    pseudo-count, an all-zero sample row)."""


class EstimatorError(TaxonetError):
    """An association estimator received degenerate input."""


class SolverError(TaxonetError):
    """Numerical failure inside an optimization routine."""


class PathError(TaxonetError):
    """Penalty path could not be constructed."""


class SelectionError(TaxonetError):
    """Model selection had no usable candidate fits."""


class RuleError(TaxonetError):
    """Binarization rule is incompatible with the method result."""


class ConsensusError(TaxonetError):
    """Networks cannot be combined (taxa roster mismatch)."""


class ThresholdError(TaxonetError):
    """Consensus threshold outside the valid range."""


class ExportError(TaxonetError):
    """Writing a network export failed."""


class RenderError(TaxonetError):
    """Rendering input is invalid or writing the image failed."""


class ConfigError(TaxonetError):
    """Pipeline configuration is invalid."""
