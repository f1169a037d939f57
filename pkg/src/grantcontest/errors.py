"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid parameter or out-of-domain argument."""


class SchemaError(ValueError):
    """Malformed input file: bad header, unparseable cell, or invalid value."""


class NumericalError(RuntimeError):
    """A numerical procedure produced an inconsistent or unusable result."""


class ConvergenceError(NumericalError):
    """An iterative fit failed to converge within its iteration budget."""


class RankDeficiencyError(ParameterError):
    """A design matrix is rank deficient; the message names the collinear columns."""
