"""Exception types shared across the package.

The CLI maps these onto its exit-code contract (see cli.py), so library
code should prefer raising one of them over a bare ValueError whenever the
failure has a clear category.
"""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PrecisionError(ValueError):
    """A requested conversion cannot be met within the documented tolerance."""


class DegenerateParameterError(ValueError):
    """Model parameters make the requested object undefined (e.g. b = 0)."""


class NotAnEquilibriumError(ValueError):
    """The supplied point is not an equilibrium of the vector field."""

    def __init__(self, point, residual):
        self.point = tuple(float(x) for x in point)
        self.residual = float(residual)
        super().__init__(
            f"rhs does not vanish at {self.point}: |rhs| = {self.residual:.3e} > 1e-08"
        )


class UnsupportedCaseError(ValueError):
    """The analysis case is not covered (one order below 1, the other above)."""


class ConfigError(ValueError):
    """A run configuration file or override could not be parsed."""


class NumericError(RuntimeError):
    """An internal numeric step failed in a way that is not a usage error."""
