"""Exception types shared across the package."""


class NotAntisymmetric(ValueError):
    """Matrix handed to vex() is not antisymmetric within tolerance."""


class ZeroVector(ValueError):
    """A vector that must be normalized has (numerically) zero length."""


class CollinearInputs(ValueError):
    """Two reference vectors are too close to parallel to span a third."""


class DegenerateGeometry(ValueError):
    """Vector geometry does not determine the attitude (rank-deficient)."""


class EnvelopeViolation(RuntimeError):
    """An error channel left its admissible envelope band in strict mode."""


class NearSingular(RuntimeError):
    """Attitude error is within guard distance of the unstable set."""


class ConfigError(ValueError):
    """A scenario or CLI configuration is invalid."""
