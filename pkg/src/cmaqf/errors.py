"""Exception hierarchy shared across the package."""


class CmaqfError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(CmaqfError, ValueError):
    """A model or configuration parameter is outside its admissible domain."""


class StabilityError(CmaqfError, ValueError):
    """An autoregressive polynomial has a root with non-negative real part."""


class ConventionError(CmaqfError, ValueError):
    """Moving-average coefficients violate the normalisation convention."""


class NonStationaryError(CmaqfError, ValueError):
    """A delay-equation characteristic function vanishes in the closed left half-plane."""


class GridError(CmaqfError, ValueError):
    """Incompatible grid geometry (step does not divide the sampling spacing, etc.)."""


class ConvergenceError(CmaqfError, ArithmeticError):
    """A truncated infinite sum or integral has a divergent or unbounded tail."""


class TruncationError(CmaqfError, ArithmeticError):
    """Kernel mass outside the simulation window exceeds the disclosed bias budget."""


class ConditionsRefutedError(CmaqfError, RuntimeError):
    """A computation was requested whose condition check came back refuted."""


class ConfigError(CmaqfError, ValueError):
    """A run configuration fails schema validation."""
