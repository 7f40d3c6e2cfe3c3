"""Exception types shared across the library.

The CLI maps these onto exit codes: validation failures exit 1 and
resource-guard rejections exit 2.
"""


class ValidationError(ValueError):
    """Invalid data, dimensions, or configuration."""


class ConfigurationError(ValidationError):
    """Inconsistent estimator / space / defining-function configuration."""


class ResourceGuardError(RuntimeError):
    """An exact-solver size guard was exceeded."""


class SingularGradientError(ValidationError):
    """Gradient requested at a singular point (circular function at x = r*theta)."""


class DegenerateStepError(ValidationError):
    """An Euler step produced a point that cannot be re-projected to its manifold."""


class CloudFormatError(ValidationError):
    """Malformed cloud/manifest file. Carries file and line context."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line is not None:
                prefix += f"{line}:"
            prefix += " "
        super().__init__(prefix + message)
