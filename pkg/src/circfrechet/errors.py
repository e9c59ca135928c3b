"""Exception hierarchy shared by every module.

Each class carries a short ``label`` which the command-line front end prints
on standard error, e.g. ``empty-sample error: ...``.
"""


class CircError(Exception):
    label = "error"

    def __str__(self):
        msg = super().__str__()
        return f"{self.label}: {msg}" if msg else self.label


class DomainError(CircError, ValueError):
    label = "domain error"


class IntegrabilityError(CircError, ArithmeticError):
    label = "integrability error"


class EmptySampleError(CircError, ValueError):
    label = "empty-sample error"


class DegenerateCurvatureError(CircError, ValueError):
    label = "degenerate-curvature error"


class DegenerateWeightsError(CircError, ValueError):
    label = "degenerate-weights error"


class EmptyWindowError(CircError, ValueError):
    label = "empty-window error"


class SingularDesignError(CircError, ArithmeticError):
    label = "singular-design error"


class UnsupportedModelError(CircError, NotImplementedError):
    label = "unsupported-model error"


class PayloadTypeError(CircError, TypeError):
    label = "type error"


class InvalidPointError(CircError, ValueError):
    label = "invalid-point error"


class NoValidBandwidthError(CircError, RuntimeError):
    label = "no-valid-bandwidth error"


class ExperimentInvalidError(CircError, RuntimeError):
    label = "experiment-invalid error"

    def __init__(self, message, census=None):
        super().__init__(message)
        self.census = census or {}


class ParseError(CircError, ValueError):
    label = "parse error"
