"""Exception hierarchy.  Every domain error derives from :class:`RobustNCError`."""


class RobustNCError(Exception):
    """Base class; the CLI maps these to exit status 1."""

    code = "domain-error"


class FieldError(RobustNCError):
    code = "field"


class ZeroDivision(FieldError, ZeroDivisionError):
    code = "division-by-zero"


class DimensionError(RobustNCError):
    code = "dimension"


class SingularMatrixError(RobustNCError):
    code = "singular"


class NetworkError(RobustNCError):
    code = "network"


class FlowError(NetworkError):
    code = "flow"


class CodeError(RobustNCError):
    code = "code"


class DecodingError(RobustNCError):
    code = "decode"


class InvariantBreach(RobustNCError):
    """Raised when a condition guaranteed by construction fails."""

    code = "invariant"


class ConstructionError(RobustNCError):
    code = "construction"


class FieldTooSmall(ConstructionError):
    code = "field-too-small"


class CapacityError(RobustNCError):
    code = "capacity"


class GradientCodingError(RobustNCError):
    code = "gradient"


class FormatError(RobustNCError):
    code = "format"
