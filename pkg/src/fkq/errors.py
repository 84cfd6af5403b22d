"""Exception hierarchy shared across the toolkit.

Three families, mapped to CLI exit codes: validation problems (bad input,
exit 2), computation failures (an exact-arithmetic identity that should hold
does not, exit 3), and numerical diagnostics (high-precision evaluation or
extrapolation rejected its own output, exit 4).
"""


class FkqError(Exception):
    exit_code = 1


class ValidationError(FkqError):
    exit_code = 2


class KnotSyntaxError(ValidationError):
    """Knot expression failed to parse; carries position and expectation."""

    def __init__(self, position, expected, text):
        self.position = position
        self.expected = expected
        self.text = text
        super().__init__(
            f"syntax error at position {position}: expected {expected} in {text!r}"
        )


class InvalidTorusParams(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


class NonIntegerExponent(SchemaError):
    pass


class EmptyCoefficient(SchemaError):
    pass


class MissingAPoly(ValidationError):
    pass


class NotXFree(ValidationError):
    pass


class ComputationError(FkqError):
    exit_code = 3


class NonzeroRemainder(ComputationError):
    pass


class NotSymmetric(ComputationError):
    pass


class NumericalDiagnosticError(FkqError):
    exit_code = 4


class DegenerateDenominator(NumericalDiagnosticError):
    pass


class InsufficientWindow(NumericalDiagnosticError):
    pass


class DivergentDiagnostics(NumericalDiagnosticError):
    pass
