"""Exception types shared across the package.

``ValidationError`` means the caller handed in something outside a documented
domain; ``NumericError`` means the inputs were acceptable but the computation
could not produce a trustworthy number. The CLI maps them to exit codes 1 and 2.
"""


class ValidationError(ValueError):
    """Input rejected by a domain check.

    ``code`` is a short stable diagnostic identifier used by the CLI:

    ====  ==========================================
    E100  config syntax error
    E101  missing required field
    E102  type mismatch
    E103  unknown key
    E104  weights do not sum to 1
    E105  value outside its domain (default)
    E106  distributional input to a point routine
    ====  ==========================================
    """

    def __init__(self, message, code="E105"):
        super().__init__(message)
        self.code = code


class ModeError(ValidationError):
    """A point-estimate routine was given distributional inputs."""

    def __init__(self, message):
        super().__init__(message, code="E106")


class NumericError(ArithmeticError):
    """The computation failed (non-convergence, non-finite objective, ...)."""


class DivisionByZeroError(NumericError, ZeroDivisionError):
    pass
