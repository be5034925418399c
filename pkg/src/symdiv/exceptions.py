"""Exception hierarchy shared by every module."""


class SymdivError(Exception):
    """Base class for all errors raised by symdiv."""

    #: short machine-readable code used in CLI error records
    code = "error"


class InvalidParam(SymdivError, ValueError):
    code = "invalid_param"


class NonConvergent(SymdivError, ArithmeticError):
    code = "non_convergent"


class NonFinite(SymdivError, ArithmeticError):
    code = "non_finite"


class NoSignChange(SymdivError, ValueError):
    code = "no_sign_change"


class DivergentMean(SymdivError, ArithmeticError):
    code = "divergent_mean"


class QuantileFailure(SymdivError, ArithmeticError):
    code = "quantile_failure"


class SupportMismatch(SymdivError, ValueError):
    code = "support_mismatch"


class ConstraintViolated(SymdivError, ValueError):
    code = "constraint_violated"


class DegenerateLink(SymdivError, ValueError):
    code = "degenerate_link"


class OutOfDomain(SymdivError, ValueError):
    code = "out_of_domain"


class AllCensored(SymdivError, ValueError):
    code = "all_censored"


class SeparationDetected(SymdivError, ArithmeticError):
    code = "separation_detected"


class DimensionMismatch(SymdivError, ValueError):
    code = "dimension_mismatch"


class TooLarge(SymdivError, ValueError):
    code = "too_large"


class EmptyInput(SymdivError, ValueError):
    code = "empty_input"


class BoundViolation(SymdivError, ArithmeticError):
    code = "bound_violation"


class ParseError(SymdivError, ValueError):
    code = "parse_error"

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class MissingColumn(SymdivError, KeyError):
    code = "missing_column"

    def __str__(self):
        return str(self.args[0]) if self.args else "missing column"


class NonPositiveForLog(SymdivError, ValueError):
    code = "non_positive_for_log"


class InvalidKind(SymdivError, ValueError):
    code = "invalid_kind"
