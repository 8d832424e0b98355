"""Exception types shared across the engine.

Each class carries a ``code`` string matching the error names used in
reports, so the CLI can surface failures verbatim with their stage.
"""


class RigidCohError(Exception):
    code = "ERROR"


class ContextError(RigidCohError):
    code = "CONTEXT_ERROR"


class PadicDivisionByZero(RigidCohError, ZeroDivisionError):
    code = "DIVISION_BY_ZERO"


class IndeterminateError(RigidCohError, ArithmeticError):
    """An operation needed digits that cancellation already destroyed."""

    code = "INDETERMINATE"


class UnboundVariable(RigidCohError, KeyError):
    code = "UNBOUND_VARIABLE"

    def __str__(self):
        return Exception.__str__(self)


class TruncationOverflow(RigidCohError):
    code = "TRUNCATION_OVERFLOW"

    def __init__(self, message, counts=None):
        super().__init__(message)
        self.counts = dict(counts or {})


class Undecided(RigidCohError):
    code = "UNDECIDED"


class CertificateMissing(RigidCohError):
    code = "CERTIFICATE_MISSING"


class BudgetExceeded(RigidCohError):
    code = "BUDGET_EXCEEDED"


class WindowMismatch(RigidCohError):
    code = "WINDOW_MISMATCH"


class RankUncertain(RigidCohError):
    code = "RANK_UNCERTAIN"

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class NegativeBetti(RigidCohError):
    code = "NEGATIVE_BETTI"


class NotStabilized(RigidCohError):
    code = "NOT_STABILIZED"

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class ParseError(RigidCohError):
    code = "PARSE_ERROR"

    def __init__(self, message, line=1, column=1, token=None):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column
        self.token = token
