"""Exception hierarchy shared by every module of the package."""


class SqcError(Exception):
    """Base class for all errors raised by sqc."""


class OutOfDomain(SqcError):
    pass


class DimensionMismatch(SqcError):
    pass


class NonFiniteValue(SqcError):
    pass


class NoGradient(SqcError):
    pass


class ExpressionSyntaxError(SqcError):
    """Malformed expression; ``offset`` is the byte offset of the offending token."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifier(ExpressionSyntaxError):
    pass


class ArityMismatch(ExpressionSyntaxError):
    pass


class VariableOutOfRange(ExpressionSyntaxError):
    pass


class DomainError(SqcError):
    """Arithmetic domain violation during expression evaluation."""

    def __init__(self, message, subexpression):
        super().__init__(f"{message} in {subexpression}")
        self.subexpression = subexpression


class NoEffectiveQueries(SqcError):
    pass


class PremiseFails(SqcError):
    pass


class IdentityError(SqcError):
    """An algebraic identity that must hold up to rounding was violated."""


class NoViolationFound(SqcError):
    pass


class NotUnimodal(SqcError):
    def __init__(self, verdict):
        super().__init__(f"segment restriction is not unimodal: witness {verdict.witness}")
        self.verdict = verdict


class QueryError(SqcError):
    """Evaluation failure during a sampled run, with the offending query attached."""

    def __init__(self, cause, query):
        super().__init__(f"{cause} at query {query}")
        self.cause = cause
        self.query = query
