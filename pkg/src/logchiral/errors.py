"""Exception hierarchy shared by all modules."""


class LogChiralError(Exception):
    """Base class for every error raised by this package."""


class MathematicalFailure(LogChiralError):
    """A computation ran but the mathematics refused (CLI exit code 2)."""


class InputError(LogChiralError):
    """Malformed or inconsistent input (CLI exit code 1)."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class NonUnitConstantTerm(MathematicalFailure):
    pass


class EmptyVerifiableRange(MathematicalFailure):
    pass


class NegativeQPower(MathematicalFailure):
    pass


class NonTerminatingRules(InputError):
    pass


class NonNilpotentInput(MathematicalFailure):
    pass


class DenominatorNotClearing(MathematicalFailure):
    pass


class LocalizationMismatch(InputError):
    pass


class NonCanonicalInput(LogChiralError):
    pass


class DegreeCapExceeded(MathematicalFailure):
    pass


class NotTangent(MathematicalFailure):
    pass


class NotDivisorial(MathematicalFailure):
    pass


class JetTruncation(MathematicalFailure):
    """A derivation would raise a jet order past the truncation."""
