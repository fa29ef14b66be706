"""Exception hierarchy shared by every dpat module."""


class DpatError(Exception):
    """Base class for all library errors."""


class FormulaSyntaxError(DpatError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class FieldError(DpatError):
    pass


class NotPrime(FieldError):
    pass


class DegreeZero(FieldError):
    pass


class OrderExceedsCap(FieldError):
    pass


class DivisionByZero(FieldError, ZeroDivisionError):
    pass


class FieldMismatch(FieldError):
    pass


class EvaluationError(DpatError):
    pass


class UncoveredFreeVariable(EvaluationError):
    pass


class EnumerationCapExceeded(EvaluationError):
    pass


class MembershipFormatError(DpatError):
    pass


class EstimateError(DpatError):
    pass


class TooFewPoints(EstimateError):
    pass


class PatternError(DpatError):
    pass


class CharacteristicTwo(PatternError):
    pass


class ConstantGapMap(PatternError):
    pass


class IntegerSetError(DpatError):
    pass


class MagnitudeExceeded(IntegerSetError):
    pass


class ArityMismatch(IntegerSetError):
    pass


class WindowTooLarge(IntegerSetError):
    pass


class UnknownCatalogEntry(DpatError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ConfigError(DpatError):
    pass
