"""Exception types shared by every module."""


class DworkAlgError(Exception):
    """Base class for all library errors."""


class NonUnit(DworkAlgError, ZeroDivisionError):
    pass


class PrecisionExhausted(DworkAlgError):
    pass


class Overflow(DworkAlgError):
    """A result left the declared exponent window or order cap."""


class Unsupported(DworkAlgError):
    pass


class DomainError(DworkAlgError, ValueError):
    pass


class Ambiguous(DworkAlgError):
    pass


class ParseError(DworkAlgError):
    def __init__(self, message, line=1, column=1, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at line {line}, column {column}"
        if self.expected:
            detail += " (expected one of: " + ", ".join(self.expected) + ")"
        super().__init__(detail)
