"""Exception hierarchy. Everything derives from ``KextractError`` (a ValueError)."""


class KextractError(ValueError):
    pass


class MalformedEncoding(KextractError):
    pass


class ParseError(KextractError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateKey(ParseError):
    pass


class UndefinedComplexity(KextractError):
    """A complexity needed for the computation has no description in the system."""

    def __init__(self, quantity):
        self.quantity = quantity
        super().__init__(f"undefined complexity: {quantity}")


class SizeLimitError(KextractError):
    pass


class NotFoundError(KextractError):
    pass


class ExhaustedTries(KextractError):
    def __init__(self, tries):
        self.tries = tries
        super().__init__(f"no balanced table found in {tries} tries")


class HypothesisViolation(KextractError):
    def __init__(self, clause):
        self.clause = clause
        super().__init__(f"hypothesis violated: {clause}")


class LengthMismatch(KextractError):
    pass


class PartialFunctionError(KextractError):
    pass
