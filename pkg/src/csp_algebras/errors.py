class CSPError(Exception):
    """Base class for errors raised by this package."""


class SignatureError(CSPError, ValueError):
    """Structures or relations whose signatures do not line up."""


class GuardExceeded(CSPError):
    """A size guard was hit; the question is undecided at this scale."""


class ContractError(CSPError):
    """A precondition or postcondition of an operation was violated."""


class NonCosetError(ContractError):
    """A constraint expected to be affine over GF(2) was not a coset."""


class PremiseError(ContractError):
    """The input does not satisfy the premise an algorithm relies on."""


class NotFoundError(CSPError):
    """A search for a witness finished without success."""


class ParseError(CSPError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
