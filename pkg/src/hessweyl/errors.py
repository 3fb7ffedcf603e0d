"""Exception classes shared by the library and the command line."""


class HessWeylError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for this class."""

    exit_code = 1


class FormParseError(HessWeylError, ValueError):
    exit_code = 2


class BudgetExceeded(HessWeylError, RuntimeError):
    """An enumeration would visit more points than the configured budget."""

    exit_code = 3

    def __init__(self, what: str, size: int, budget: int):
        super().__init__(f"{what}: {size} points exceeds budget {budget}")
        self.size = size
        self.budget = budget


class BadPrimeError(HessWeylError, ValueError):
    exit_code = 2


class NoFullRankMinor(HessWeylError, ArithmeticError):
    """Raised when the M-matrix has rank below R; the minor-arc branch applies."""


class VerificationFailed(HessWeylError):
    exit_code = 4
