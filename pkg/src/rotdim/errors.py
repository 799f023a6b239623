"""Exception types shared by the toolkit.

Each error carries the CLI exit code it maps to, so the dispatcher does not
need a lookup table.
"""


class RotdimError(Exception):
    exit_code = 1


class ConfigError(RotdimError):
    exit_code = 2


class DomainError(RotdimError, ValueError):
    exit_code = 2


class ModelValidationError(ConfigError):
    pass


class InsufficientQuotients(ConfigError):
    pass


class IndexOutOfRange(RotdimError, IndexError):
    exit_code = 2


class UndecidedError(RotdimError):
    exit_code = 3


class NoBracket(UndecidedError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class ExactOverflow(RotdimError):
    exit_code = 4


class PrecisionUnreachable(RotdimError):
    exit_code = 4


class AmbiguousOrder(PrecisionUnreachable):
    """Two log-space indices could not be ordered at working precision."""


class StrategyInapplicable(RotdimError):
    exit_code = 2


class BlockTooLong(RotdimError):
    exit_code = 2


class EmptyBlock(RotdimError):
    exit_code = 2


class DegenerateFit(RotdimError):
    exit_code = 3


class ContainmentFailure(RotdimError):
    exit_code = 5


class CertificateFailure(RotdimError):
    exit_code = 5
