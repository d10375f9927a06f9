"""Exception hierarchy shared by every module."""


class FairLRFError(Exception):
    """Base class for all errors raised by this package."""


class InvalidMatrix(FairLRFError, ValueError):
    pass


class ShapeError(FairLRFError, ValueError):
    pass


class RankError(FairLRFError, ValueError):
    pass


class ConvergenceError(FairLRFError, RuntimeError):
    pass


class EmptyBatch(FairLRFError, ValueError):
    pass


class EmptyDataset(FairLRFError, ValueError):
    pass


class LayerError(FairLRFError, IndexError):
    pass


class TargetError(FairLRFError, ValueError):
    pass


class DataError(FairLRFError, ValueError):
    pass


class ContextError(FairLRFError, ValueError):
    pass


class PlanError(FairLRFError, ValueError):
    pass


class LabelError(FairLRFError, ValueError):
    pass


class ConfigError(FairLRFError, ValueError):
    pass


class FormatError(FairLRFError, ValueError):
    """Malformed weight, matrix or dataset file."""
