"""Exception types raised across the package."""


class NoFineTuneError(Exception):
    """Base class for all errors raised by this package."""


class CycleError(NoFineTuneError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("directed cycle: " + " -> ".join(map(str, self.cycle)))


class DuplicateNodeError(NoFineTuneError):
    pass


class UnknownNodeError(NoFineTuneError):
    pass


class DisjointnessError(NoFineTuneError):
    pass


class UnknownVariableError(NoFineTuneError):
    pass


class ZeroProbabilityEvent(NoFineTuneError):
    pass


class NormalizationError(NoFineTuneError):
    pass


class KernelMismatchError(NoFineTuneError):
    pass


class NonBinaryContextError(NoFineTuneError):
    pass


class UnknownMeasurementError(NoFineTuneError):
    pass


class SupportError(NoFineTuneError):
    pass


class ExplosionError(NoFineTuneError):
    pass


class UndefinedConditional(NoFineTuneError):
    pass


class ModelMismatchError(NoFineTuneError):
    pass
