class WrongLength(ValueError):
    def __init__(self, length: int):
        self.length = length
        super().__init__(f"Genome must have 56 genes, got {length}.")


class GeneOutOfRange(ValueError):
    def __init__(self, index: int, value):
        self.index = index
        self.value = value
        super().__init__(f"Gene {index} has value {value!r} outside of {{0,1,2,3}}.")


class MalformedGenomeString(ValueError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class LengthMismatch(ValueError):
    pass


class ArityMismatch(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class DegenerateTrainingSet(ValueError):
    pass


class ShapeError(ValueError):
    pass


class EmptySplit(ValueError):
    pass


class PointBeyondReference(ValueError):
    pass


class ConfigError(ValueError):
    pass


class CheckpointError(ValueError):
    pass


class EvaluatorUnavailable(RuntimeError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class NumericFailure(RuntimeError):
    pass
