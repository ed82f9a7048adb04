from enum import Enum, IntEnum

GENOME_LENGTH = 56
BLOCK_COUNT = 4
BLOCK_GENES = 14
INTERNAL_NODES = (2, 3, 4, 5)
REDUCTION_BLOCK = 3
BLOCK_NAMES = ("B0", "B1", "B2", "R")


class Operation(IntEnum):
    NONE = 0
    SKIP_CONNECT = 1
    SEP_CONV_3X3 = 2
    RES_SEP_CONV_3X3 = 3

    @property
    def is_parametric(self) -> bool:
        return self in (Operation.SEP_CONV_3X3, Operation.RES_SEP_CONV_3X3)


class Fidelity(Enum):
    LOW = "low"
    HIGH = "high"


class Mode(Enum):
    SURROGATE_HELPER = "SH"
    HIGH = "H"
    LOW = "L"
    SURROGATE = "S"


class SurrogateKind(Enum):
    RBF = "rbf"
    MLP = "mlp"


class AttackKind(Enum):
    FGSM = "fgsm"
    PGD = "pgd"


class ExitCode(IntEnum):
    OK = 0
    CONFIG = 2
    IO = 3
    MISSING_ARTIFACT = 4
    NUMERIC = 5
