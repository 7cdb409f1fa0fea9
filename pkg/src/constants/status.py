from enum import Enum


class OptimizerKind(str, Enum):
    """Update rules available to training and test-time episodes."""
    SGD = "sgd"
    ADAM = "adam"


class LossNorm(str, Enum):
    """Norm instantiating ‖·‖ in every loss and distance."""
    L1 = "l1"
    L2 = "l2"


class Activation(str, Enum):
    RELU = "relu"
    ELU = "elu"


class TaskKind(str, Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"


class NeutralKind(str, Enum):
    """How the neutral "no label" signal is built."""
    ZEROS = "zeros"
    CONSTANT = "constant"
    DEFAULT = "default"


class EvalMode(str, Enum):
    Y0 = "y0"
    ORACLE_AUX = "oracle-aux"


class TTTMode(str, Enum):
    OFFLINE = "offline"
    NAIVE = "naive"
    ONLINE = "online"


class AnchorKind(str, Enum):
    FROZEN = "frozen"
    EMA = "ema"


class CorruptionKind(str, Enum):
    FEATURE_ZEROING = "feature_zeroing"
    GAUSSIAN_NOISE = "gaussian_noise"
    LABEL_RANGE_HOLDOUT = "label_range_holdout"


class SyntheticFn(str, Enum):
    LINEAR = "linear"
    FRIEDMAN = "friedman"
    BLOBS = "blobs"


class MethodName(str, Enum):
    """Method identifiers as they appear in metrics output."""
    BASE = "base"
    ACTMAD_LITE = "actmad_lite"
    IT3_OFFLINE = "it3_offline"
    IT3_NAIVE = "it3_naive"
    IT3_ONLINE = "it3_online"


class CellStatus(str, Enum):
    OK = "ok"
    ABORTED = "aborted"


class ExitCode(int, Enum):
    SUCCESS = 0
    ABORTED = 1
    CONFIG_ERROR = 2
