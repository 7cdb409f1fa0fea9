from .dataset import Dataset, Standardization
from .records import MetricsRecord, StudyRecord
from .experiment import RunState, SummaryRowState

__all__ = [
    "Dataset",
    "Standardization",
    "MetricsRecord",
    "StudyRecord",
    "RunState",
    "SummaryRowState"
]
