from typing import Any, Dict, List, Optional, TypedDict

from .records import MetricsRecord, StudyRecord


class SummaryRowState(TypedDict):
    method: str
    batch_size: int
    level: int
    severity: float
    count: int
    mean_error: Optional[float]
    std_error: Optional[float]
    mean_idem: Optional[float]
    overhead: Optional[float]
    mean_wall_time_ms: float


class RunState(TypedDict, total=False):
    config: Any
    weights: Optional[str]
    records: List[MetricsRecord]
    studies: List[StudyRecord]
    summary: List[SummaryRowState]
    files: Dict[str, str]
    aborted_cells: int
    last_action: str
