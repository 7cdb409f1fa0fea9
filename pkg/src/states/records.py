from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..constants.status import CellStatus


class MetricsRecord(BaseModel):
    """One evaluated (method, batch size, level, seed) cell."""
    model_config = ConfigDict(extra="forbid")

    method: str
    level: int = Field(ge=0)
    seed: int
    task_error: Optional[float] = Field(default=None, ge=0)
    mean_idempotence_error: Optional[float] = Field(default=None, ge=0)
    episodes: int = Field(default=0, ge=0)
    forward_passes: int = Field(default=0, ge=0)
    backward_passes: int = Field(default=0, ge=0)
    wall_time_ms: float = Field(default=0.0, ge=0)
    batch_size: int = Field(default=1, ge=1)
    severity: float = 0.0
    diagnostic_passes: int = Field(default=0, ge=0)
    aborted_episodes: int = Field(default=0, ge=0)
    probe_identity_gap: Optional[float] = None
    status: CellStatus = CellStatus.OK
    error: Optional[Dict[str, Any]] = None

    @property
    def ok(self) -> bool:
        return self.status == CellStatus.OK

    def comparable(self) -> Dict[str, Any]:
        """Every field except wall time, for determinism comparisons."""
        return self.model_dump(mode="json", exclude={"wall_time_ms"})


class StudyRecord(BaseModel):
    """Per-seed result of one of the analysis studies."""
    model_config = ConfigDict(extra="forbid")

    study: str
    seed: int
    metrics: Dict[str, Optional[float]] = Field(default_factory=dict)
    passed: Optional[bool] = None
