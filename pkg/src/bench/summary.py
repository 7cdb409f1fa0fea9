from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from ..constants.status import MethodName
from ..exceptions.handler import ContractError
from ..states.records import MetricsRecord
from ..utils.logging import get_logger

logger = get_logger("bench.summary")


@dataclass
class SummaryRow:
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

    def to_dict(self) -> dict:
        return asdict(self)


def _method_rank(method: str) -> Tuple[int, str]:
    order = [m.value for m in MethodName]
    return (order.index(method) if method in order else len(order), method)


def _mean(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def summarize(records: Sequence[MetricsRecord]) -> List[SummaryRow]:
    """
    Aggregate ok records per (method, batch size, level).

    Errors get a mean and population std; overhead is the mean wall time
    divided by the base method's mean wall time at the same level and
    batch size (None without a timed base).
    """
    groups: Dict[Tuple[str, int, int], List[MetricsRecord]] = defaultdict(list)
    for record in records:
        if record.ok and record.task_error is not None:
            groups[(record.method, record.batch_size, record.level)].append(record)

    walls = {key: float(np.mean([r.wall_time_ms for r in group])) for key, group in groups.items()}

    rows = []
    for key in sorted(groups, key=lambda k: (_method_rank(k[0]), k[1], k[2])):
        method, batch_size, level = key
        group = groups[key]
        errors = [r.task_error for r in group]
        idem = [r.mean_idempotence_error for r in group if r.mean_idempotence_error is not None]
        base_wall = walls.get((MethodName.BASE.value, batch_size, level))
        overhead = walls[key] / base_wall if base_wall else None
        rows.append(SummaryRow(
            method=method,
            batch_size=batch_size,
            level=level,
            severity=group[0].severity,
            count=len(group),
            mean_error=float(np.mean(errors)),
            std_error=float(np.std(errors)),
            mean_idem=_mean(idem),
            overhead=overhead,
            mean_wall_time_ms=walls[key]
        ))

    skipped = sum(1 for r in records if not r.ok)
    if skipped:
        logger.warning(f"summarize: {skipped} aborted record(s) left out")
    return rows


def spearman(a: Sequence[float], b: Sequence[float]) -> float:
    """
    Spearman rank correlation, ties by average rank.

    A constant input has no rank order; the correlation is reported as 0.0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ContractError("spearman needs two 1-D sequences of equal length", {"a": a.shape, "b": b.shape})
    if len(a) < 3:
        raise ContractError("spearman needs at least 3 values", {"length": len(a)})

    rank_a = rankdata(a, method="average")
    rank_b = rankdata(b, method="average")
    if np.ptp(rank_a) == 0 or np.ptp(rank_b) == 0:
        logger.warning("spearman: constant input, correlation undefined; returning 0.0")
        return 0.0
    rho = float(np.corrcoef(rank_a, rank_b)[0, 1])
    return float(np.clip(rho, -1.0, 1.0))
