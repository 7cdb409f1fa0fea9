from .corruptions import CorruptionSpec, corrupt, holdout_split, make_levels
from .stream import StreamItem, StreamSchedule, item_severity, stream, stream_arrays

__all__ = [
    "CorruptionSpec",
    "corrupt",
    "holdout_split",
    "make_levels",
    "StreamItem",
    "StreamSchedule",
    "item_severity",
    "stream",
    "stream_arrays"
]
