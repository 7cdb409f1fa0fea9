from .anchor import AnchorState, ema_update, make_ema_anchor, make_frozen_anchor
from .counters import PassCounter
from .episodes import (
    EpisodeReport,
    OnlineAdapter,
    TTTConfig,
    identity_collapse_probe,
    idempotence_error,
    idempotence_errors,
    online_step,
    ttt_episode_naive,
    ttt_episode_offline,
    ttt_loss
)

__all__ = [
    "AnchorState",
    "ema_update",
    "make_ema_anchor",
    "make_frozen_anchor",
    "PassCounter",
    "EpisodeReport",
    "OnlineAdapter",
    "TTTConfig",
    "identity_collapse_probe",
    "idempotence_error",
    "idempotence_errors",
    "online_step",
    "ttt_episode_naive",
    "ttt_episode_offline",
    "ttt_loss"
]
