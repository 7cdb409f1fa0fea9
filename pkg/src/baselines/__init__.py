from .actmad import ActivationStats, actmad_episode, alignment_loss, base_predict, collect_stats

__all__ = [
    "ActivationStats",
    "actmad_episode",
    "alignment_loss",
    "base_predict",
    "collect_stats"
]
