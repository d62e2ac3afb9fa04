from .persistence import FOOTER, REWARD_HEADER, TRAJECTORY_HEADER, CsvLog, read_csv, trajectory_stats
from .trainer import (
    ContinuousTrainer,
    EpisodeSummary,
    EpisodicTrainer,
    SpeciesSummary,
    TrainConfig,
    Trainer,
    TrainingError,
    continuous_training,
    episodic_training,
    record_episode,
)

__all__ = [
    "FOOTER",
    "REWARD_HEADER",
    "TRAJECTORY_HEADER",
    "ContinuousTrainer",
    "CsvLog",
    "EpisodeSummary",
    "EpisodicTrainer",
    "SpeciesSummary",
    "TrainConfig",
    "Trainer",
    "TrainingError",
    "continuous_training",
    "episodic_training",
    "read_csv",
    "record_episode",
    "trajectory_stats",
]
