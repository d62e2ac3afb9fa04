from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .exploration import RandomExploration, apply_exploration, exploration_schedule
from .losses import critic_loss, ppo_loss, vpg_loss
from .networks import ActorCritic, DenseNet
from .optim import SGD, Adam, NonFiniteGradient, gradient_ascent_update, make_optimizer
from .returns import advantages_expected, advantages_gae, expected_returns, td_residuals
from .rnd import RNDReward
from .sampling import log_softmax, sample_action, softmax
from .update import Batch, UpdateConfig, update_policy

__all__ = [
    "SGD",
    "ActorCritic",
    "Adam",
    "Batch",
    "CheckpointError",
    "DenseNet",
    "NonFiniteGradient",
    "RNDReward",
    "RandomExploration",
    "UpdateConfig",
    "advantages_expected",
    "advantages_gae",
    "apply_exploration",
    "critic_loss",
    "expected_returns",
    "exploration_schedule",
    "gradient_ascent_update",
    "load_checkpoint",
    "log_softmax",
    "make_optimizer",
    "ppo_loss",
    "sample_action",
    "save_checkpoint",
    "softmax",
    "td_residuals",
    "update_policy",
    "vpg_loss",
]
