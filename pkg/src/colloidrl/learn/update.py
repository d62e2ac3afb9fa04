"""Actor-critic policy update from one collected episode."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Dict, Optional

import numpy as np

from .losses import critic_loss_and_grad, entropy_and_grad, ppo_loss_and_grad, vpg_loss_and_grad
from .networks import ActorCritic
from .returns import advantages_gae, expected_returns, normalize

ALGORITHMS = ("vpg", "ppo")
RETURNS = ("expected", "gae")
BOOTSTRAPS = ("terminal", "truncated")


@dataclass(frozen=True)
class UpdateConfig:
    algorithm: str = "vpg"
    returns: str = "expected"
    sampler: str = "categorical"
    gamma: float = 0.99
    lam: float = 0.95
    learning_rate: float = 1e-3
    clip: float = 0.2
    epochs: int = 4
    normalize_advantages: bool = True
    optimizer: str = "sgd"
    critic_coef: float = 1.0
    entropy_coef: float = 0.0
    intrinsic_weight: float = 1.0
    bootstrap: str = "terminal"
    exclude_explored: bool = False

    def __post_init__(self):
        from .sampling import SAMPLERS

        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.returns not in RETURNS:
            raise ValueError(f"returns must be one of {RETURNS}")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}")
        if self.bootstrap not in BOOTSTRAPS:
            raise ValueError(f"bootstrap must be one of {BOOTSTRAPS}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")
        if not self.clip > 0:
            raise ValueError("clip must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError("optimizer must be 'sgd' or 'adam'")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Batch:
    """One episode for one species, time along axis 0 and agents along axis 1."""

    observations: np.ndarray  # (T, N, D)
    actions: np.ndarray  # (T, N)
    log_probs: np.ndarray  # (T, N)
    values: np.ndarray  # (T, N)
    rewards: np.ndarray  # (T, N)
    intrinsic: Optional[np.ndarray] = None  # (T, N)
    explored: Optional[np.ndarray] = None  # (T, N) bool
    final_observations: Optional[np.ndarray] = None  # (N, D)

    def __post_init__(self):
        t = self.actions.shape[0]
        if t == 0:
            raise ValueError("empty batch")
        for name in ("observations", "log_probs", "values", "rewards"):
            if getattr(self, name).shape[0] != t:
                raise ValueError(f"batch field {name} has {getattr(self, name).shape[0]} steps, expected {t}")


def compute_targets(net: ActorCritic, batch: Batch, config: UpdateConfig):
    """Advantages (possibly normalised) and critic targets, both (T, N)."""
    rewards = batch.rewards.astype(np.float64)
    if batch.intrinsic is not None:
        rewards = rewards + config.intrinsic_weight * batch.intrinsic
    values = batch.values
    bootstrap = np.zeros(values.shape[1:])
    if config.bootstrap == "truncated" and batch.final_observations is not None:
        _, bootstrap = net.forward(batch.final_observations)
    if config.returns == "expected":
        targets = expected_returns(rewards, config.gamma, bootstrap)
        adv = targets - values
    else:
        adv = advantages_gae(rewards, values, config.gamma, config.lam, bootstrap)
        targets = adv + values
    if config.normalize_advantages:
        adv = normalize(adv)
    return adv, targets


def loss_and_grads(net: ActorCritic, obs, actions, advantages, targets, config: UpdateConfig,
                   old_log_probs=None, actor_mask=None, params=None):
    """Total loss (actor + critic_coef * critic - entropy_coef * entropy) and gradients."""
    logits, values, cache = net.forward(obs, params=params, return_cache=True)
    adv = advantages if actor_mask is None else np.where(actor_mask, advantages, 0.0)
    scale = 1.0 if actor_mask is None else adv.size / max(int(np.count_nonzero(actor_mask)), 1)
    if config.algorithm == "vpg":
        a_loss, dlogits = vpg_loss_and_grad(logits, actions, adv)
    else:
        a_loss, dlogits = ppo_loss_and_grad(logits, actions, old_log_probs, adv, config.clip)
    a_loss *= scale
    dlogits = dlogits * scale
    c_loss, dvalues = critic_loss_and_grad(values, targets)
    ent, dent = entropy_and_grad(logits)
    total = a_loss + config.critic_coef * c_loss - config.entropy_coef * ent
    grads = net.backward(cache, dlogits - config.entropy_coef * dent, config.critic_coef * dvalues, params=params)
    parts = {"actor_loss": a_loss, "critic_loss": c_loss, "entropy": ent}
    return total, grads, parts


def update_policy(net: ActorCritic, optimizer, batch: Batch, config: UpdateConfig) -> Dict[str, float]:
    """Apply one vpg step, or ``epochs`` ppo steps, to ``net`` in place."""
    adv, targets = compute_targets(net, batch, config)
    d = batch.observations.shape[-1]
    obs = batch.observations.reshape(-1, d)
    actions = batch.actions.reshape(-1)
    old_lp = batch.log_probs.reshape(-1)
    adv_f = adv.reshape(-1)
    tgt_f = targets.reshape(-1)
    mask = None
    if config.exclude_explored and batch.explored is not None:
        mask = ~batch.explored.reshape(-1).astype(bool)
    n_steps = 1 if config.algorithm == "vpg" else config.epochs
    first = None
    for _ in range(n_steps):
        total, grads, parts = loss_and_grads(net, obs, actions, adv_f, tgt_f, config, old_lp, mask)
        if not math.isfinite(total):
            raise FloatingPointError("non-finite loss; update aborted")
        optimizer.step(net.params, grads)
        if first is None:
            first = parts
    rewards = batch.rewards if batch.intrinsic is None else batch.rewards + config.intrinsic_weight * batch.intrinsic
    return {
        **first,
        "mean_return": float(expected_returns(rewards, config.gamma)[0].mean()),
        "n_samples": int(actions.size),
    }
