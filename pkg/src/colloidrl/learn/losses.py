"""Policy and value losses with their gradients.

Each function returns ``(loss, gradient)`` where the gradient is taken with
respect to the network output it consumes (logits or values). Minimising
the actor losses performs gradient ascent on the policy objective.
"""

from __future__ import annotations

import numpy as np

from .sampling import log_softmax


def _onehot(actions: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((actions.size, n))
    out[np.arange(actions.size), actions] = 1.0
    return out


def vpg_loss(log_probs, advantages) -> float:
    """``-mean(log pi(a_t|s_t) * A_t)``; advantages are treated as constants."""
    lp = np.asarray(log_probs, dtype=np.float64)
    adv = np.asarray(advantages, dtype=np.float64)
    return float(-np.mean(lp * adv))


def ppo_objective_terms(ratio, advantages, clip: float) -> np.ndarray:
    ratio = np.asarray(ratio, dtype=np.float64)
    adv = np.asarray(advantages, dtype=np.float64)
    return np.minimum(ratio * adv, np.clip(ratio, 1.0 - clip, 1.0 + clip) * adv)


def ppo_loss(log_probs_new, log_probs_old, advantages, clip: float) -> float:
    """Clipped surrogate: ``-mean(min(rho A, clip(rho, 1-eps, 1+eps) A))``."""
    if clip <= 0:
        raise ValueError("clip must be positive")
    ratio = np.exp(np.asarray(log_probs_new, dtype=np.float64) - np.asarray(log_probs_old, dtype=np.float64))
    return float(-np.mean(ppo_objective_terms(ratio, advantages, clip)))


def critic_loss(values, returns) -> float:
    v = np.asarray(values, dtype=np.float64)
    g = np.asarray(returns, dtype=np.float64)
    if v.shape != g.shape:
        raise ValueError("values and returns differ in shape")
    return float(0.5 * np.mean((v - g) ** 2))


def vpg_loss_and_grad(logits, actions, advantages):
    logp_all = log_softmax(logits)
    b, a = logp_all.shape
    actions = np.asarray(actions, dtype=np.int64)
    adv = np.asarray(advantages, dtype=np.float64)
    lp = logp_all[np.arange(b), actions]
    loss = vpg_loss(lp, adv)
    dlogits = -(adv / b)[:, None] * (_onehot(actions, a) - np.exp(logp_all))
    return loss, dlogits


def ppo_loss_and_grad(logits, actions, log_probs_old, advantages, clip: float):
    logp_all = log_softmax(logits)
    b, a = logp_all.shape
    actions = np.asarray(actions, dtype=np.int64)
    adv = np.asarray(advantages, dtype=np.float64)
    lp = logp_all[np.arange(b), actions]
    ratio = np.exp(lp - np.asarray(log_probs_old, dtype=np.float64))
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - clip, 1.0 + clip) * adv
    loss = float(-np.mean(np.minimum(unclipped, clipped)))
    # the clipped branch has zero slope whenever min() selects it over the raw term
    active = unclipped <= clipped
    g = np.where(active, unclipped, 0.0)
    dlogits = -(g / b)[:, None] * (_onehot(actions, a) - np.exp(logp_all))
    return loss, dlogits


def critic_loss_and_grad(values, returns):
    v = np.asarray(values, dtype=np.float64)
    g = np.asarray(returns, dtype=np.float64)
    return critic_loss(v, g), (v - g) / v.size


def entropy_and_grad(logits):
    """Mean policy entropy and its gradient with respect to the logits."""
    logp = log_softmax(logits)
    p = np.exp(logp)
    h = -np.sum(p * logp, axis=-1)
    b = logp.shape[0]
    dlogits = -p * (logp + h[:, None]) / b
    return float(h.mean()), dlogits
