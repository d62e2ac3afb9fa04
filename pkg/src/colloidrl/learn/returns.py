"""Return and advantage estimators.

All functions take time along axis 0; extra axes (e.g. one column per
agent) are carried along.
"""

from __future__ import annotations

import numpy as np

STD_FLOOR = 1e-8


def expected_returns(rewards, gamma: float, bootstrap=0.0) -> np.ndarray:
    """Discounted reward-to-go ``G_t = sum_{t' >= t} gamma^(t'-t) r_t'``.

    ``bootstrap`` is the value of the state after the last reward
    (0 for an episode that ended by design).
    """
    r = np.asarray(rewards, dtype=np.float64)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    if not np.all(np.isfinite(r)):
        raise ValueError("rewards must be finite")
    out = np.empty_like(r)
    running = np.zeros(r.shape[1:]) + bootstrap
    for t in range(r.shape[0] - 1, -1, -1):
        running = r[t] + gamma * running
        out[t] = running
    return out


def normalize(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return (x - x.mean()) / max(float(x.std()), STD_FLOOR)


def advantages_expected(returns, values, normalize_advantages: bool = False) -> np.ndarray:
    g = np.asarray(returns, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if g.shape != v.shape:
        raise ValueError(f"returns {g.shape} and values {v.shape} differ in shape")
    adv = g - v
    return normalize(adv) if normalize_advantages else adv


def td_residuals(rewards, values, gamma: float, bootstrap=0.0) -> np.ndarray:
    r = np.asarray(rewards, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if r.shape != v.shape:
        raise ValueError(f"rewards {r.shape} and values {v.shape} differ in shape")
    nxt = np.empty_like(v)
    nxt[:-1] = v[1:]
    nxt[-1] = bootstrap
    return r + gamma * nxt - v


def advantages_gae(rewards, values, gamma: float, lam: float, bootstrap=0.0, normalize_advantages: bool = False) -> np.ndarray:
    """Generalized advantage estimation with terminal value ``bootstrap``."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    delta = td_residuals(rewards, values, gamma, bootstrap)
    adv = np.empty_like(delta)
    running = np.zeros(delta.shape[1:])
    for t in range(delta.shape[0] - 1, -1, -1):
        running = delta[t] + gamma * lam * running
        adv[t] = running
    return normalize(adv) if normalize_advantages else adv
