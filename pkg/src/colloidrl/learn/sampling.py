"""Action sampling strategies: categorical (inverse CDF) and the Gumbel trick."""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from ..core.rng import RngStream

SAMPLERS = ("categorical", "gumbel")


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    m = np.max(z, axis=-1, keepdims=True)
    shifted = z - m
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def sample_action(
    rng: RngStream,
    logits: Optional[np.ndarray] = None,
    probabilities: Optional[np.ndarray] = None,
    sampler: str = "categorical",
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw one action per row. Returns ``(indices, log_probabilities)``.

    Exactly one of ``logits`` or ``probabilities`` must be given. Zero
    probabilities are never drawn.
    """
    if (logits is None) == (probabilities is None):
        raise ValueError("pass exactly one of logits or probabilities")
    if sampler not in SAMPLERS:
        raise ValueError(f"sampler must be one of {SAMPLERS}")
    if logits is not None:
        z = np.atleast_2d(np.asarray(logits, dtype=np.float64))
        if not np.all(np.isfinite(z)):
            raise ValueError("non-finite logits")
        logp = log_softmax(z)
    else:
        p = np.atleast_2d(np.asarray(probabilities, dtype=np.float64))
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("probabilities must be finite and non-negative")
        total = p.sum(axis=-1, keepdims=True)
        if np.any(total <= 0):
            raise ValueError("probabilities must not all be zero")
        with np.errstate(divide="ignore"):
            logp = np.log(p / total)
    b, a = logp.shape
    if sampler == "categorical":
        cdf = np.cumsum(np.exp(logp), axis=-1)
        u = rng.uniform(b) * cdf[:, -1]
        idx = np.minimum(np.sum(cdf <= u[:, None], axis=-1), a - 1).astype(np.int64)
        # rounding in the cumulative sum must never select a zero-probability entry
        for i in np.flatnonzero(np.isneginf(logp[np.arange(b), idx])):
            idx[i] = int(np.flatnonzero(np.isfinite(logp[i]))[-1])
    else:
        g = rng.gumbel(b * a).reshape(b, a)
        idx = np.argmax(logp + g, axis=-1).astype(np.int64)
    return idx, logp[np.arange(b), idx]


def entropy(logits: np.ndarray) -> np.ndarray:
    logp = log_softmax(logits)
    return -np.sum(np.exp(logp) * logp, axis=-1)
