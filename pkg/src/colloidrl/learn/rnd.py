"""Random network distillation intrinsic reward.

A fixed, randomly initialised target network embeds states; a predictor
is trained to match it on visited states. The squared prediction error is
large on unfamiliar states and shrinks on familiar ones.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .networks import DenseNet
from .optim import make_optimizer

STD_FLOOR = 1e-8


class RunningStd:
    """Welford running standard deviation."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, values) -> None:
        for x in np.asarray(values, dtype=np.float64).ravel():
            self.count += 1
            d = x - self.mean
            self.mean += d / self.count
            self.m2 += d * (x - self.mean)

    @property
    def std(self) -> float:
        if self.count < 2:
            return 1.0
        return max(math.sqrt(self.m2 / self.count), STD_FLOOR)


class RNDReward:
    """Intrinsic reward ``||f_target(s) - f_predictor(s)||^2 / running_std``.

    Only the standard (non-memorising) variant is provided.
    """

    def __init__(
        self,
        input_dim: int,
        hidden: Sequence[int] = (32,),
        embedding: int = 8,
        lr: float = 1e-3,
        optimizer: str = "adam",
        train_steps: int = 10,
        seed: int = 0,
        normalize: bool = True,
    ):
        sizes = (int(input_dim), *[int(h) for h in hidden], int(embedding))
        self.target = DenseNet(sizes, seed=seed, stream_id=1, prefix="target")
        self.predictor = DenseNet(sizes, seed=seed, stream_id=2, prefix="predictor")
        self.input_dim = int(input_dim)
        self.embedding = int(embedding)
        self.normalize = normalize
        self.train_steps = int(train_steps)
        self.optimizer = make_optimizer(optimizer, lr)
        self.normalizer = RunningStd()

    def _check(self, states) -> np.ndarray:
        s = np.asarray(states, dtype=np.float64)
        if s.ndim == 1:
            s = s[None, :]
        if s.shape[-1] != self.input_dim:
            raise ValueError(f"state width {s.shape[-1]} does not match RND input {self.input_dim}")
        return s

    def prediction_error(self, states) -> np.ndarray:
        s = self._check(states)
        diff = self.target.forward(s) - self.predictor.forward(s)
        return np.sum(diff * diff, axis=-1)

    def __call__(self, states) -> np.ndarray:
        err = self.prediction_error(states)
        return err / self.normalizer.std if self.normalize else err

    def update_normalizer(self, states) -> None:
        self.normalizer.update(self.prediction_error(states))

    def loss_and_grads(self, states, params=None):
        """Mean squared embedding error and its predictor gradients."""
        s = self._check(states)
        tgt = self.target.forward(s)
        pred, cache = self.predictor.forward(s, params=params, return_cache=True)
        diff = pred - tgt
        loss = float(np.mean(np.sum(diff * diff, axis=-1)))
        grads = self.predictor.backward(cache, 2.0 * diff / s.shape[0], params=params)
        return loss, grads

    def train(self, states, steps: int | None = None) -> float:
        """Gradient steps on the predictor; returns the last pre-step loss."""
        s = self._check(states)
        if s.shape[0] == 0:
            raise ValueError("cannot train RND on an empty batch")
        loss = float("nan")
        for _ in range(self.train_steps if steps is None else steps):
            loss, grads = self.loss_and_grads(s)
            if not math.isfinite(loss):
                raise FloatingPointError("non-finite RND loss")
            self.optimizer.step(self.predictor.params, grads)
        return loss

    def copy_target_to_predictor(self) -> None:
        self.predictor.params = {
            k.replace("target", "predictor", 1): v.copy() for k, v in self.target.params.items()
        }
