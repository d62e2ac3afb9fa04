"""Parameter updates."""

from __future__ import annotations

from typing import Dict

import numpy as np

Params = Dict[str, np.ndarray]


class NonFiniteGradient(FloatingPointError):
    pass


def gradient_ascent_update(theta, grad_loss, lr: float):
    """``theta - lr * grad(loss)``: descent on the loss is ascent on the objective."""
    theta = np.asarray(theta, dtype=np.float64)
    grad_loss = np.asarray(grad_loss, dtype=np.float64)
    if theta.shape != grad_loss.shape:
        raise ValueError(f"shape mismatch {theta.shape} vs {grad_loss.shape}")
    if not np.all(np.isfinite(grad_loss)):
        raise NonFiniteGradient("non-finite gradient; update aborted")
    return theta - lr * grad_loss


def _check(params: Params, grads: Params):
    for k, g in grads.items():
        if k not in params:
            raise KeyError(f"gradient for unknown parameter {k!r}")
        if g.shape != params[k].shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {k!r} {params[k].shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(f"non-finite gradient for {k!r}; update aborted")


class SGD:
    name = "sgd"

    def __init__(self, lr: float):
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        self.lr = lr
        self.t = 0

    def step(self, params: Params, grads: Params) -> None:
        _check(params, grads)
        for k, g in grads.items():
            params[k] = gradient_ascent_update(params[k], g, self.lr)
        self.t += 1

    def state_dict(self) -> dict:
        return {"name": self.name, "lr": self.lr, "t": self.t}

    def load_state_dict(self, state: dict) -> None:
        self.lr = state["lr"]
        self.t = state["t"]


class Adam:
    """Adaptive-moment variant (Kingma & Ba) of the same descent step."""

    name = "adam"

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: Params = {}
        self.v: Params = {}

    def step(self, params: Params, grads: Params) -> None:
        _check(params, grads)
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for k, g in grads.items():
            m = self.m.get(k, np.zeros_like(g))
            v = self.v.get(k, np.zeros_like(g))
            m = self.beta1 * m + (1.0 - self.beta1) * g
            v = self.beta2 * v + (1.0 - self.beta2) * g * g
            self.m[k], self.v[k] = m, v
            params[k] = params[k] - self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state_dict(self) -> dict:
        return {
            "name": self.name,
            "lr": self.lr,
            "betas": [self.beta1, self.beta2],
            "eps": self.eps,
            "t": self.t,
            "m": self.m,
            "v": self.v,
        }

    def load_state_dict(self, state: dict) -> None:
        self.lr = state["lr"]
        self.beta1, self.beta2 = state["betas"]
        self.eps = state["eps"]
        self.t = state["t"]
        self.m = {k: np.asarray(v, dtype=np.float64) for k, v in state["m"].items()}
        self.v = {k: np.asarray(v, dtype=np.float64) for k, v in state["v"].items()}


def make_optimizer(name: str, lr: float):
    if name == "sgd":
        return SGD(lr)
    if name == "adam":
        return Adam(lr)
    raise ValueError(f"unknown optimizer {name!r}")
