"""Dense actor-critic networks with explicit reverse-mode gradients.

Parameters live in a flat ``dict[str, ndarray]`` so optimisers and
checkpoints can treat every network the same way.
"""

from __future__ import annotations

import math
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..core.rng import Purpose, RngStream

Params = Dict[str, np.ndarray]
ARCHITECTURES = ("disjoint", "shared_trunk")


def init_dense(params: Params, prefix: str, sizes: Sequence[int], rng: RngStream) -> None:
    """Uniform ``(-1/sqrt(fan_in), 1/sqrt(fan_in))`` weights and biases."""
    for k, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        bound = 1.0 / math.sqrt(fan_in)
        params[f"{prefix}.W{k}"] = (2.0 * rng.uniform(fan_in * fan_out) - 1.0).reshape(fan_in, fan_out) * bound
        params[f"{prefix}.b{k}"] = (2.0 * rng.uniform(fan_out) - 1.0) * bound


def dense_forward(params: Params, prefix: str, n_layers: int, x: np.ndarray, final_relu: bool = False):
    """Chain of dense layers with ReLU between them. Returns ``(out, cache)``."""
    inputs: List[np.ndarray] = []
    pre: List[np.ndarray] = []
    h = x
    for k in range(n_layers):
        inputs.append(h)
        z = h @ params[f"{prefix}.W{k}"] + params[f"{prefix}.b{k}"]
        pre.append(z)
        h = np.maximum(z, 0.0) if (k < n_layers - 1 or final_relu) else z
    return h, (inputs, pre, final_relu)


def dense_backward(params: Params, prefix: str, n_layers: int, cache, dout: np.ndarray, grads: Params) -> np.ndarray:
    """Accumulate parameter gradients into ``grads``; return d(loss)/d(input)."""
    inputs, pre, final_relu = cache
    g = dout
    for k in reversed(range(n_layers)):
        if k < n_layers - 1 or final_relu:
            g = g * (pre[k] > 0.0)
        wk, bk = f"{prefix}.W{k}", f"{prefix}.b{k}"
        gw = inputs[k].T @ g
        gb = g.sum(axis=0)
        grads[wk] = grads[wk] + gw if wk in grads else gw
        grads[bk] = grads[bk] + gb if bk in grads else gb
        g = g @ params[wk].T
    return g


class ActorCritic:
    """Maps observations to ``(action logits, state value)``.

    ``disjoint`` uses separate actor and critic stacks; ``shared_trunk``
    shares the hidden layers and adds two linear heads. ``actor_gain``
    scales the initial output layer of the actor; small values start
    training from a nearly uniform policy.
    """

    def __init__(
        self,
        input_dim: int,
        n_actions: int,
        hidden: Sequence[int] = (12,),
        architecture: str = "disjoint",
        seed: int = 0,
        actor_gain: float = 1.0,
    ):
        if architecture not in ARCHITECTURES:
            raise ValueError(f"architecture must be one of {ARCHITECTURES}")
        if input_dim < 1 or n_actions < 1:
            raise ValueError("input_dim and n_actions must be positive")
        self.input_dim = int(input_dim)
        self.n_actions = int(n_actions)
        self.hidden = tuple(int(h) for h in hidden)
        self.architecture = architecture
        self.seed = int(seed)
        self.actor_gain = float(actor_gain)
        self.params: Params = {}
        rng = RngStream(seed, 0, Purpose.NETWORK_INIT)
        if architecture == "disjoint":
            init_dense(self.params, "actor", (self.input_dim, *self.hidden, self.n_actions), rng)
            init_dense(self.params, "critic", (self.input_dim, *self.hidden, 1), rng)
        else:
            init_dense(self.params, "trunk", (self.input_dim, *self.hidden), rng)
            width = self.hidden[-1] if self.hidden else self.input_dim
            init_dense(self.params, "actor_head", (width, self.n_actions), rng)
            init_dense(self.params, "critic_head", (width, 1), rng)
        head = "actor_head.{}0" if architecture == "shared_trunk" else "actor.{}%d" % len(self.hidden)
        for kind in "Wb":
            self.params[head.format(kind)] *= self.actor_gain

    @property
    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {k: v.shape for k, v in self.params.items()}

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[-1] != self.input_dim:
            raise ValueError(f"observation width {x.shape[-1]} does not match network input {self.input_dim}")
        return x

    def forward(self, x, params: Params | None = None, return_cache: bool = False):
        p = self.params if params is None else params
        x = self._check(x)
        n = len(self.hidden) + 1
        if self.architecture == "disjoint":
            logits, ca = dense_forward(p, "actor", n, x)
            value, cc = dense_forward(p, "critic", n, x)
            cache = (ca, cc)
        else:
            nt = len(self.hidden)
            h, ct = dense_forward(p, "trunk", nt, x, final_relu=True) if nt else (x, None)
            logits, ca = dense_forward(p, "actor_head", 1, h)
            value, cc = dense_forward(p, "critic_head", 1, h)
            cache = (ct, ca, cc)
        out = (logits, value[:, 0])
        return (*out, cache) if return_cache else out

    def backward(self, cache, dlogits: np.ndarray, dvalues: np.ndarray, params: Params | None = None) -> Params:
        p = self.params if params is None else params
        grads: Params = {}
        dv = np.asarray(dvalues, dtype=np.float64).reshape(-1, 1)
        n = len(self.hidden) + 1
        if self.architecture == "disjoint":
            ca, cc = cache
            dense_backward(p, "actor", n, ca, dlogits, grads)
            dense_backward(p, "critic", n, cc, dv, grads)
        else:
            ct, ca, cc = cache
            dh = dense_backward(p, "actor_head", 1, ca, dlogits, grads)
            dh = dh + dense_backward(p, "critic_head", 1, cc, dv, grads)
            if ct is not None:
                dense_backward(p, "trunk", len(self.hidden), ct, dh, grads)
        for k, v in p.items():
            if k not in grads:
                grads[k] = np.zeros_like(v)
        return grads

    def __call__(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """Action probabilities and state values."""
        from .sampling import softmax

        logits, values = self.forward(x)
        return softmax(logits), values

    def copy(self) -> "ActorCritic":
        other = object.__new__(ActorCritic)
        other.__dict__.update(self.__dict__)
        other.params = {k: v.copy() for k, v in self.params.items()}
        return other

    def config(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "n_actions": self.n_actions,
            "hidden": list(self.hidden),
            "architecture": self.architecture,
            "seed": self.seed,
            "actor_gain": self.actor_gain,
        }


class DenseNet:
    """Plain ReLU MLP with a linear output (used for RND embeddings)."""

    def __init__(self, sizes: Sequence[int], seed: int = 0, stream_id: int = 0, prefix: str = "net"):
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) < 2:
            raise ValueError("DenseNet needs at least input and output sizes")
        self.prefix = prefix
        self.params: Params = {}
        init_dense(self.params, prefix, self.sizes, RngStream(seed, stream_id, Purpose.NETWORK_INIT))

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def forward(self, x, params: Params | None = None, return_cache: bool = False):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[-1] != self.sizes[0]:
            raise ValueError(f"input width {x.shape[-1]} does not match network input {self.sizes[0]}")
        out, cache = dense_forward(self.params if params is None else params, self.prefix, self.n_layers, x)
        return (out, cache) if return_cache else out

    def backward(self, cache, dout, params: Params | None = None) -> Params:
        grads: Params = {}
        dense_backward(self.params if params is None else params, self.prefix, self.n_layers, cache, dout, grads)
        return grads
