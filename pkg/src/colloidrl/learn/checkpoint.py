"""JSON checkpoints for actor-critic networks and their optimiser state.

Floats are written with Python's shortest round-trip repr, so a save/load
cycle reproduces every binary64 parameter exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .networks import ActorCritic
from .optim import make_optimizer

FORMAT = "colloidrl-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    pass


def _arrays_to_lists(d):
    return {k: np.asarray(v).tolist() for k, v in d.items()}


def to_document(net: ActorCritic, optimizer=None, update_count: int = 0) -> dict:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "network": net.config(),
        "shapes": {k: list(v.shape) for k, v in net.params.items()},
        "params": _arrays_to_lists(net.params),
        "update_count": int(update_count),
        "optimizer": None,
    }
    if optimizer is not None:
        state = dict(optimizer.state_dict())
        if "m" in state:
            state["m"] = _arrays_to_lists(state["m"])
            state["v"] = _arrays_to_lists(state["v"])
        doc["optimizer"] = state
    return doc


def save_checkpoint(path, net: ActorCritic, optimizer=None, update_count: int = 0) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(to_document(net, optimizer, update_count)))
    tmp.replace(path)


def from_document(doc: dict, expect: Optional[ActorCritic] = None) -> Tuple[ActorCritic, object, int]:
    if doc.get("format") != FORMAT:
        raise CheckpointError("not a colloidrl checkpoint")
    if doc.get("version") != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {doc.get('version')!r}")
    cfg = doc["network"]
    net = ActorCritic(
        cfg["input_dim"], cfg["n_actions"], tuple(cfg["hidden"]), cfg["architecture"], cfg.get("seed", 0),
        cfg.get("actor_gain", 1.0),
    )
    for name, shape in doc["shapes"].items():
        if name not in net.params:
            raise CheckpointError(f"unexpected parameter {name!r}")
        if tuple(shape) != net.params[name].shape:
            raise CheckpointError(f"shape mismatch for {name!r}: {tuple(shape)} vs {net.params[name].shape}")
        value = np.asarray(doc["params"][name], dtype=np.float64).reshape(shape)
        net.params[name] = value
    if set(doc["shapes"]) != set(net.params):
        raise CheckpointError("checkpoint is missing parameters")
    if expect is not None and expect.shapes != net.shapes:
        raise CheckpointError("checkpoint shapes do not match the configured network")
    opt = None
    state = doc.get("optimizer")
    if state is not None:
        opt = make_optimizer(state["name"], state["lr"])
        opt.load_state_dict(state)
    return net, opt, int(doc.get("update_count", 0))


def load_checkpoint(path, expect: Optional[ActorCritic] = None):
    return from_document(json.loads(Path(path).read_text()), expect)
