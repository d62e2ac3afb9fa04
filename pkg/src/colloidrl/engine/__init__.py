from .base import ActionCardinalityError, Engine, ForceModel, NoOpForceModel, NumericalBlowUp
from .kernels import BACKEND, available_backends, get_backend
from .langevin import EngineState, Interactions, LangevinEngine, wca_pair_force
from .placement import random_colloids, rod_colloids

__all__ = [
    "BACKEND",
    "ActionCardinalityError",
    "Engine",
    "EngineState",
    "ForceModel",
    "Interactions",
    "LangevinEngine",
    "NoOpForceModel",
    "NumericalBlowUp",
    "available_backends",
    "get_backend",
    "random_colloids",
    "rod_colloids",
    "wca_pair_force",
]
