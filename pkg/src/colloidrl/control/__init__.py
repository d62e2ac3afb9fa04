from .agents import ActorCriticAgent, Agent, ClassicalAgent
from .buffer import MisalignedBuffer, TrajectoryBuffer
from .classical import LymburnAgent, LymburnParams, lymburn_force, lymburn_swarm_rule
from .force_function import ForceFunction, UncontrolledSpecies

__all__ = [
    "ActorCriticAgent",
    "Agent",
    "ClassicalAgent",
    "ForceFunction",
    "LymburnAgent",
    "LymburnParams",
    "MisalignedBuffer",
    "TrajectoryBuffer",
    "UncontrolledSpecies",
    "lymburn_force",
    "lymburn_swarm_rule",
]
