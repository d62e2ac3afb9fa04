"""Routes every particle to the agent that controls its species."""

from __future__ import annotations

from typing import Dict, Iterable, List, Mapping

import numpy as np

from ..core.types import Action
from .agents import Agent


class UncontrolledSpecies(ValueError):
    def __init__(self, species):
        super().__init__(f"uncontrolled species: {sorted(species)}")
        self.species = sorted(species)


class ForceFunction:
    """Per-species action dispatcher handed to an engine.

    Parameters
    ----------
    agents : mapping of species tag to Agent
        Tags may be ints or their string form (``{"0": agent}``).
    passive_types : iterable of int
        Species that receive no-op actions.
    """

    def __init__(self, agents: Mapping, passive_types: Iterable[int] = ()):
        self.agents: Dict[int, Agent] = {}
        for tag, agent in agents.items():
            t = int(tag)
            if t in self.agents:
                raise ValueError(f"species {t} has more than one agent")
            if agent.particle_type != t:
                raise ValueError(f"agent for species {t} declares particle_type {agent.particle_type}")
            self.agents[t] = agent
        self.passive_types = {int(t) for t in passive_types}
        both = self.passive_types & set(self.agents)
        if both:
            raise ValueError(f"species {sorted(both)} both controlled and passive")

    @property
    def trainable_agents(self) -> Dict[int, Agent]:
        return {t: a for t, a in self.agents.items() if a.trainable}

    def calc_action(self, colloids) -> List[Action]:
        types = np.array([c.type for c in colloids], dtype=np.int64)
        missing = set(types.tolist()) - set(self.agents) - self.passive_types
        if missing:
            raise UncontrolledSpecies(missing)
        actions: List[Action] = [Action()] * len(colloids)
        for t, agent in self.agents.items():
            rows = np.flatnonzero(types == t)
            chosen = agent.calc_action(colloids)
            if len(chosen) != rows.size:
                raise ValueError(f"agent for species {t} returned {len(chosen)} actions for {rows.size} particles")
            for i, a in zip(rows, chosen):
                actions[i] = a
        return actions

    @property
    def kill_switch(self) -> bool:
        return any(a.kill_switch for a in self.agents.values())

    def finalize(self, colloids) -> None:
        for agent in self.agents.values():
            agent.finalize(colloids)

    def reset(self) -> None:
        for agent in self.agents.values():
            agent.reset()
