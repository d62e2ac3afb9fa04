"""The environment contract shared by simulations and remote experiments."""

from __future__ import annotations

from typing import List, Protocol, Sequence, runtime_checkable

from ..core.types import Action, Colloid


class ActionCardinalityError(ValueError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"action/colloid cardinality: expected {expected} actions, got {got}")
        self.expected = expected
        self.got = got


class NumericalBlowUp(RuntimeError):
    def __init__(self, step: int, particle: int):
        super().__init__(f"numerical blow-up at step {step} (particle index {particle})")
        self.step = step
        self.particle = particle


@runtime_checkable
class ForceModel(Protocol):
    """Anything that maps the current colloids to one action per colloid.

    A ``kill_switch`` attribute, when present and true after
    ``calc_action``, stops integration before the slice is executed.
    """

    def calc_action(self, colloids: Sequence[Colloid]) -> List[Action]: ...


class Engine:
    """Parent class for simulation and experiment environments."""

    def integrate(self, n_slices: int, force_model: ForceModel) -> bool:
        """Advance ``n_slices`` action slices; return True if terminated early."""
        raise NotImplementedError

    def get_particle_data(self) -> List[Colloid]:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class NoOpForceModel:
    """Returns the no-op action for every colloid."""

    kill_switch = False

    def calc_action(self, colloids):
        return [Action() for _ in colloids]
