"""Experiment configuration files (TOML) and their validation."""

from __future__ import annotations

import math
import re
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import tomli
import tomli_w
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    ValidationError,
    field_validator,
    model_validator,
)

UNIT_TOL = 1e-9


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists one diagnostic per line."""

    def __init__(self, problems: List[str]):
        super().__init__("\n".join(problems))
        self.problems = problems


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SpeciesSpec(_Strict):
    type: NonNegativeInt
    count: NonNegativeInt
    placement: Literal["random", "rod"] = "random"
    min_separation: NonNegativeFloat = 0.0
    region: Optional[List[List[float]]] = None
    center: Optional[List[float]] = None
    spacing: PositiveFloat = 1.0
    angle: float = 0.0

    @model_validator(mode="after")
    def _rod(self):
        if self.placement == "rod":
            if self.center is None:
                raise ValueError("rod placement needs a center")
            if self.count < 2:
                raise ValueError("a rod needs at least two particles")
        return self


class SystemSpec(_Strict):
    dim: Literal[2, 3] = 2
    box: List[PositiveFloat]
    dt: PositiveFloat = 0.01
    kT: NonNegativeFloat = 0.0
    gamma_t: PositiveFloat = 1.0
    gamma_r: PositiveFloat = 1.0
    steps_per_slice: PositiveInt = 1
    boundary: Literal["reflecting", "periodic"] = "periodic"
    interactions: bool = False
    sigma: PositiveFloat = 1.0
    epsilon: PositiveFloat = 1.0
    rigid_types: List[NonNegativeInt] = []
    passive: List[NonNegativeInt] = []
    species: List[SpeciesSpec] = Field(min_length=1)

    @model_validator(mode="after")
    def _shape(self):
        if len(self.box) != self.dim:
            raise ValueError(f"box must have {self.dim} lengths")
        tags = [s.type for s in self.species]
        if len(set(tags)) != len(tags):
            raise ValueError("each species type may appear once")
        return self


class FieldSpec(_Strict):
    source: List[float]
    decay: Literal["gaussian", "inverse_distance"] = "gaussian"
    amplitude: PositiveFloat = 1.0
    width: PositiveFloat = 1.0


class ObservableSpec(_Strict):
    kind: Literal["position_director", "concentration_change", "concentration_value", "vision_cones", "multi"]
    scale: float = 1.0
    n_cones: PositiveInt = 5
    radius: Optional[PositiveFloat] = None
    observed_types: Optional[List[NonNegativeInt]] = None
    field_of_view: PositiveFloat = 2.0 * math.pi
    parts: Optional[List["ObservableSpec"]] = None

    @model_validator(mode="after")
    def _parts(self):
        if self.kind == "multi" and not self.parts:
            raise ValueError("multi observable needs parts")
        return self


class TaskSpec(_Strict):
    kind: Literal["gradient", "rotate_rod", "kill", "multi"]
    scale: float = 1.0
    clip: bool = True
    rod_type: NonNegativeInt = 1
    direction: Literal[1, -1] = 1
    max_slices: Optional[PositiveInt] = None
    safe_region: Optional[List[List[float]]] = None
    success_threshold: Optional[float] = None
    parts: Optional[List["TaskSpec"]] = None
    weights: Optional[List[float]] = None

    @model_validator(mode="after")
    def _parts(self):
        if self.kind == "multi":
            if not self.parts:
                raise ValueError("multi task needs parts")
            if self.weights is not None and len(self.weights) != len(self.parts):
                raise ValueError("weights and parts differ in length")
        return self


class ActionSpec(_Strict):
    force: float = 0.0
    torque: List[float] = [0.0, 0.0, 0.0]
    new_direction: Optional[List[float]] = None

    @field_validator("torque")
    @classmethod
    def _torque(cls, v):
        if len(v) not in (2, 3):
            raise ValueError("torque needs 2 or 3 components")
        return v

    @field_validator("new_direction")
    @classmethod
    def _unit(cls, v):
        if v is None:
            return v
        if len(v) not in (2, 3):
            raise ValueError("new_direction needs 2 or 3 components")
        norm = math.sqrt(sum(x * x for x in v))
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"new_direction must be a unit vector (norm {norm!r})")
        return v


class NetworkSpec(_Strict):
    hidden: List[PositiveInt] = [12]
    architecture: Literal["disjoint", "shared_trunk"] = "disjoint"
    actor_gain: PositiveFloat = 1.0


class ExplorationSpec(_Strict):
    zeta0: float = Field(0.0, ge=0.0, le=1.0)
    decay: NonNegativeFloat = 1.0


class IntrinsicSpec(_Strict):
    kind: Literal["rnd"] = "rnd"
    hidden: List[PositiveInt] = [32]
    embedding: PositiveInt = 8
    lr: PositiveFloat = 1e-3
    train_steps: PositiveInt = 10


class LymburnSpec(_Strict):
    home: List[float] = [0.0, 0.0, 0.0]
    a_align: float = 1.0
    a_repulse: float = 5.0
    a_attract: float = 0.5
    a_home: float = 0.2
    r_sense: Optional[PositiveFloat] = None
    r_repulse: Optional[NonNegativeFloat] = None
    f_max: NonNegativeFloat = 10.0


class AgentSpec(_Strict):
    type: NonNegativeInt
    kind: Literal["actor_critic", "classical"] = "actor_critic"
    observable: Optional[ObservableSpec] = None
    task: Optional[TaskSpec] = None
    actions: Dict[str, ActionSpec] = {}
    network: NetworkSpec = NetworkSpec()
    exploration: Optional[ExplorationSpec] = None
    intrinsic: Optional[IntrinsicSpec] = None
    reward_mode: Literal["individual", "team_average"] = "individual"
    rule: Literal["lymburn"] = "lymburn"
    lymburn: LymburnSpec = LymburnSpec()

    @model_validator(mode="after")
    def _complete(self):
        if self.kind == "actor_critic":
            missing = [k for k in ("observable", "task") if getattr(self, k) is None]
            if missing:
                raise ValueError(f"actor_critic agent needs {', '.join(missing)}")
            if not self.actions:
                raise ValueError("actor_critic agent needs at least one action")
        return self


class UpdateSpec(_Strict):
    algorithm: Literal["vpg", "ppo"] = "vpg"
    returns: Literal["expected", "gae"] = "expected"
    sampler: Literal["categorical", "gumbel"] = "categorical"
    gamma: float = Field(0.99, ge=0.0, le=1.0)
    lam: float = Field(0.95, ge=0.0, le=1.0)
    learning_rate: PositiveFloat = 1e-3
    clip: PositiveFloat = 0.2
    epochs: PositiveInt = 4
    normalize_advantages: bool = True
    optimizer: Literal["sgd", "adam"] = "sgd"
    critic_coef: NonNegativeFloat = 1.0
    entropy_coef: NonNegativeFloat = 0.0
    intrinsic_weight: NonNegativeFloat = 1.0
    bootstrap: Literal["terminal", "truncated"] = "terminal"
    exclude_explored: bool = False


class TrainingSpec(_Strict):
    mode: Literal["continuous", "episodic"] = "episodic"
    n_episodes: NonNegativeInt = 1
    episode_length: PositiveInt = 20
    reset_frequency: PositiveInt = 1
    checkpoint_every: NonNegativeInt = 0
    update: UpdateSpec = UpdateSpec()


class EngineSpec(_Strict):
    kind: Literal["local", "remote"] = "local"
    address: str = "127.0.0.1:7878"
    timeout: PositiveFloat = 30.0
    backend: Optional[Literal["cython", "python"]] = None

    @field_validator("address")
    @classmethod
    def _address(cls, v):
        parse_address(v)
        return v


class OutputSpec(_Strict):
    directory: str = "runs/experiment"
    trajectory: bool = True
    trajectory_every: NonNegativeInt = 1


class ExperimentConfig(_Strict):
    seed: NonNegativeInt = 0
    system: SystemSpec
    field: Optional[FieldSpec] = None
    agents: List[AgentSpec] = []
    training: TrainingSpec = TrainingSpec()
    engine: EngineSpec = EngineSpec()
    output: OutputSpec = OutputSpec()

    @model_validator(mode="after")
    def _references(self):
        species = {s.type for s in self.system.species}
        problems = []
        agent_types = [a.type for a in self.agents]
        if len(set(agent_types)) != len(agent_types):
            problems.append("agents: one agent per species type")
        for k, a in enumerate(self.agents):
            if a.type not in species:
                problems.append(f"agents.{k}.type: species {a.type} is not declared in system.species")
            if a.kind == "actor_critic" and _needs_field(a) and self.field is None:
                problems.append(f"agents.{k}: observable or task uses a concentration field but [field] is missing")
            if a.task is not None:
                for rt in _rod_types(a.task):
                    if rt not in species:
                        problems.append(f"agents.{k}.task.rod_type: species {rt} is not declared")
        for t in self.system.passive:
            if t not in species:
                problems.append(f"system.passive: species {t} is not declared")
            if t in agent_types:
                problems.append(f"system.passive: species {t} also has an agent")
        uncontrolled = species - set(agent_types) - set(self.system.passive)
        if uncontrolled:
            problems.append(f"system.species: uncontrolled species {sorted(uncontrolled)} (add an agent or list as passive)")
        for t in self.system.rigid_types:
            if t not in species:
                problems.append(f"system.rigid_types: species {t} is not declared")
        if problems:
            raise ValueError("; ".join(problems))
        return self


def _needs_field(agent: AgentSpec) -> bool:
    def obs(o):
        if o is None:
            return False
        if o.kind in ("concentration_change", "concentration_value"):
            return True
        return any(obs(p) for p in o.parts or [])

    def task(t):
        if t is None:
            return False
        if t.kind == "gradient" or t.success_threshold is not None:
            return True
        return any(task(p) for p in t.parts or [])

    return obs(agent.observable) or task(agent.task)


def _rod_types(t: TaskSpec):
    if t.kind == "rotate_rod":
        yield t.rod_type
    for p in t.parts or []:
        yield from _rod_types(p)


def parse_address(text: str) -> Tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not host:
        raise ValueError(f"address must look like host:port, got {text!r}")
    try:
        p = int(port)
    except ValueError:
        raise ValueError(f"port must be an integer, got {port!r}") from None
    if not 0 <= p < 65536:
        raise ValueError(f"port {p} out of range")
    return host, p


def _line_of(source: str, loc) -> Optional[int]:
    keys = [k for k in loc if isinstance(k, str)]
    if not source or not keys:
        return None
    pattern = re.compile(r"^\s*" + re.escape(keys[-1]) + r"\s*=")
    for n, line in enumerate(source.splitlines(), 1):
        if pattern.match(line):
            return n
    return None


def format_validation_error(err: ValidationError, source: str = "") -> List[str]:
    out = []
    for e in err.errors():
        loc = [x for x in e["loc"] if not (isinstance(x, str) and x.startswith("function-after"))]
        path = ".".join(str(x) for x in loc) or "<root>"
        msg = e["msg"].removeprefix("Value error, ")
        line = _line_of(source, loc)
        out.append(f"{path}: {msg}" + (f" (line {line})" if line else ""))
    return out


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError([f"syntax error: {exc}"]) from exc
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(format_validation_error(exc, text)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from exc
    return parse_config(text)


def dump_config(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(cfg.model_dump(mode="json", exclude_none=True))
