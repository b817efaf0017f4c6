"""Experiment configuration: one YAML file with sections experiment, medium, potential, profile, solver, output."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Annotated, Literal, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .homogenize import MediumSpec, Problem
from .medium import MediumKind
from .potential import DoubleWell, PotentialForm, TransitionProfile
from .solve import SolverOptions

SEED_ENV = "AHC_SEED_OVERRIDE"


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class MediumConfig(_Strict):
    kind: MediumKind = MediumKind.CONSTANT
    lam: float = Field(1.0, alias="lambda", gt=0)
    Lambda_cap: float = Field(1.0, gt=0)
    cell_size: float = Field(1.0, gt=0)
    value: float | list[float] | None = None
    values: list[float | list[float]] | None = None
    probs: list[float] | None = None
    pattern: list | None = None
    intensity: float | None = None
    offset: list[float] | None = None

    @model_validator(mode="after")
    def _ordered(self):
        if self.lam > self.Lambda_cap:
            raise ValueError(f"medium.lambda ({self.lam}) must not exceed medium.Lambda_cap ({self.Lambda_cap})")
        return self

    def spec(self) -> MediumSpec:
        params = self.model_dump(by_alias=True, exclude_none=True, exclude={"kind"})
        return MediumSpec(self.kind, params)


class PotentialConfig(_Strict):
    form: PotentialForm = PotentialForm.QUARTIC
    scale: float = Field(1.0, gt=0)
    table_u: list[float] | None = None
    table_w: list[float] | None = None

    def build(self) -> DoubleWell:
        if self.form is PotentialForm.CUSTOM:
            return DoubleWell(PotentialForm.CUSTOM, self.scale, self.table_u, self.table_w)
        return DoubleWell(scale=self.scale)


class ProfileConfig(_Strict):
    # custom profiles need callables and are only available from Python
    form: Literal["tanh"] = "tanh"


class SolverConfig(_Strict):
    max_iters: int = Field(20000, ge=1)
    grad_tol: float = Field(1e-5, ge=0)
    energy_tol: float = Field(1e-11, ge=0)
    sweep: int = Field(10, ge=1)
    initial_step: float = Field(1e-2, gt=0)
    smoothing: float = Field(0.0, ge=0)

    def build(self) -> SolverOptions:
        return SolverOptions(**self.model_dump())


class OutputConfig(_Strict):
    record_wall_time: bool = False


class _Experiment(_Strict):
    e: list[float] = Field(default_factory=lambda: [1.0, 0.0], min_length=1, max_length=3)
    seeds: list[Annotated[int, Field(ge=0)]] = Field(default_factory=lambda: [0], min_length=1)
    spacing: float = Field(0.1, gt=0)


class Oracle1D(_Experiment):
    type: Literal["oracle-1d"]
    e: list[float] = Field(default_factory=lambda: [1.0], min_length=1, max_length=1)
    h: float = Field(10.0, gt=0)
    tolerance: float = Field(0.01, gt=0)


class SweepR(_Experiment):
    type: Literal["sweep-r"]
    R_list: list[float] = Field(default_factory=lambda: [8.0, 16.0, 32.0], min_length=3)
    kappa: float = Field(1.0, gt=0)
    warm_start: bool = True
    checks: bool = True


class SweepH(_Experiment):
    type: Literal["sweep-h"]
    R: float = Field(8.0, gt=0)
    h_list: list[float] = Field(default_factory=lambda: [2.0, 4.0, 8.0], min_length=2)


class Wulff(_Experiment):
    type: Literal["wulff"]
    directions: int = Field(16, ge=4)
    R: float = Field(8.0, gt=0)
    h: float = Field(8.0, gt=0)


class OffCenter(_Experiment):
    type: Literal["off-center"]
    x0: list[float] = Field(default_factory=lambda: [0.3, 0.7])
    rho: float = Field(1.0, gt=0)
    R_list: list[float] = Field(default_factory=lambda: [8.0, 16.0, 32.0], min_length=1)


class Recovery(_Experiment):
    type: Literal["recovery"]
    x0: list[float] = Field(default_factory=lambda: [0.0, 0.0])
    rho: float = Field(1.0, gt=0)
    eps_list: list[float] = Field(default_factory=lambda: [1 / 8, 1 / 16, 1 / 32], min_length=1)
    sigma_ref: float | None = Field(None, gt=0)
    tolerance: float = Field(0.02, gt=0)


class GlueDemo(_Experiment):
    type: Literal["glue-demo"]
    R: float = Field(8.0, gt=0)
    h: float = Field(4.0, gt=0)
    shift: float = Field(0.2, ge=0)


Experiment = Annotated[Union[Oracle1D, SweepR, SweepH, Wulff, OffCenter, Recovery, GlueDemo],
                       Field(discriminator="type")]


class RunConfig(_Strict):
    experiment: Experiment
    medium: MediumConfig = Field(default_factory=MediumConfig)
    potential: PotentialConfig = Field(default_factory=PotentialConfig)
    profile: ProfileConfig = Field(default_factory=ProfileConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    def problem(self) -> Problem:
        return Problem(self.medium.spec(), self.potential.build(), TransitionProfile(), self.solver.build(),
                       self.experiment.spacing)

    def canonical(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)


def _format_errors(err: ValidationError) -> str:
    lines = []
    for item in err.errors():
        path = ".".join(str(p) for p in item["loc"])
        lines.append(f"{path}: {item['msg']}")
    return "\n".join(lines)


def parse_config(data: dict, env=None) -> RunConfig:
    """Validate a config mapping; ``AHC_SEED_OVERRIDE`` replaces the seed list by one seed."""
    env = os.environ if env is None else env
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_errors(err)) from None
    override = env.get(SEED_ENV)
    if override not in (None, ""):
        try:
            seed = int(override)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {override!r}") from None
        if seed < 0:
            raise ConfigError(f"{SEED_ENV} must be non-negative")
        cfg.experiment.seeds = [seed]
    return cfg


def load_config(path, env=None) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as err:
        raise ConfigError(f"{path}: not valid YAML ({err})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return parse_config(data, env)
