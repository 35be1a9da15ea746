"""JSON model-configuration documents.

A document is an object with a ``"model"`` discriminator plus model
parameters, an optional ``"grid"`` (``{"t0", "dt", "steps"}`` or
``{"points": [...]}``), ``"seed"`` and ``"paths"``. Unknown keys are
rejected. Subset keys are bitmask strings (``"0b011"`` or decimal
``"3"``); bit ``k-1`` stands for component ``k``. Looping rates are keyed
``"<alive mask>-><target mask>"``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from . import subordinators as sub
from .copulas import GaussianCopula, GumbelCopula, MOCopula
from .core import TimeGrid
from .levy_frailty import MultiFactorLFM, OneFactorLFM, TriggerMode, hierarchical_weights
from .looping_markov import FreundParams, LoopingRateSpec, acbve_to_freund, build_freund_generator, build_looping_generator
from .marshall_olkin import MOParameters

__all__ = ["ModelConfig", "load_config", "parse_config", "parse_mask", "ConfigError"]


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def parse_mask(text: str) -> int:
    text = text.strip()
    try:
        mask = int(text[2:], 2) if text.lower().startswith("0b") else int(text, 10)
    except ValueError:
        raise ConfigError(f"bad subset mask {text!r}") from None
    if mask < 0:
        raise ConfigError(f"bad subset mask {text!r}")
    return mask


# -- grid ---------------------------------------------------------------------


class UniformGrid(_Strict):
    t0: float = 0.0
    dt: float = Field(gt=0)
    steps: int = Field(ge=1)

    def build(self) -> TimeGrid:
        return TimeGrid.uniform(self.dt, self.steps, self.t0)


class PointGrid(_Strict):
    points: list[float] = Field(min_length=1)

    def build(self) -> TimeGrid:
        return TimeGrid(tuple(self.points))


GridConfig = Union[UniformGrid, PointGrid]


# -- subordinators ------------------------------------------------------------


class ExponentialJumpConfig(_Strict):
    family: Literal["exponential"]
    rate: float = Field(gt=0)


class ConstantJumpConfig(_Strict):
    family: Literal["constant"]
    size: float = Field(gt=0)


class DriftConfig(_Strict):
    family: Literal["drift"]
    mu: float = Field(gt=0)

    def build(self):
        return sub.Drift(self.mu)


class KilledDriftConfig(_Strict):
    family: Literal["killed_drift"]
    mu: float = Field(default=0.0, ge=0)
    lam: float = Field(gt=0)

    def build(self):
        return sub.KilledDrift(self.mu, self.lam)


class CompoundPoissonConfig(_Strict):
    family: Literal["compound_poisson"]
    mu: float = Field(default=0.0, ge=0)
    lam: float = Field(gt=0)
    jumps: Annotated[Union[ExponentialJumpConfig, ConstantJumpConfig], Field(discriminator="family")]

    def build(self):
        j = self.jumps
        jumps = sub.ExponentialJumps(j.rate) if j.family == "exponential" else sub.ConstantJumps(j.size)
        return sub.CompoundPoissonDrift(self.mu, self.lam, jumps)


class GammaConfig(_Strict):
    family: Literal["gamma"]
    beta: float = Field(gt=0)
    eta: float = Field(gt=0)

    def build(self):
        return sub.Gamma(self.beta, self.eta)


class InverseGaussianConfig(_Strict):
    family: Literal["inverse_gaussian"]
    beta: float = Field(gt=0)
    eta: float = Field(gt=0)

    def build(self):
        return sub.InverseGaussian(self.beta, self.eta)


class StableConfig(_Strict):
    family: Literal["stable"]
    alpha: float = Field(gt=0, le=1)

    def build(self):
        return sub.Stable(self.alpha)


class SumTermConfig(_Strict):
    weight: float = Field(gt=0)
    spec: "SubordinatorConfig"


class SumConfig(_Strict):
    family: Literal["sum"]
    terms: list[SumTermConfig] = Field(min_length=1)

    def build(self):
        return sub.Sum(tuple((t.weight, t.spec.build()) for t in self.terms))


SubordinatorConfig = Annotated[
    Union[
        DriftConfig,
        KilledDriftConfig,
        CompoundPoissonConfig,
        GammaConfig,
        InverseGaussianConfig,
        StableConfig,
        SumConfig,
    ],
    Field(discriminator="family"),
]
SumTermConfig.model_rebuild()


# -- models -------------------------------------------------------------------


class _ModelBase(_Strict):
    grid: GridConfig | None = None
    seed: int = Field(default=0, ge=0, lt=2**64)
    paths: int = Field(default=1, ge=0)

    def grid_or_none(self) -> TimeGrid | None:
        return None if self.grid is None else self.grid.build()

    def require_grid(self) -> TimeGrid:
        if self.grid is None:
            raise ConfigError(f"model {self.model!r} needs a grid")
        return self.grid.build()


class MarshallOlkinConfig(_ModelBase):
    model: Literal["marshall_olkin"]
    d: int = Field(ge=1)
    rates: dict[str, float]
    sampler: Literal["shock", "arnold"] = "shock"

    def build(self) -> MOParameters:
        return MOParameters(self.d, {parse_mask(k): v for k, v in self.rates.items()})


class FreundConfig(_ModelBase):
    model: Literal["freund"]
    lambda1: float = Field(gt=0)
    lambda2: float = Field(gt=0)
    lambda1_tilde: float = Field(gt=0)
    lambda2_tilde: float = Field(gt=0)
    d: Literal[2] = 2

    def params(self) -> FreundParams:
        return FreundParams(self.lambda1, self.lambda2, self.lambda1_tilde, self.lambda2_tilde)

    def generator(self) -> np.ndarray:
        return build_freund_generator(self.params())


class AcbveConfig(_ModelBase):
    model: Literal["acbve"]
    eta1: float = Field(gt=0)
    eta2: float = Field(gt=0)
    eta12: float = Field(ge=0)
    d: Literal[2] = 2

    def params(self) -> FreundParams:
        return acbve_to_freund(self.eta1, self.eta2, self.eta12)

    def generator(self) -> np.ndarray:
        return build_freund_generator(self.params())


class LoopingConfig(_ModelBase):
    model: Literal["looping"]
    d: int = Field(ge=1)
    rates: dict[str, float]

    def spec(self) -> LoopingRateSpec:
        parsed = {}
        for key, rate in self.rates.items():
            src, sep, dst = key.partition("->")
            if not sep:
                raise ConfigError(f"looping rate key {key!r} must look like 'alive->target'")
            parsed[(parse_mask(src), parse_mask(dst))] = rate
        return LoopingRateSpec(self.d, parsed)

    def generator(self) -> np.ndarray:
        return build_looping_generator(self.spec())


class OneFactorConfig(_ModelBase):
    model: Literal["lfm_one_factor"]
    d: int = Field(ge=1)
    subordinator: SubordinatorConfig
    trigger_rates: list[float] | None = None
    trigger_mode: TriggerMode = TriggerMode.EXPONENTIAL

    def build(self) -> OneFactorLFM:
        rates = None if self.trigger_rates is None else tuple(self.trigger_rates)
        return OneFactorLFM(self.subordinator.build(), self.d, rates)


class HierarchyConfig(_Strict):
    groups: list[list[int]]
    alpha: list[float]
    beta: list[float]


class MultiFactorConfig(_ModelBase):
    model: Literal["lfm_multi_factor"]
    factors: list[SubordinatorConfig] = Field(min_length=1)
    weights: list[list[float]] | None = None
    hierarchy: HierarchyConfig | None = None
    trigger_mode: TriggerMode = TriggerMode.EXPONENTIAL

    @model_validator(mode="after")
    def _one_weight_source(self):
        if (self.weights is None) == (self.hierarchy is None):
            raise ValueError("give exactly one of 'weights' or 'hierarchy'")
        return self

    @property
    def d(self) -> int:
        return len(self.weights) if self.weights is not None else sum(len(g) for g in self.hierarchy.groups)

    def build(self) -> MultiFactorLFM:
        if self.weights is not None:
            w = np.array(self.weights, dtype=float)
        else:
            h = self.hierarchy
            w = hierarchical_weights(h.groups, h.alpha, h.beta)
        return MultiFactorLFM(tuple(f.build() for f in self.factors), w)


class GaussianCopulaConfig(_Strict):
    family: Literal["gaussian"]
    rho: float = Field(gt=-1, lt=1)

    def build(self):
        return GaussianCopula(self.rho)


class GumbelCopulaConfig(_Strict):
    family: Literal["gumbel"]
    theta: float = Field(gt=0, le=1)

    def build(self):
        return GumbelCopula(self.theta)


class MOCopulaConfig(_Strict):
    family: Literal["marshall_olkin"]
    alpha: float = Field(ge=0, le=1)
    beta: float = Field(ge=0, le=1)

    def build(self):
        return MOCopula(self.alpha, self.beta)


class CopulaMarginsConfig(_ModelBase):
    model: Literal["copula_margins"]
    copula: Annotated[
        Union[GaussianCopulaConfig, GumbelCopulaConfig, MOCopulaConfig], Field(discriminator="family")
    ]
    lambda1: float = Field(gt=0)
    lambda2: float = Field(gt=0)
    method: Literal["direct", "stepwise"] = "direct"
    d: Literal[2] = 2

    def build(self):
        return self.copula.build()


ModelConfig = Annotated[
    Union[
        MarshallOlkinConfig,
        FreundConfig,
        AcbveConfig,
        LoopingConfig,
        OneFactorConfig,
        MultiFactorConfig,
        CopulaMarginsConfig,
    ],
    Field(discriminator="model"),
]

_ADAPTER = TypeAdapter(ModelConfig)


def parse_config(doc: dict):
    """Validate a decoded JSON document and check the model parameters build."""
    from pydantic import ValidationError

    try:
        cfg = _ADAPTER.validate_python(doc)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None
    try:
        cfg.grid_or_none()
        if hasattr(cfg, "build"):
            cfg.build()
        else:
            cfg.generator()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: str | Path):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return parse_config(doc)
