"""Experiment configuration: a YAML document mirrored by ``ExperimentConfig``.

Example::

    arm_set: {kind: sphere, dim: 2}
    prior: {kind: gaussian_isotropic}
    noise: {kind: gaussian, sigma: 1.0}
    policy: {name: pege}
    horizon: 4096
    replications: 200
    seed: 0
"""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from ..environment import (
    CustomPrior,
    FixedPointPrior,
    GaussianIsotropicPrior,
    GaussianNoise,
    UniformNoise,
    checkpoint_grid,
)
from ..geometry import ArmSet, Ellipsoid, FiniteSet, Polytope, UnitSphere
from ..policies import Policy, make_policy


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    arm_set: dict = field(default_factory=lambda: {"kind": "sphere", "dim": 2})
    prior: dict = field(default_factory=lambda: {"kind": "gaussian_isotropic"})
    noise: dict = field(default_factory=lambda: {"kind": "gaussian", "sigma": 1.0})
    policy: dict = field(default_factory=lambda: {"name": "pege"})
    horizon: int = 1024
    checkpoints: list[int] | None = None
    replications: int = 200
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        r = self.build_arm_set().dim
        if self.horizon < r + 1:
            raise ConfigError(f"horizon {self.horizon} must be at least r + 1 = {r + 1}")
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        for t in self.checkpoint_list:
            if not 1 <= t <= self.horizon:
                raise ConfigError(f"checkpoint {t} outside [1, {self.horizon}]")

    @property
    def checkpoint_list(self) -> list[int]:
        if self.checkpoints is None:
            return checkpoint_grid(self.horizon)
        return sorted(set(int(t) for t in self.checkpoints))

    @property
    def policy_label(self) -> str:
        label = self.policy["name"]
        if self.policy.get("alpha") is not None:
            label += f"[alpha={self.policy['alpha']:g}]"
        return label

    # -- builders -------------------------------------------------------------

    def build_arm_set(self) -> ArmSet:
        return build_arm_set(self.arm_set)

    def build_prior(self):
        spec = dict(self.prior)
        kind = spec.pop("kind")
        dim = self.build_arm_set().dim
        if kind == "gaussian_isotropic":
            return GaussianIsotropicPrior(dim)
        if kind == "fixed":
            prior = FixedPointPrior(spec["z"])
            if prior.dim != dim:
                raise ConfigError(f"fixed prior has dim {prior.dim}, arm set has dim {dim}")
            return prior
        if kind == "custom":
            return CustomPrior(dim, spec["tag"], dict(spec.get("params", {})))
        raise ConfigError(f"unknown prior kind {kind!r}")

    def build_noise(self):
        kind = self.noise.get("kind", "gaussian")
        if kind == "gaussian":
            return GaussianNoise(float(self.noise.get("sigma", 1.0)))
        if kind == "uniform":
            return UniformNoise(float(self.noise["half_width"]))
        raise ConfigError(f"unknown noise kind {kind!r}")

    def build_policy(self) -> Policy:
        spec = dict(self.policy)
        name = spec.pop("name")
        base = name.split("+")[-1]
        if base == "ue":
            spec.setdefault("sigma0", self.build_noise().sigma0)
        else:
            spec.pop("alpha", None)
        return make_policy(name, **spec)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**copy.deepcopy(data))

    def dump(self, path: str | Path | None = None) -> str:
        text = yaml.safe_dump(self.to_dict(), sort_keys=False)
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {})

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        """Apply ``{"a.b.c": value}`` overrides (dotted paths into nested sections)."""
        data = self.to_dict()
        for path, value in overrides.items():
            node = data
            keys = path.split(".")
            for key in keys[:-1]:
                node = node.setdefault(key, {})
            node[keys[-1]] = value
        return type(self).from_dict(data)


def build_arm_set(spec: dict) -> ArmSet:
    kind = spec.get("kind")
    if kind == "sphere":
        return UnitSphere(int(spec["dim"]))
    if kind == "ellipsoid":
        return Ellipsoid(spec["shape"])
    if kind == "finite":
        return FiniteSet(spec["arms"])
    if kind == "simplex":
        return Polytope.simplex(int(spec["dim"]))
    if kind == "hypercube":
        return Polytope.hypercube(int(spec["dim"]))
    if kind == "polytope":
        return Polytope(spec["vertices"])
    raise ConfigError(f"unknown arm set kind {kind!r}")
