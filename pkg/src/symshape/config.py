"""Experiment configuration as a flat ``key = value`` text file.

Lines starting with ``#`` (and trailing ``# ...``) are comments; list values
are comma-separated. Unknown keys are rejected.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from .registration import RegistrationConfig
from .symmetric import VARIANTS, Variant
from .synthetic import PopulationConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    # registration
    sigma: float = 1.0
    alpha_squared: tuple = (0.01, 1.0, 100.0)
    n_steps: int = 10
    scheme: str = "rk2"
    control_point_spacing: float = 1.5
    max_iterations: int = 200
    convergence_tol: float = 1e-6
    initial_step: float = 1e-2
    freeze_control_points: bool = False
    # symmetric operators / transport
    variants: tuple = tuple(v.value for v in VARIANTS)
    n_rungs: int = 1
    # synthetic population
    seed: int = 0
    n_subjects: int = 20
    semi_axes: tuple = (1.0, 1.0, 1.5)
    subdivisions: int = 2
    deformation_sigma: float = 1.0
    grid_spacing: float = 1.0
    subject_scale: float = 0.15
    noise_scale: float = 0.01
    systolic_scale: float = 0.05
    contraction: float = 0.12
    output_dir: str = "out"

    def __post_init__(self):
        positive = ("sigma", "n_steps", "control_point_spacing", "max_iterations",
                    "convergence_tol", "initial_step", "n_rungs", "n_subjects", "deformation_sigma",
                    "grid_spacing")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not self.alpha_squared:
            raise ConfigError("alpha_squared must list at least one value")
        if any(not a > 0 for a in self.alpha_squared):
            raise ConfigError("alpha_squared values must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be an unsigned integer")
        if self.scheme not in ("euler", "rk2"):
            raise ConfigError(f"scheme must be 'euler' or 'rk2', got {self.scheme!r}")
        for v in self.variants:
            try:
                Variant(v)
            except ValueError:
                raise ConfigError(f"unknown variant {v!r}") from None

    def registration(self, alpha_squared=None) -> RegistrationConfig:
        a2 = self.alpha_squared[0] if alpha_squared is None else alpha_squared
        return RegistrationConfig(
            alpha_squared=float(a2), sigma=self.sigma, n_steps=self.n_steps, scheme=self.scheme,
            control_point_spacing=self.control_point_spacing,
            max_iterations=self.max_iterations, convergence_tol=self.convergence_tol,
            initial_step=self.initial_step, freeze_control_points=self.freeze_control_points)

    def population(self) -> PopulationConfig:
        return PopulationConfig(
            semi_axes=tuple(self.semi_axes), subdivisions=self.subdivisions,
            deformation_sigma=self.deformation_sigma, grid_spacing=self.grid_spacing,
            subject_scale=self.subject_scale, noise_scale=self.noise_scale,
            systolic_scale=self.systolic_scale, contraction=self.contraction)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_LIST_TYPES = {"alpha_squared": float, "semi_axes": float, "variants": str}


def _convert(name, raw, default):
    try:
        if name in _LIST_TYPES:
            items = [x.strip() for x in raw.split(",") if x.strip()]
            return tuple(_LIST_TYPES[name](x) for x in items)
        if isinstance(default, bool):
            low = raw.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"invalid value for {name}: {raw!r}") from None


def parse_config(text: str) -> ExperimentConfig:
    defaults = {f.name: f.default for f in fields(ExperimentConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in defaults:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw, defaults[key])
    return ExperimentConfig(**values)


def _format_value(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(cfg: ExperimentConfig) -> str:
    return "".join(f"{f.name} = {_format_value(getattr(cfg, f.name))}\n" for f in fields(cfg))


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
