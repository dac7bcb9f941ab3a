"""Experiment configuration: a strict plain-text key/value document.

Format: one ``key = value`` per line, ``#`` starts a comment, keys use
dotted sections (``grid.nx``).  Unknown keys are errors (a silent typo in
nu or the amplitude would invalidate smallness assumptions unnoticed);
defaults apply only to absent keys and are echoed back by serialization,
so serialize(parse(text)) round-trips to an equal config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fields import InitialProfile, ProfileComponent, StripGrid
from .solver import SCHEMES, StepperConfig

EXPERIMENTS = (
    "linear-decay-continuum",
    "linear-decay-truncated",
    "nonlinear-decay",
    "symbol-bounds",
    "kernel-integral",
    "nu-star",
    "energy-check",
    "oracle-suite",
)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    output_dir: str = "out"
    seed: int = 0
    # grid
    grid_half_width_lx: float = 200.0 * math.pi
    grid_nx: int = 1024
    grid_ny: int = 32
    grid_nu: float = 1.0
    # stepper
    stepper_dt: float = 0.5
    stepper_cfl_safety: float = 0.8
    stepper_dealias_fraction: float = 2.0 / 3.0
    stepper_scheme: str = "strang-rk2"
    # initial profile (single sine row, Gaussian xi-envelope)
    profile_k: int = 1
    profile_amplitude: float = 1e-4
    profile_xi_scale: float = 1.0
    # time sampling / fit window
    times_t_min: float = 10.0
    times_t_max: float = 1e4
    times_per_decade: int = 12
    # symbol-bound sampling
    bounds_samples: int = 1000
    bounds_nus: tuple = (0.01, 1.0)
    # oracle suite
    oracle_modes: int = 1000

    def grid(self) -> StripGrid:
        return StripGrid(
            half_width_lx=self.grid_half_width_lx,
            nx=self.grid_nx,
            ny=self.grid_ny,
            nu=self.grid_nu,
        )

    def stepper(self) -> StepperConfig:
        return StepperConfig(
            dt=self.stepper_dt,
            cfl_safety=self.stepper_cfl_safety,
            dealias_fraction=self.stepper_dealias_fraction,
            scheme=self.stepper_scheme,
        )

    def profile(self) -> InitialProfile:
        return InitialProfile(
            theta=(
                ProfileComponent(
                    k=self.profile_k,
                    amplitude=self.profile_amplitude,
                    xi_scale=self.profile_xi_scale,
                ),
            )
        )

    def sample_times(self):
        n = max(int(round(self.times_per_decade
                          * math.log10(self.times_t_max / self.times_t_min))), 8) + 1
        return np.logspace(
            math.log10(self.times_t_min), math.log10(self.times_t_max), n
        )


def _parse_float_list(text):
    return tuple(float(part) for part in text.split(",") if part.strip())


#: document key -> (attribute, parser, formatter)
_SCHEMA = {
    "experiment": ("experiment", str, str),
    "output_dir": ("output_dir", str, str),
    "seed": ("seed", int, repr),
    "grid.half_width_lx": ("grid_half_width_lx", float, repr),
    "grid.nx": ("grid_nx", int, repr),
    "grid.ny": ("grid_ny", int, repr),
    "grid.nu": ("grid_nu", float, repr),
    "stepper.dt": ("stepper_dt", float, repr),
    "stepper.cfl_safety": ("stepper_cfl_safety", float, repr),
    "stepper.dealias_fraction": ("stepper_dealias_fraction", float, repr),
    "stepper.scheme": ("stepper_scheme", str, str),
    "profile.k": ("profile_k", int, repr),
    "profile.amplitude": ("profile_amplitude", float, repr),
    "profile.xi_scale": ("profile_xi_scale", float, repr),
    "times.t_min": ("times_t_min", float, repr),
    "times.t_max": ("times_t_max", float, repr),
    "times.per_decade": ("times_per_decade", int, repr),
    "bounds.samples": ("bounds_samples", int, repr),
    "bounds.nus": ("bounds_nus", _parse_float_list,
                   lambda v: ",".join(repr(x) for x in v)),
    "oracle.modes": ("oracle_modes", int, repr),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _, _) in _SCHEMA.items()}


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a configuration document.

    Raises:
        ConfigError: syntax error (with line number), unknown or duplicate
            key, type mismatch, or a value violating a module precondition
            (message names the offending key).
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _SCHEMA:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in values:
            raise ConfigError("duplicate key", key=key, line=lineno)
        attr, parser, _ = _SCHEMA[key]
        try:
            values[attr] = parser(val)
        except ValueError:
            raise ConfigError(f"cannot parse value {val!r}", key=key, line=lineno)

    if "experiment" not in values:
        raise ConfigError("missing required key", key="experiment")
    cfg = ExperimentConfig(**values)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig):
    """Check every numeric parameter against module preconditions."""
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {cfg.experiment!r}; choose from {EXPERIMENTS}",
            key="experiment",
        )
    try:
        cfg.grid()
    except ValueError as exc:
        raise ConfigError(str(exc), key=_field_key(str(exc), "grid"))
    try:
        cfg.stepper()
    except ValueError as exc:
        raise ConfigError(str(exc), key=_field_key(str(exc), "stepper"))
    if cfg.profile_k < 1:
        raise ConfigError("profile k must be >= 1", key="profile.k")
    if not cfg.profile_xi_scale > 0:
        raise ConfigError("xi_scale must be > 0", key="profile.xi_scale")
    if not 0 < cfg.times_t_min < cfg.times_t_max:
        raise ConfigError("need 0 < t_min < t_max", key="times.t_min")
    if cfg.times_per_decade < 1:
        raise ConfigError("per_decade must be >= 1", key="times.per_decade")
    if cfg.bounds_samples < 1:
        raise ConfigError("samples must be >= 1", key="bounds.samples")
    if any(nu <= 0 for nu in cfg.bounds_nus):
        raise ConfigError("viscosities must be > 0", key="bounds.nus")
    if cfg.oracle_modes < 1:
        raise ConfigError("modes must be >= 1", key="oracle.modes")
    if cfg.stepper_scheme not in SCHEMES:
        raise ConfigError(f"scheme must be one of {SCHEMES}", key="stepper.scheme")


def _field_key(message, section):
    for word in ("half_width_lx", "nx", "ny", "nu", "dt", "cfl_safety",
                 "dealias_fraction", "scheme"):
        if word in message:
            return f"{section}.{word}"
    return section


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical text form with every key present (defaults filled in)."""
    lines = []
    for key, (attr, _, fmt) in _SCHEMA.items():
        lines.append(f"{key} = {fmt(getattr(cfg, attr))}")
    return "\n".join(lines) + "\n"


def config_as_dict(cfg: ExperimentConfig) -> dict:
    return {key: getattr(cfg, attr) for key, (attr, _, _) in _SCHEMA.items()}
