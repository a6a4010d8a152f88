"""Run configuration: precision, budgets, seed, effort level and the free constants."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction

from .core import DEFAULT_PRECISION, PRECISION_CAP, RunnerLabError

CONFIG_ENV = "RUNNERLAB_CONFIG"
EFFORTS = ("quick", "standard", "exhaustive")

DEFAULT_CONSTANTS = {
    "c": Fraction(1, 2),  # residue-window constant for the prime route
    "C_prime": Fraction(1),  # Riesz weight schedule
    "C1": Fraction(1),  # E_k in progressions
    "C2": Fraction(2**10),  # sunflower threshold
}


class ConfigError(RunnerLabError, ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    precision_bits: int = DEFAULT_PRECISION
    precision_cap: int = PRECISION_CAP
    candidate_budget: int = 10**7
    rng_seed: int = 42
    effort: str = "standard"
    constants: dict = field(default_factory=lambda: dict(DEFAULT_CONSTANTS))

    def __post_init__(self):
        if self.effort not in EFFORTS:
            raise ConfigError(f"effort must be one of {EFFORTS}")
        if min(self.precision_bits, self.precision_cap, self.candidate_budget) <= 0:
            raise ConfigError("budgets must be positive")
        if self.precision_bits > self.precision_cap:
            raise ConfigError("precision_bits exceeds precision_cap")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError("rng_seed must be a 64-bit unsigned integer")
        merged = dict(DEFAULT_CONSTANTS)
        try:
            merged.update({k: Fraction(v) for k, v in self.constants.items()})
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"constants must be rationals: {exc}") from exc
        object.__setattr__(self, "constants", merged)

    def constant(self, name: str) -> Fraction:
        return self.constants[name]

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["constants"] = {k: str(v) for k, v in self.constants.items()}
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**known)


def load_config(path: str | None = None) -> RunConfig:
    """Read a JSON config from ``path`` or from $RUNNERLAB_CONFIG; defaults otherwise."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return RunConfig()
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON at line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    try:
        return RunConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
