"""Run configuration: TOML loading, schema validation, canonical hashing."""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field

from .branch import SolveSettings, default_schedule
from .errors import ConfigError
from .radial import (DEFAULT_N, DEFAULT_R_MAX, DEFAULT_RATIO, ModelParams,
                     RadialGrid, make_grid)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_SCHEMA = {
    "model": {"p", "e", "omega", "epsilon", "m"},
    "grid": {"r_max", "n", "scheme", "ratio"},
    "settings": {"damping", "outer_tol", "max_outer",
                 "bracket_lo", "bracket_hi"},
    "run": {"schedule", "output", "seed"},
    "sweep": {"p_values", "omega_over_m_values"},
}


@dataclass(frozen=True)
class RunConfig:
    """Validated contents of one run configuration file."""

    model: dict
    grid_spec: dict
    settings_spec: dict = field(default_factory=dict)
    schedule: list[float] | None = None
    output: str = "out"
    seed: int = 0
    sweep_spec: dict = field(default_factory=dict)

    def params(self) -> ModelParams:
        return ModelParams(**self.model)

    def grid(self) -> RadialGrid:
        g = self.grid_spec
        return make_grid(g["r_max"], g["n"], g["scheme"], g.get("ratio", DEFAULT_RATIO))

    def solve_settings(self) -> SolveSettings:
        s = dict(self.settings_spec)
        lo = s.pop("bracket_lo", None)
        hi = s.pop("bracket_hi", None)
        if (lo is None) != (hi is None):
            raise ConfigError("bracket_lo and bracket_hi come together")
        if lo is not None:
            s["bracket"] = (lo, hi)
        return SolveSettings(**s)

    def effective_schedule(self) -> list[float]:
        if self.schedule is not None:
            return list(self.schedule)
        return default_schedule()

    def canonical(self) -> dict:
        return {
            "model": self.model,
            "grid": self.grid_spec,
            "settings": self.settings_spec,
            "schedule": self.schedule,
            "output": self.output,
            "seed": self.seed,
            "sweep": self.sweep_spec,
        }

    def hash(self) -> str:
        """Stable under key reordering: keys are sorted before hashing."""
        blob = json.dumps(self.canonical(), sort_keys=True,
                          separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _check_keys(data: dict) -> None:
    for section, content in data.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(content, dict):
            raise ConfigError(f"section {section!r} must be a table")
        for key in content:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section {section!r}")


def load_config(path) -> RunConfig:
    """Parse and validate a TOML run configuration.

    Unknown sections or keys are rejected by name; every module precondition
    reachable from the file (p-range, grid size, damping range, schedule
    monotonicity) is checked here so failures carry file context.
    """
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}")

    _check_keys(data)
    if "model" not in data:
        raise ConfigError("config needs a [model] section")

    model = dict(data["model"])
    grid_spec = {"r_max": DEFAULT_R_MAX, "n": DEFAULT_N,
                 "scheme": "geometric", "ratio": DEFAULT_RATIO}
    grid_spec.update(data.get("grid", {}))
    settings_spec = dict(data.get("settings", {}))
    run = data.get("run", {})
    schedule = run.get("schedule")
    if schedule is not None:
        schedule = [float(x) for x in schedule]

    cfg = RunConfig(model=model, grid_spec=grid_spec,
                    settings_spec=settings_spec, schedule=schedule,
                    output=str(run.get("output", "out")),
                    seed=int(run.get("seed", 0)),
                    sweep_spec=dict(data.get("sweep", {})))
    # touch every derived object so validation errors surface at load time
    try:
        cfg.params()
        cfg.grid()
        cfg.solve_settings()
        sched = cfg.effective_schedule()
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise ValueError("run.schedule must decrease strictly")
        if sched and sched[-1] < 0:
            raise ValueError("run.schedule entries must be >= 0")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc
    return cfg
