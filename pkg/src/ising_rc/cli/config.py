"""Experiment configuration: YAML in, validated dataclass out, stable hash."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from ..lattice import FREE, PERIODIC
from ..spin_mc import SAMPLERS, resolve_beta

SCHEMA_VERSION = 1
MAX_SITES = 5_000_000

# fields that do not change the statistics and so stay out of the hash
NON_SEMANTIC = ("experiment_id", "out", "threads")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScheduleConfig:
    n_sweeps: int = 1000
    burn_in: int | None = 100
    thinning: int = 1
    replicas: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment.  ``beta`` may be numeric or ``"critical:d"``.

    ``shape`` (side lengths) replaces ``radii`` for the tilting experiment
    when an even-sided box is wanted.  ``h`` is a list so one tilting run can
    cover several fields.
    """

    d: int = 2
    radii: tuple[int, ...] = (2, 4)
    M: int = 2
    beta: float | str = "critical:2"
    bc: str = FREE
    h: tuple[float, ...] = (0.0,)
    a: float = 1.0
    sampler: str = "sw"
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    seed: int = 0
    shape: tuple[int, ...] | None = None
    test_functions: tuple[str, ...] = ("indicator", "bump", "coordinate")
    t_grid: tuple[float, ...] = (-1.0, -0.5, 0.5, 1.0)
    ess_floor: float = 100.0
    max_seconds: float | None = None
    experiment_id: str = "experiment"
    out: str | None = None
    threads: int = 1
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"schema_version {self.schema_version} is not supported "
                              f"(expected {SCHEMA_VERSION})")
        if self.d < 1:
            raise ConfigError("d must be positive")
        r = list(self.radii)
        if not r or any(b <= a for a, b in zip(r, r[1:])) or r[0] < 1:
            raise ConfigError(f"radii must be positive and strictly increasing, got {r}")
        if self.M < 1:
            raise ConfigError("M must be >= 1")
        if self.bc not in (FREE, PERIODIC):
            raise ConfigError(f"bc must be free or periodic, got {self.bc!r}")
        if self.sampler not in SAMPLERS:
            raise ConfigError(f"sampler must be one of {sorted(SAMPLERS)}")
        if not self.a > 0:
            raise ConfigError("lattice spacing a must be positive")
        if self.shape is not None and len(self.shape) != self.d:
            raise ConfigError("shape needs one side length per dimension")
        try:
            beta = self.beta_value
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if beta < 0:
            raise ConfigError("beta must be >= 0")
        if self.largest_box_sites() > MAX_SITES:
            raise ConfigError(f"largest box has {self.largest_box_sites()} sites; budget is {MAX_SITES}")

    @property
    def beta_value(self) -> float:
        return resolve_beta(self.beta)

    def outer_radius(self, n: int) -> int:
        return self.M * n if self.bc == FREE else n

    def largest_box_sites(self) -> int:
        if self.shape is not None:
            sites = 1
            for s in self.shape:
                sites *= s
            return sites
        return (2 * self.outer_radius(self.radii[-1]) + 1) ** self.d

    # -- hashing ----------------------------------------------------------
    def semantic_dict(self) -> dict:
        d = asdict(self)
        for k in NON_SEMANTIC:
            d.pop(k)
        d["beta"] = self.beta_value
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.semantic_dict(), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


_TUPLES = ("radii", "h", "shape", "test_functions", "t_grid")


def config_from_dict(raw: dict) -> ExperimentConfig:
    raw = dict(raw or {})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "schedule" in raw:
        sched = raw["schedule"] or {}
        bad = set(sched) - {f.name for f in fields(ScheduleConfig)}
        if bad:
            raise ConfigError(f"unknown schedule keys: {sorted(bad)}")
        raw["schedule"] = ScheduleConfig(**sched)
    for k in _TUPLES:
        if k in raw and raw[k] is not None:
            v = raw[k]
            raw[k] = tuple(v) if isinstance(v, (list, tuple)) else (v,)
    return ExperimentConfig(**raw)


def load_config(path) -> ExperimentConfig:
    with Path(path).open() as fh:
        return config_from_dict(yaml.safe_load(fh))


def dump_config(cfg: ExperimentConfig) -> str:
    d = asdict(cfg)
    for k in _TUPLES:
        if d[k] is not None:
            d[k] = list(d[k])
    return yaml.safe_dump(d, sort_keys=True)


# built-in experiments selected by --profile when no --config is given
PRESETS = {
    "scan": {
        "quick": dict(experiment_id="scan-d3-quick", d=3, radii=(2, 3, 4, 5, 6), M=2,
                      beta="critical:3", sampler="sw",
                      schedule=ScheduleConfig(n_sweeps=1500, burn_in=100)),
        "full": dict(experiment_id="scan-d4", d=4, radii=(3, 4, 5, 6, 7, 8), M=2,
                     beta="critical:4", sampler="sw",
                     schedule=ScheduleConfig(n_sweeps=1000, burn_in=100)),
    },
    "tilt": {
        "quick": dict(experiment_id="tilt-d2", d=2, radii=(4,), shape=(8, 8), beta="critical:2",
                      a=1 / 8, h=(0.5, 1.0), sampler="wolff",
                      schedule=ScheduleConfig(n_sweeps=20000, burn_in=200)),
        "full": dict(experiment_id="tilt-d3", d=3, radii=(2,), shape=(5, 5, 5), beta="critical:3",
                     a=1 / 5, h=(0.5, 1.0), sampler="wolff",
                     schedule=ScheduleConfig(n_sweeps=20000, burn_in=200)),
    },
}


def preset(command: str, profile: str) -> ExperimentConfig:
    try:
        return ExperimentConfig(**PRESETS[command][profile])
    except KeyError:
        raise ConfigError(f"no built-in {command} experiment for profile {profile!r}") from None
