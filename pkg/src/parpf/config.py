"""Experiment configuration: flat key=value files overridden by CLI flags."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .exceptions import ConfigError

KNOWN_VARIANTS = ("centralised-bf", "ensemble-bf", "ensemble-apf", "double-bf")


def default_workers() -> int:
    env = os.environ.get("PARPF_WORKERS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"PARPF_WORKERS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


@dataclass
class ExperimentConfig:
    """Sweep definition shared by the CLI subcommands.

    ``reference`` selects the error baseline: ``proxy`` (a large reference
    bootstrap filter with ``proxy_particles`` particles, the default for
    lorenz63) or ``truth`` (the simulated ground-truth state, the default
    and only sensible choice for the lattice model, scored on voltages).
    """

    model: str = "lorenz63"
    variants: list[str] = field(default_factory=lambda: ["centralised-bf"])
    n_filters_list: list[int] = field(default_factory=lambda: [8])
    n_particles_list: list[int] = field(default_factory=lambda: [100])
    replicates: int = 10
    n_observations: int = 50
    island_period: int = 5
    seed: int = 0
    workers: int = 0                      # 0: resolve via PARPF_WORKERS / cpu count
    reference: str = ""                   # '', 'proxy', or 'truth'
    proxy_particles: int = 10_000
    fhn_grid: int = 16
    observations_path: str = ""
    trajectory_path: str = ""
    out_path: str = "results.csv"

    def __post_init__(self):
        if self.model not in ("lorenz63", "fhn"):
            raise ConfigError(f"unknown model {self.model!r}")
        if not self.variants:
            raise ConfigError("at least one variant is required")
        for v in self.variants:
            if v not in KNOWN_VARIANTS:
                raise ConfigError(f"unknown variant {v!r} (expected one of {KNOWN_VARIANTS})")
        if not self.n_filters_list or not self.n_particles_list:
            raise ConfigError("sweep lists for M and N must be non-empty")
        if min(self.n_filters_list) < 1 or min(self.n_particles_list) < 1:
            raise ConfigError("sweep values must be >= 1")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.n_observations < 0:
            raise ConfigError("n_observations must be >= 0")
        if self.island_period < 1:
            raise ConfigError("island_period must be >= 1")
        if self.workers == 0:
            self.workers = default_workers()
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not self.reference:
            self.reference = "proxy" if self.model == "lorenz63" else "truth"
        if self.reference not in ("proxy", "truth"):
            raise ConfigError(f"unknown reference {self.reference!r}")


_LIST_INT_KEYS = {"M": "n_filters_list", "N": "n_particles_list"}
_INT_KEYS = {
    "reps": "replicates",
    "T": "n_observations",
    "island_period": "island_period",
    "seed": "seed",
    "workers": "workers",
    "proxy_J": "proxy_particles",
    "fhn_grid": "fhn_grid",
}
_STR_KEYS = {
    "model": "model",
    "reference": "reference",
    "obs": "observations_path",
    "traj": "trajectory_path",
    "out": "out_path",
}


def _parse_int_list(value: str, key: str) -> list[int]:
    try:
        return [int(v) for v in str(value).split(",") if v != ""]
    except ValueError as exc:
        raise ConfigError(f"{key} must be a comma-separated integer list") from exc


def parse_config(file_path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from an optional key=value file plus override pairs.

    Overrides (typically CLI flags) use the same key names as the file and
    win over it.  Unknown keys are rejected.
    """
    raw: dict[str, str] = {}
    if file_path:
        text = Path(file_path).read_text()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{file_path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            raw[key.strip()] = value.strip()
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    kwargs: dict = {}
    for key, value in raw.items():
        if key in _LIST_INT_KEYS:
            kwargs[_LIST_INT_KEYS[key]] = _parse_int_list(value, key)
        elif key in _INT_KEYS:
            try:
                kwargs[_INT_KEYS[key]] = int(value)
            except ValueError as exc:
                raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
        elif key == "variants":
            kwargs["variants"] = [v.strip() for v in str(value).split(",") if v.strip()]
        elif key in _STR_KEYS:
            kwargs[_STR_KEYS[key]] = str(value)
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
    return ExperimentConfig(**kwargs)


def config_field_names() -> list[str]:
    return [f.name for f in fields(ExperimentConfig)]
