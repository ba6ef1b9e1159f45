"""Experiment configuration: flat key=value files, canonical hashing."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

KNOWN_EXPERIMENTS = (
    "simulate-bbm",
    "sample-cluster",
    "sample-stable",
    "sample-zeta",
    "estimate-gamma",
    "compensated-mass",
    "verify-suite",
)


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat `key = value` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        k, _, v = line.partition("=")
        k, v = k.strip(), v.strip()
        if not k:
            raise ConfigError(f"line {lineno}: empty key")
        if k in out:
            raise ConfigError(f"line {lineno}: duplicate key {k!r}")
        out[k] = v
    return out


@dataclass
class ExperimentConfig:
    """A named experiment plus its typed parameters.

    ``workers`` and ``out_dir`` control execution and are excluded from the
    canonical form: outputs are a pure function of (experiment, seed,
    replicas, params).
    """

    experiment: str
    seed: int = 0
    replicas: int = 1
    out_dir: Path = Path("runs")
    workers: int = 1
    params: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.experiment not in KNOWN_EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; expected one of {KNOWN_EXPERIMENTS}"
            )
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def from_mapping(
        cls,
        mapping: dict[str, str],
        experiment: str | None = None,
        seed: int | None = None,
        replicas: int | None = None,
        out_dir: str | Path | None = None,
        workers: int | None = None,
    ) -> "ExperimentConfig":
        params = dict(mapping)
        name = experiment or params.pop("experiment", None)
        if name is None:
            raise ConfigError("no experiment named (config key 'experiment' or CLI subcommand)")
        params.pop("experiment", None)
        cfg_seed = seed if seed is not None else int(params.pop("seed", "0"))
        cfg_replicas = replicas if replicas is not None else int(params.pop("replicas", "1"))
        cfg_out = Path(out_dir) if out_dir is not None else Path(params.pop("out", "runs"))
        cfg_workers = workers if workers is not None else int(params.pop("workers", "1"))
        params.pop("seed", None)
        params.pop("replicas", None)
        params.pop("out", None)
        params.pop("workers", None)
        return cls(
            experiment=name,
            seed=cfg_seed,
            replicas=cfg_replicas,
            out_dir=cfg_out,
            workers=cfg_workers,
            params=params,
        )

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        return cls.from_mapping(parse_config_text(Path(path).read_text()), **overrides)

    def value(self, name: str, cast=str, default=None):
        if name in self.params:
            raw = self.params[name]
            if cast is bool:
                return raw.lower() in ("1", "true", "yes", "on")
            return cast(raw)
        if default is None:
            raise ConfigError(f"experiment {self.experiment!r} requires parameter {name!r}")
        return default

    def canonical(self) -> str:
        """Sorted key=value lines; the hashing form."""
        items = dict(self.params)
        items["experiment"] = self.experiment
        items["seed"] = str(self.seed)
        items["replicas"] = str(self.replicas)
        return "\n".join(f"{k}={items[k]}" for k in sorted(items)) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]
