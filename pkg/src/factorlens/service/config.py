"""Service configuration: JSON file with environment-variable overrides."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields


@dataclass
class ServiceConfig:
    port: int = 8450
    host: str = "127.0.0.1"
    data_dir: str = "."
    cache_dir: str | None = None
    checkpoint: str | None = None
    seed: int = 0
    epochs: int = 200
    lr: float = 1e-3
    perplexity: float = 30.0

    ENV_PREFIX = "FACTORLENS_"

    @classmethod
    def load(cls, path: str | None = None, env: dict | None = None) -> "ServiceConfig":
        values: dict = {}
        if path:
            with open(path) as fh:
                values.update(json.load(fh))
        env = os.environ if env is None else env
        for f in fields(cls):
            key = cls.ENV_PREFIX + f.name.upper()
            if key in env:
                raw = env[key]
                if f.name in ("port", "seed", "epochs"):
                    values[f.name] = int(raw)
                elif f.name in ("lr", "perplexity"):
                    values[f.name] = float(raw)
                else:
                    values[f.name] = raw
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown service config keys: {sorted(unknown)}")
        return cls(**values)
