from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .regions import DEDUP_RULES


@dataclass
class RunConfig:
    alpha: float = 0.5
    tau: float = math.radians(3.0)  # frontal-pose threshold, radians
    far: float = 0.001
    dedup_rule: str = "fixture"
    include_ftar: bool = True
    alpha_first_step: bool = False
    # latent perturbation used upstream to synthesise mated probes; recorded only
    epsilon: float = 1e-7

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 < self.tau <= math.pi:
            raise ValueError(f"tau must be in (0, pi], got {self.tau}")
        if not 0.0 < self.far < 1.0:
            raise ValueError(f"far must be in (0, 1), got {self.far}")
        if self.dedup_rule not in DEDUP_RULES:
            raise ValueError(f"unknown dedup rule {self.dedup_rule!r}")
        if not self.epsilon >= 0.0:
            raise ValueError("epsilon must be non-negative")

    @property
    def tau_deg(self) -> float:
        return math.degrees(self.tau)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")
