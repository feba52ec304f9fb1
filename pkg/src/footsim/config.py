"""Run configuration: one structured file with sections mirroring the module
configs; every run embeds the config hash in its outputs."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .rewards import RewardConfig
from .sim import SimConfig
from .skills import TrainConfig
from .trajectory import config_hash


@dataclass
class RunConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    rewards: RewardConfig = field(default_factory=RewardConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    buffer_capacity: int = 5000
    latent_dim: int = 8
    scenario_team_size: int = 3
    desk_scale: float = 1.0

    def to_dict(self) -> dict:
        return {
            "sim": dataclasses.asdict(self.sim),
            "rewards": dataclasses.asdict(self.rewards),
            "train": dataclasses.asdict(self.train),
            "buffer_capacity": self.buffer_capacity,
            "latent_dim": self.latent_dim,
            "scenario_team_size": self.scenario_team_size,
            "desk_scale": self.desk_scale,
        }

    def hash(self) -> str:
        d = self.to_dict()
        d["rewards"]["dribble_weights"] = list(d["rewards"]["dribble_weights"])
        d["rewards"]["move_weights"] = list(d["rewards"]["move_weights"])
        d["rewards"]["move_mix"] = list(d["rewards"]["move_mix"])
        return config_hash(d)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        raw = json.loads(Path(path).read_text())
        cfg = cls()
        if "sim" in raw:
            cfg.sim = SimConfig(**raw["sim"])
        if "rewards" in raw:
            r = dict(raw["rewards"])
            for k in ("dribble_weights", "move_weights", "move_mix"):
                if k in r:
                    r[k] = tuple(r[k])
            cfg.rewards = RewardConfig(**r)
        if "train" in raw:
            cfg.train = TrainConfig(**raw["train"])
        for k in ("buffer_capacity", "latent_dim", "scenario_team_size", "desk_scale"):
            if k in raw:
                setattr(cfg, k, raw[k])
        return cfg
