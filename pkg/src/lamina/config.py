from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Optional


@dataclass(frozen=True)
class Config:
    depth: int = 6            # factor length k for languages and leaf tests
    n_max: int = 30           # iterate cap for orbit / train-track languages
    stall: int = 5            # consecutive stages with an unchanged set that count as stabilized
    ball: int = 2             # cyclic-length radius of the classes h feeding the Mitra language
    word_radius: int = 2      # |w| bound for candidates w t^m
    exp_max: int = 2          # |m| bound for candidates w t^m
    period_max: int = 6
    probe: int = 32           # prefix depth for ray equality
    budget: int = 10 ** 6     # word length cap
    tol: float = 1e-9
    jobs: int = 1
    out: Optional[str] = None
    slack: Optional[int] = None      # leaf-test slack, default = depth
    burn_in: Optional[int] = None    # orbit iterates shorter than this are skipped, default = 2 * depth
    seed_radius: int = 2      # conjugator length for attracting-ray seeds
    conj_radius: Optional[int] = None  # F_N-conjugator bound for grouping, default = word_radius + 2
    max_steps: int = 240      # iteration cap per attracting-ray seed
    pool_len: int = 2         # periodic candidate rays u^inf with |u| <= pool_len

    def __post_init__(self):
        for name in ("depth", "n_max", "stall", "ball", "word_radius", "exp_max", "period_max",
                     "probe", "budget", "jobs", "max_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"config field {name} must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.probe < self.depth:
            raise ValueError("probe must be >= depth")

    @property
    def leaf_slack(self) -> int:
        return self.depth if self.slack is None else self.slack

    @property
    def orbit_burn_in(self) -> int:
        return 2 * self.depth if self.burn_in is None else self.burn_in

    @property
    def conjugator_radius(self) -> int:
        return self.word_radius + 2 if self.conj_radius is None else self.conj_radius

    def with_(self, **kw) -> "Config":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("jobs")  # reports must not depend on the schedule
        d.pop("out")
        return d
