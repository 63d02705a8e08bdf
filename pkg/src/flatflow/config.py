"""Experiment configuration."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field

from flatflow.cover import DEFAULT_MAX_NODES
from flatflow.surface import Tolerances


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters shared by the experiment commands.

    radius       patch radius R (length units)
    s_factor     Poincaré exponent s = s_factor * e_hat
    samples      number of sampled geodesics N
    seed         master seed; sample i uses the stream (seed, i)
    arcs         number K of shortest saddle connections used as arcs
    max_length   length bound for saddle connection / cylinder listings
    max_nodes    cap on lifted singularities in one patch
    """

    radius: float = 4.5
    s_factor: float = 1.05
    samples: int = 1000
    seed: int = 0
    arcs: int = 40
    max_length: float = 4.0
    max_nodes: int = DEFAULT_MAX_NODES
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        for name in ("radius", "s_factor", "max_length"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("samples", "arcs", "max_nodes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def as_dict(self) -> dict:
        return asdict(self)


def worker_count() -> int:
    """Worker threads, from FLATFLOW_THREADS (default 1)."""
    raw = os.environ.get("FLATFLOW_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
