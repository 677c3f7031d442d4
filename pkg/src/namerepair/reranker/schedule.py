"""Learning-rate schedule: linear warmup into cosine decay, or constant.

During warmup the rate climbs linearly to the peak; afterwards it follows a
half-cosine from the peak down to zero at the final step. The constant
schedule is the ablation control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["TrainConfig", "lr_at_step"]


@dataclass(frozen=True)
class TrainConfig:
    steps: int
    batch_size: int = 32
    peak_lr: float = 2e-4
    warmup_steps: int = 0
    schedule: str = "warmup_cosine"  # "warmup_cosine" | "constant"
    dropout_rate: float = 0.0
    seed: int = 0
    in_batch_negatives: bool = False

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.batch_size <= 0:
            raise ValueError("batch_size must be positive")
        if self.peak_lr <= 0:
            raise ValueError("peak_lr must be positive")
        if not (0 <= self.warmup_steps <= max(self.steps, 0)):
            raise ValueError("warmup_steps must lie in [0, steps]")
        if self.schedule not in ("warmup_cosine", "constant"):
            raise ValueError(f"unknown schedule: {self.schedule}")
        if not (0 <= self.dropout_rate < 1):
            raise ValueError("dropout_rate must be in [0, 1)")


def lr_at_step(step: int, cfg: TrainConfig) -> float:
    """Learning rate at ``step`` (0 <= step <= cfg.steps)."""
    if not (0 <= step <= cfg.steps):
        raise ValueError(f"step {step} outside [0, {cfg.steps}]")
    if cfg.schedule == "constant":
        return cfg.peak_lr
    if cfg.warmup_steps > 0 and step <= cfg.warmup_steps:
        return cfg.peak_lr * step / cfg.warmup_steps
    span = cfg.steps - cfg.warmup_steps
    if span <= 0:
        return cfg.peak_lr
    progress = (step - cfg.warmup_steps) / span
    return cfg.peak_lr * 0.5 * (1.0 + math.cos(math.pi * progress))
