"""Offset-based dataset splits with a seeded validation sample.

The stream is consumed in corpus order: the first ``train_count`` examples
become the training set; after skipping ``pool_skip`` examples from the start
of the stream, the next ``pool_size`` become the validation pool (disjoint
from training whenever ``pool_skip >= train_count``); the validation set is a
seeded uniform sample without replacement from the pool, emitted in pool
order.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .masking import MaskedExample
from .records import write_examples

__all__ = ["SplitResult", "SplitSpec", "make_splits"]


@dataclass(frozen=True)
class SplitSpec:
    train_count: int
    pool_skip: int
    pool_size: int
    val_size: int
    seed: int = 42

    def __post_init__(self) -> None:
        for name in ("train_count", "pool_skip", "pool_size", "val_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.val_size > self.pool_size:
            raise ValueError("val_size must not exceed pool_size")


@dataclass(frozen=True)
class SplitResult:
    """Actual counts written, for the split manifest."""

    train: int
    pool: int
    val: int
    exhausted: bool  # stream ended before the requested counts were met


def make_splits(
    examples: Iterable[MaskedExample],
    spec: SplitSpec,
    train_path: str | Path,
    pool_path: str | Path,
    val_path: str | Path,
) -> SplitResult:
    """Write train/pool/val JSONL files from one pass over the stream."""
    train: list[MaskedExample] = []
    pool: list[MaskedExample] = []
    seen = 0
    for example in examples:
        if seen < spec.train_count:
            train.append(example)
        pool_pos = seen - spec.pool_skip
        if 0 <= pool_pos < spec.pool_size:
            pool.append(example)
        seen += 1
        if seen >= spec.train_count and seen >= spec.pool_skip + spec.pool_size:
            break

    val_count = min(spec.val_size, len(pool))
    # RandomState is stream-stable across numpy versions, which keeps the
    # sampled validation subset reproducible everywhere.
    rng = np.random.RandomState(spec.seed)
    chosen = sorted(rng.choice(len(pool), size=val_count, replace=False).tolist()) if pool else []
    val = [pool[i] for i in chosen]

    write_examples(train_path, train)
    write_examples(pool_path, pool)
    write_examples(val_path, val)
    exhausted = len(train) < spec.train_count or len(pool) < spec.pool_size
    return SplitResult(train=len(train), pool=len(pool), val=len(val), exhausted=exhausted)
