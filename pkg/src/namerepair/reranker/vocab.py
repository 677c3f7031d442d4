"""Subtoken vocabulary shared by the code and name encoders."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

__all__ = ["MASK_TOKEN", "PAD_TOKEN", "SPECIAL_TOKENS", "UNK_TOKEN", "SubtokenVocab"]

UNK_TOKEN = "<unk>"
PAD_TOKEN = "<pad>"
MASK_TOKEN = "<mask>"  # reserved window token standing in for the placeholder
SPECIAL_TOKENS = (UNK_TOKEN, PAD_TOKEN, MASK_TOKEN)


@dataclass(frozen=True)
class SubtokenVocab:
    """Dense token -> index map with reserved unknown/padding/mask entries."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.tokens[: len(SPECIAL_TOKENS)] != SPECIAL_TOKENS:
            raise ValueError("vocabulary must start with the reserved special tokens")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary contains duplicate tokens")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        return self._index.get(token, 0)  # unknown -> 0

    def ids(self, tokens: Iterable[str]) -> list[int]:
        index = self._index
        return [index.get(t, 0) for t in tokens]

    @classmethod
    def build(cls, token_streams: Iterable[Iterable[str]], min_count: int = 1) -> SubtokenVocab:
        """Build from token streams, ordered by descending frequency then text."""
        counts: Counter[str] = Counter()
        for stream in token_streams:
            counts.update(stream)
        for special in SPECIAL_TOKENS:
            counts.pop(special, None)
        kept = sorted(
            (t for t, c in counts.items() if c >= min_count),
            key=lambda t: (-counts[t], t),
        )
        return cls(tokens=SPECIAL_TOKENS + tuple(kept))
