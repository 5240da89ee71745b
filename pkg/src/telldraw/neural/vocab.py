"""Token vocabulary for the message encoder."""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

import numpy as np

PAD = "<pad>"
UNK = "<unk>"


class Vocabulary:
    """Frequency-thresholded token table; everything rare maps to UNK."""

    def __init__(self, tokens: Sequence[str]):
        if tokens[:2] != [PAD, UNK]:
            raise ValueError("vocabulary must start with the pad and unk tokens")
        self.tokens = list(tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}
        self.pad_id = 0
        self.unk_id = 1

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def build(
        cls, messages: Iterable[Sequence[str]], min_freq: int = 2
    ) -> "Vocabulary":
        counts: Counter = Counter()
        for tokens in messages:
            counts.update(tokens)
        kept = sorted(
            (t for t, n in counts.items() if n >= min_freq),
            key=lambda t: (-counts[t], t),
        )
        return cls([PAD, UNK] + kept)

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        """Token ids; an empty message becomes the single UNK token."""
        if not tokens:
            return np.array([self.unk_id], dtype=np.int64)
        return np.array(
            [self.index.get(t, self.unk_id) for t in tokens], dtype=np.int64
        )

    def to_json(self) -> list[str]:
        return list(self.tokens)

    @classmethod
    def from_json(cls, tokens: list[str]) -> "Vocabulary":
        return cls(tokens)
