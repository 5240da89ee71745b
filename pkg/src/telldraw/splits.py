"""Crosstalk partitioning: teller train, drawer train, dev, test.

Two paths, per the corpus situation at hand. When the release carries split
labels they are reproduced verbatim. Otherwise the split is derived
deterministically: scene ids are ordered by a seeded SHA-256 hash and cut at
fixed sizes. The published partition sizes (3994/3995/1002/1002) are not an
exact 40/40/10/10 of 9,993 dialogs (they come from a 40/40/10/10 cut of the
underlying 10,020 scenes minus 27 excluded empty ones), so a corpus of
exactly 9,993 dialogs gets the published sizes and any other corpus gets a
largest-remainder 40/40/10/10 allocation.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

PARTITIONS = ("teller_train", "drawer_train", "dev", "test")
FRACTIONS = (0.40, 0.40, 0.10, 0.10)
RELEASE_SIZES: dict[int, tuple[int, int, int, int]] = {9993: (3994, 3995, 1002, 1002)}


class SplitError(Exception):
    pass


@dataclass(frozen=True)
class CorpusSplit:
    teller_train: frozenset[str]
    drawer_train: frozenset[str]
    dev: frozenset[str]
    test: frozenset[str]
    source: str = "derived"

    def partitions(self) -> dict[str, frozenset[str]]:
        return {name: getattr(self, name) for name in PARTITIONS}

    def sizes(self) -> tuple[int, int, int, int]:
        return tuple(len(getattr(self, name)) for name in PARTITIONS)

    def partition_of(self, scene_id: str) -> str:
        for name, ids in self.partitions().items():
            if scene_id in ids:
                return name
        raise KeyError(scene_id)

    def validate(self) -> None:
        parts = list(self.partitions().values())
        total = sum(len(p) for p in parts)
        union = frozenset().union(*parts)
        if total != len(union):
            raise SplitError("partitions overlap")

    def to_json(self) -> dict:
        return {
            "source": self.source,
            **{name: sorted(getattr(self, name)) for name in PARTITIONS},
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "CorpusSplit":
        return cls(
            source=d.get("source", "derived"),
            **{name: frozenset(d[name]) for name in PARTITIONS},
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "CorpusSplit":
        return cls.from_json(json.loads(Path(path).read_text()))


def _target_sizes(n: int) -> tuple[int, ...]:
    if n in RELEASE_SIZES:
        return RELEASE_SIZES[n]
    floors = [int(n * f) for f in FRACTIONS]
    remainders = [n * f - fl for f, fl in zip(FRACTIONS, floors)]
    leftover = n - sum(floors)
    # hand the leftover to the largest remainders; ties go in partition order
    order = sorted(range(4), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        floors[i] += 1
    return tuple(floors)


def _hash_key(seed: int, scene_id: str) -> str:
    return hashlib.sha256(f"{seed}:{scene_id}".encode()).hexdigest()


def split_crosstalk(
    scene_ids: Iterable[str],
    labels: Mapping[str, str] | None = None,
    respect_official: bool = True,
    seed: int = 0,
) -> CorpusSplit:
    """Partition scene ids into the four crosstalk sets.

    ``labels`` (scene id -> partition name), when present and
    ``respect_official`` is set, wins over derivation.
    """
    ids = sorted(set(scene_ids))
    if not ids:
        raise SplitError("no scene ids to split")

    if labels is not None and respect_official:
        sets: dict[str, set[str]] = {name: set() for name in PARTITIONS}
        for sid in ids:
            part = labels.get(sid)
            if part not in PARTITIONS:
                raise SplitError(f"scene {sid}: unknown partition label {part!r}")
            sets[part].add(sid)
        split = CorpusSplit(
            source="labels", **{k: frozenset(v) for k, v in sets.items()}
        )
        split.validate()
        return split

    ordered = sorted(ids, key=lambda sid: (_hash_key(seed, sid), sid))
    sizes = _target_sizes(len(ordered))
    cuts = []
    start = 0
    for size in sizes:
        cuts.append(frozenset(ordered[start : start + size]))
        start += size
    split = CorpusSplit(*cuts, source=f"seed:{seed}")
    split.validate()
    return split
