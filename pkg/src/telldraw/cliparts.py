"""Clip-art pieces, scenes, and canvas edits.

The clip-art library is a fixed table of 58 types (two human characters plus
56 objects) shipped as versioned data in ``data/cliparts.json``. A scene holds
at most one piece per type. Every operation here has value semantics: pieces,
scenes, and actions are immutable, and edits produce new scenes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import IntEnum
from importlib import resources
from typing import Iterable, Iterator, Mapping

N_TYPES = 58
N_POSES = 7
N_EXPRESSIONS = 5


class SceneError(Exception):
    """A scene or action violates the one-piece-per-type model."""


class ActionError(SceneError):
    """An action referenced a type it may not touch."""

    def __init__(self, reason: str, type_id: int):
        super().__init__(f"{reason}: type {type_id}")
        self.reason = reason
        self.type_id = type_id


class Flip(IntEnum):
    FACE_LEFT = 0
    FACE_RIGHT = 1


class Size(IntEnum):
    SMALL = 0
    NORMAL = 1
    LARGE = 2


FLIP_NAMES = {Flip.FACE_LEFT: "left", Flip.FACE_RIGHT: "right"}
SIZE_NAMES = {Size.SMALL: "small", Size.NORMAL: "normal", Size.LARGE: "large"}
FLIP_BY_NAME = {v: k for k, v in FLIP_NAMES.items()}
SIZE_BY_NAME = {v: k for k, v in SIZE_NAMES.items()}


@dataclass(frozen=True, slots=True)
class ClipArtType:
    """One row of the library table."""

    id: int
    name: str
    category: str
    is_human: bool
    asset: str


def _load_library() -> tuple[ClipArtType, ...]:
    raw = json.loads(
        resources.files("telldraw.data").joinpath("cliparts.json").read_text()
    )
    types = tuple(ClipArtType(**row) for row in raw["types"])
    if len(types) != N_TYPES or [t.id for t in types] != list(range(N_TYPES)):
        raise RuntimeError("clip art library table is corrupt")
    return types


LIBRARY: tuple[ClipArtType, ...] = _load_library()
HUMAN_TYPE_IDS: frozenset[int] = frozenset(t.id for t in LIBRARY if t.is_human)
TYPE_BY_NAME: Mapping[str, ClipArtType] = {t.name: t for t in LIBRARY}


def is_human(type_id: int) -> bool:
    return type_id in HUMAN_TYPE_IDS


@dataclass(frozen=True, slots=True)
class Piece:
    """A placed clip-art piece.

    ``x`` and ``y`` are canvas fractions; values outside [0, 1] are legal
    (a piece may hang off the canvas) but flagged by :func:`validate_scene`.
    ``pose`` and ``expression`` only carry meaning for the human types; they
    may be absent on imported data, which :func:`validate_scene` reports
    rather than rejecting.
    """

    type_id: int
    flip: Flip
    size: Size
    x: float
    y: float
    pose: int | None = None
    expression: int | None = None

    def __post_init__(self):
        if not 0 <= self.type_id < N_TYPES:
            raise ValueError(f"type id {self.type_id} outside library")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("piece coordinates must be finite")
        if self.pose is not None and not 0 <= self.pose < N_POSES:
            raise ValueError(f"pose {self.pose} outside [0, {N_POSES - 1}]")
        if self.expression is not None and not 0 <= self.expression < N_EXPRESSIONS:
            raise ValueError(
                f"expression {self.expression} outside [0, {N_EXPRESSIONS - 1}]"
            )

    @property
    def is_human(self) -> bool:
        return self.type_id in HUMAN_TYPE_IDS

    def moved(self, x: float, y: float) -> "Piece":
        return replace(self, x=x, y=y)

    def to_json(self) -> dict:
        # x/y stay full precision: stored transcripts must replay bit-exactly
        out: dict = {
            "id": self.type_id,
            "flip": FLIP_NAMES[self.flip],
            "size": SIZE_NAMES[self.size],
            "x": self.x,
            "y": self.y,
        }
        if self.pose is not None:
            out["pose"] = self.pose
        if self.expression is not None:
            out["expr"] = self.expression
        return out

    @classmethod
    def from_json(cls, d: Mapping) -> "Piece":
        return cls(
            type_id=d["id"],
            flip=FLIP_BY_NAME[d["flip"]],
            size=SIZE_BY_NAME[d["size"]],
            x=float(d["x"]),
            y=float(d["y"]),
            pose=d.get("pose"),
            expression=d.get("expr"),
        )


class Scene:
    """An immutable set of pieces, at most one per clip-art type."""

    __slots__ = ("_by_id",)

    def __init__(self, pieces: Iterable[Piece] = ()):
        by_id: dict[int, Piece] = {}
        for p in pieces:
            if p.type_id in by_id:
                raise SceneError(f"two pieces share type {p.type_id}")
            by_id[p.type_id] = p
        object.__setattr__(self, "_by_id", dict(sorted(by_id.items())))

    def ids(self) -> frozenset[int]:
        return frozenset(self._by_id)

    @property
    def pieces(self) -> tuple[Piece, ...]:
        """Pieces in type-id order."""
        return tuple(self._by_id.values())

    def __contains__(self, type_id: int) -> bool:
        return type_id in self._by_id

    def __getitem__(self, type_id: int) -> Piece:
        return self._by_id[type_id]

    def get(self, type_id: int) -> Piece | None:
        return self._by_id.get(type_id)

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self) -> Iterator[Piece]:
        return iter(self._by_id.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, Scene) and self._by_id == other._by_id

    def __hash__(self) -> int:
        return hash(self.pieces)

    def __repr__(self) -> str:
        names = ", ".join(LIBRARY[i].name for i in self._by_id)
        return f"Scene({len(self)} pieces: {names})"

    def to_json(self) -> list[dict]:
        return [p.to_json() for p in self.pieces]

    @classmethod
    def from_json(cls, rows: Iterable[Mapping]) -> "Scene":
        return cls(Piece.from_json(r) for r in rows)


EMPTY_SCENE = Scene()


@dataclass(frozen=True, slots=True)
class DrawerAction:
    """One turn's worth of canvas edits: removals, attribute edits, additions.

    ``edits`` carry full replacement pieces for types already on the canvas.
    Application order is removes, then edits, then adds.
    """

    adds: tuple[Piece, ...] = ()
    removes: tuple[int, ...] = ()
    edits: tuple[Piece, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not (self.adds or self.removes or self.edits)

    def to_json(self) -> dict:
        out: dict = {}
        if self.adds:
            out["add"] = [p.to_json() for p in self.adds]
        if self.removes:
            out["remove"] = list(self.removes)
        if self.edits:
            out["edit"] = [p.to_json() for p in self.edits]
        return out

    @classmethod
    def from_json(cls, d: Mapping) -> "DrawerAction":
        return cls(
            adds=tuple(Piece.from_json(r) for r in d.get("add", ())),
            removes=tuple(d.get("remove", ())),
            edits=tuple(Piece.from_json(r) for r in d.get("edit", ())),
        )


def validate_scene(scene: Scene) -> list[str]:
    """Return warnings for a structurally valid but suspicious scene.

    Duplicated types are impossible by construction (Scene raises), so this
    only reports soft problems: off-canvas coordinates and human pieces with
    missing pose or expression (or object pieces carrying them).
    """
    warnings = []
    for p in scene:
        name = LIBRARY[p.type_id].name
        if not 0.0 <= p.x <= 1.0:
            warnings.append(f"{name}: x={p.x:g} off canvas")
        if not 0.0 <= p.y <= 1.0:
            warnings.append(f"{name}: y={p.y:g} off canvas")
        if p.is_human:
            if p.pose is None:
                warnings.append(f"{name}: human piece missing pose")
            if p.expression is None:
                warnings.append(f"{name}: human piece missing expression")
        elif p.pose is not None or p.expression is not None:
            warnings.append(f"{name}: object piece carries pose/expression")
    return warnings


def apply_action(scene: Scene, action: DrawerAction) -> Scene:
    """Apply removes, then edits, then adds; returns a new scene.

    Raises :class:`ActionError` for a removal or edit of an absent type and
    for an addition of a type already present.
    """
    by_id = dict(scene._by_id)
    for type_id in action.removes:
        if type_id not in by_id:
            raise ActionError("remove of absent type", type_id)
        del by_id[type_id]
    for piece in action.edits:
        if piece.type_id not in by_id:
            raise ActionError("edit of absent type", piece.type_id)
        by_id[piece.type_id] = piece
    for piece in action.adds:
        if piece.type_id in by_id:
            raise ActionError("duplicate add", piece.type_id)
        by_id[piece.type_id] = piece
    return Scene(by_id.values())


def inverse_action(scene: Scene, action: DrawerAction) -> DrawerAction:
    """The action that undoes ``action`` when applied to ``apply_action``'s result."""
    return DrawerAction(
        adds=tuple(scene[t] for t in action.removes),
        removes=tuple(p.type_id for p in action.adds),
        edits=tuple(scene[p.type_id] for p in action.edits),
    )
