"""Canvas feature encoding: one 44-wide slot per clip-art type.

A slot for a present piece is ``[1, f(piece), x, y]`` where ``f`` is a 41-bit
indicator vector; absent types are all zero. The 41-bit breakdown is flip
one-hot (2) + size one-hot (3) + human flag (1) + joint pose-by-expression
one-hot (35, zero for objects). That breakdown is carried as versioned data
in ``data/feature_layout.json`` so it can be swapped without touching callers
that only rely on the slot width.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .cliparts import N_EXPRESSIONS, N_TYPES, Piece, Scene


def _load_layout() -> dict:
    raw = json.loads(
        resources.files("telldraw.data").joinpath("feature_layout.json").read_text()
    )
    offsets = {}
    pos = 0
    for block in raw["blocks"]:
        offsets[block["name"]] = (pos, pos + block["width"])
        pos += block["width"]
    raw["offsets"] = offsets
    raw["slot_width"] = pos
    return raw


LAYOUT = _load_layout()
SLOT_WIDTH: int = LAYOUT["slot_width"]
BINARY_WIDTH: int = SLOT_WIDTH - 3  # minus presence, x, y
CANVAS_VECTOR_SIZE: int = N_TYPES * SLOT_WIDTH

_expected = {
    "presence": (0, 1),
    "flip": (1, 3),
    "size": (3, 6),
    "is_human": (6, 7),
    "pose_expression": (7, 42),
    "x": (42, 43),
    "y": (43, 44),
}
if LAYOUT["offsets"] != _expected:  # encoder below implements exactly this layout
    raise RuntimeError("feature_layout.json does not match the built-in encoder")


def piece_slot(piece: Piece) -> np.ndarray:
    """Encode one piece into its 44-entry slot."""
    slot = np.zeros(SLOT_WIDTH)
    slot[0] = 1.0
    slot[1 + int(piece.flip)] = 1.0
    slot[3 + int(piece.size)] = 1.0
    if piece.is_human:
        slot[6] = 1.0
        if piece.pose is not None and piece.expression is not None:
            slot[7 + piece.pose * N_EXPRESSIONS + piece.expression] = 1.0
    slot[42] = piece.x
    slot[43] = piece.y
    return slot


def canvas_vector(scene: Scene) -> np.ndarray:
    """Concatenated slots for all 58 types; absent types stay zero."""
    vec = np.zeros(CANVAS_VECTOR_SIZE)
    for piece in scene:
        start = piece.type_id * SLOT_WIDTH
        vec[start : start + SLOT_WIDTH] = piece_slot(piece)
    return vec


def present_slots(vec: np.ndarray) -> list[int]:
    """Type ids whose presence bit is set in an encoded canvas vector."""
    mat = vec.reshape(N_TYPES, SLOT_WIDTH)
    return [int(i) for i in np.flatnonzero(mat[:, 0] > 0.5)]


__all__ = [
    "BINARY_WIDTH",
    "CANVAS_VECTOR_SIZE",
    "LAYOUT",
    "SLOT_WIDTH",
    "canvas_vector",
    "piece_slot",
    "present_slots",
]
