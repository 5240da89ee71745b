import numpy as np
from hypothesis import given, settings

from telldraw.cliparts import Flip, LIBRARY, Piece, Scene, Size
from telldraw.features import (
    BINARY_WIDTH,
    CANVAS_VECTOR_SIZE,
    SLOT_WIDTH,
    canvas_vector,
    piece_slot,
    present_slots,
)

from .conftest import scene_st

SUN = next(t.id for t in LIBRARY if t.name == "sun")


def hand_encode(piece):
    """Independent encoder written from the documented layout table."""
    flip = [0.0, 0.0]
    flip[int(piece.flip)] = 1.0
    size = [0.0, 0.0, 0.0]
    size[int(piece.size)] = 1.0
    human = 1.0 if piece.type_id in (0, 1) else 0.0
    joint = [0.0] * 35
    if human and piece.pose is not None and piece.expression is not None:
        joint[piece.pose * 5 + piece.expression] = 1.0
    return [1.0] + flip + size + [human] + joint + [piece.x, piece.y]


def test_widths():
    assert SLOT_WIDTH == 44
    assert BINARY_WIDTH == 41
    assert CANVAS_VECTOR_SIZE == 58 * 44 == 2552


def test_empty_scene_is_zero():
    assert not canvas_vector(Scene()).any()


def test_single_piece_single_slot():
    sun = Piece(type_id=SUN, flip=Flip.FACE_LEFT, size=Size.SMALL, x=0.25, y=0.10)
    vec = canvas_vector(Scene([sun]))
    mat = vec.reshape(58, 44)
    assert np.flatnonzero(mat[:, 0]).tolist() == [SUN]
    assert (mat[[i for i in range(58) if i != SUN]] == 0).all()
    assert mat[SUN, 0] == 1.0


def test_sun_small_face_left_layout():
    sun = Piece(type_id=SUN, flip=Flip.FACE_LEFT, size=Size.SMALL, x=0.25, y=0.10)
    slot = piece_slot(sun)
    assert slot.tolist() == hand_encode(sun)
    assert slot[1:3].tolist() == [1.0, 0.0]          # flip one-hot
    assert slot[3:6].tolist() == [1.0, 0.0, 0.0]     # size one-hot
    assert slot[6] == 0.0                            # not human
    assert not slot[7:42].any()                      # joint pose block empty
    assert (slot[42], slot[43]) == (0.25, 0.10)


def test_human_joint_block():
    boy = Piece(type_id=0, flip=Flip.FACE_RIGHT, size=Size.LARGE, x=0.5, y=0.5,
                pose=3, expression=2)
    slot = piece_slot(boy)
    assert slot.tolist() == hand_encode(boy)
    assert slot[6] == 1.0
    assert np.flatnonzero(slot[7:42]).tolist() == [3 * 5 + 2]


@settings(max_examples=150)
@given(scene=scene_st(max_size=8))
def test_nonzero_slots_match_scene(scene):
    vec = canvas_vector(scene)
    assert present_slots(vec) == sorted(scene.ids())
    for p in scene:
        start = p.type_id * 44
        assert vec[start : start + 44].tolist() == hand_encode(p)


@settings(max_examples=60)
@given(a=scene_st(max_size=5), b=scene_st(max_size=5))
def test_injective_on_distinct_scenes(a, b):
    if a != b:
        assert not np.array_equal(canvas_vector(a), canvas_vector(b))
