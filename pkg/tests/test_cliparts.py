import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from telldraw.cliparts import (
    ActionError,
    DrawerAction,
    Flip,
    HUMAN_TYPE_IDS,
    LIBRARY,
    N_TYPES,
    Piece,
    Scene,
    SceneError,
    Size,
    apply_action,
    inverse_action,
    validate_scene,
)

from .conftest import random_piece, random_scene, scene_st

SUN = next(t.id for t in LIBRARY if t.name == "sun")
TREE = next(t.id for t in LIBRARY if t.name == "oak tree")
BOY = 0


def piece(type_id, x=0.5, y=0.5, **kw):
    if type_id in HUMAN_TYPE_IDS:
        kw.setdefault("pose", 0)
        kw.setdefault("expression", 0)
    return Piece(type_id=type_id, flip=Flip.FACE_LEFT, size=Size.NORMAL, x=x, y=y, **kw)


class TestLibrary:
    def test_58_types_with_two_humans(self):
        assert len(LIBRARY) == N_TYPES == 58
        assert sorted(HUMAN_TYPE_IDS) == [0, 1]
        assert {t.id for t in LIBRARY} == set(range(58))

    def test_names_unique(self):
        assert len({t.name for t in LIBRARY}) == 58


class TestPiece:
    def test_rejects_bad_type(self):
        with pytest.raises(ValueError):
            Piece(type_id=58, flip=Flip.FACE_LEFT, size=Size.SMALL, x=0, y=0)

    def test_rejects_nonfinite_coords(self):
        with pytest.raises(ValueError):
            piece(SUN, x=float("nan"))

    def test_rejects_out_of_range_pose(self):
        with pytest.raises(ValueError):
            piece(BOY, pose=7)

    def test_json_round_trip(self):
        p = piece(BOY, x=0.125, y=0.875, pose=3, expression=4)
        assert Piece.from_json(p.to_json()) == p


class TestScene:
    def test_duplicate_type_is_hard_error(self):
        with pytest.raises(SceneError):
            Scene([piece(SUN), piece(SUN, x=0.9)])

    def test_pieces_sorted_by_type(self):
        s = Scene([piece(TREE), piece(SUN)])
        assert [p.type_id for p in s.pieces] == sorted([SUN, TREE])

    def test_json_round_trip(self, rng):
        s = random_scene(rng, max_pieces=10, in_canvas=False)
        assert Scene.from_json(s.to_json()) == s


class TestValidateScene:
    def test_empty_scene_clean(self):
        assert validate_scene(Scene()) == []

    def test_in_bounds_scene_clean(self):
        assert validate_scene(Scene([piece(SUN, x=0.5, y=0.1)])) == []

    def test_off_canvas_warned(self):
        warnings = validate_scene(Scene([piece(TREE, x=1.3, y=0.5)]))
        assert len(warnings) == 1 and "off canvas" in warnings[0]

    def test_human_missing_pose_warned(self):
        bare = Piece(type_id=BOY, flip=Flip.FACE_LEFT, size=Size.NORMAL, x=0.5, y=0.5)
        warnings = validate_scene(Scene([bare]))
        assert any("pose" in w for w in warnings)
        assert any("expression" in w for w in warnings)


class TestApplyAction:
    def test_add_to_empty(self):
        after = apply_action(Scene(), DrawerAction(adds=(piece(SUN),)))
        assert after.ids() == {SUN}

    def test_remove_only_piece(self):
        after = apply_action(Scene([piece(SUN)]), DrawerAction(removes=(SUN,)))
        assert len(after) == 0

    def test_duplicate_add_rejected_with_type(self):
        with pytest.raises(ActionError) as exc:
            apply_action(Scene([piece(SUN)]), DrawerAction(adds=(piece(SUN),)))
        assert exc.value.type_id == SUN

    def test_missing_remove_rejected(self):
        with pytest.raises(ActionError):
            apply_action(Scene(), DrawerAction(removes=(SUN,)))

    def test_edit_replaces_attributes(self):
        after = apply_action(
            Scene([piece(SUN, x=0.2)]), DrawerAction(edits=(piece(SUN, x=0.9),))
        )
        assert after[SUN].x == 0.9

    def test_input_scene_unmodified(self):
        before = Scene([piece(SUN)])
        apply_action(before, DrawerAction(removes=(SUN,)))
        assert before.ids() == {SUN}

    def test_remove_then_readd_same_type_legal(self):
        before = Scene([piece(SUN, x=0.2)])
        action = DrawerAction(removes=(SUN,), adds=(piece(SUN, x=0.7),))
        assert apply_action(before, action)[SUN].x == 0.7


@settings(max_examples=200)
@given(scene=scene_st(max_size=8), data=st.data())
def test_action_round_trip(scene, data):
    # apply then apply the inverse restores the original scene exactly
    present = sorted(scene.ids())
    absent = sorted(set(range(N_TYPES)) - scene.ids())
    rng = random.Random(data.draw(st.integers(0, 2**32)))
    action = DrawerAction(
        adds=tuple(random_piece(rng, t) for t in rng.sample(absent, rng.randint(0, 2))),
        removes=tuple(rng.sample(present, rng.randint(0, len(present)))),
    )
    after = apply_action(scene, action)
    assert apply_action(after, inverse_action(scene, action)) == scene
