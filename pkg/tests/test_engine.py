import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from telldraw.cliparts import DrawerAction, Scene
from telldraw.engine import (
    EngineError,
    GameConfig,
    GameState,
    finish,
    new_session,
    peek,
    replay,
    similarity_curve,
    submit_action,
    submit_message,
)
from telldraw.metric import similarity_score

from .conftest import random_piece, random_scene


@pytest.fixture
def target(rng):
    return random_scene(rng, max_pieces=6, min_pieces=3)


@pytest.fixture
def session(target):
    return new_session(target, scene_id="t1")


def drawer_turn(state, action=None, reply="ok"):
    if action is not None:
        state = submit_action(state, action)
    return submit_message(state, "drawer", reply)


class TestNewSession:
    def test_starts_empty_with_teller_to_move(self, session):
        assert len(session.canvas) == 0
        assert session.turn == "teller"
        assert not session.peek_used and not session.finished

    def test_empty_target_rejected(self):
        with pytest.raises(EngineError) as exc:
            new_session(Scene())
        assert exc.value.code == "empty-target"

    def test_bad_config_rejected(self):
        with pytest.raises(ValueError):
            GameConfig(max_message_chars=0)


class TestMessages:
    def test_cap_boundary(self, session):
        submit_message(session, "teller", "x" * 140)  # exactly at the cap

    def test_over_cap_rejected(self, session):
        with pytest.raises(EngineError) as exc:
            submit_message(session, "teller", "x" * 141)
        assert exc.value.code == "over-length"

    def test_wrong_turn(self, session):
        with pytest.raises(EngineError) as exc:
            submit_message(session, "drawer", "ok")
        assert exc.value.code == "wrong-turn"

    def test_teller_cannot_send_twice(self, session):
        state = submit_message(session, "teller", "first")
        with pytest.raises(EngineError) as exc:
            submit_message(state, "teller", "second")
        assert exc.value.code == "wrong-turn"

    def test_alternation_produces_rounds(self, session, target):
        state = session
        for i, piece in enumerate(target.pieces):
            state = submit_message(state, "teller", f"add piece {i}")
            state = drawer_turn(state, DrawerAction(adds=(piece,)))
        assert len(state.rounds) == len(target)
        assert state.canvas == target

    def test_custom_cap(self, target):
        state = new_session(target, GameConfig(max_message_chars=5))
        with pytest.raises(EngineError):
            submit_message(state, "teller", "toolong")


class TestActions:
    def test_action_applies_immediately(self, session, target):
        p = target.pieces[0]
        state = submit_message(session, "teller", "go")
        state = submit_action(state, DrawerAction(adds=(p,)))
        assert p.type_id in state.canvas

    def test_one_action_per_round(self, session, target):
        a, b = target.pieces[:2]
        state = submit_message(session, "teller", "go")
        state = submit_action(state, DrawerAction(adds=(a,)))
        with pytest.raises(EngineError) as exc:
            submit_action(state, DrawerAction(adds=(b,)))
        assert exc.value.code == "action-already-staged"

    def test_action_on_teller_turn_rejected(self, session, target):
        with pytest.raises(EngineError) as exc:
            submit_action(session, DrawerAction(adds=(target.pieces[0],)))
        assert exc.value.code == "wrong-turn"

    def test_empty_action_with_ok_is_legal(self, session):
        state = submit_message(session, "teller", "there is a sun")
        state = drawer_turn(state, DrawerAction())
        assert len(state.rounds) == 1
        assert state.rounds[0].drawer_text == "ok"
        assert len(state.canvas) == 0

    def test_bad_remove_surfaces_engine_error(self, session):
        state = submit_message(session, "teller", "remove the sun")
        with pytest.raises(EngineError) as exc:
            submit_action(state, DrawerAction(removes=(2,)))
        assert exc.value.code == "invalid-action"

    def test_edit_canonicalized_to_remove_add(self, session, target):
        p = target.pieces[0]
        state = submit_message(session, "teller", "add")
        state = drawer_turn(state, DrawerAction(adds=(p,)))
        moved = p.moved(0.9, 0.9)
        state = submit_message(state, "teller", "move it")
        state = drawer_turn(state, DrawerAction(edits=(moved,)))
        sealed = state.rounds[-1]
        assert sealed.removed == (p.type_id,)
        assert sealed.added == (moved,)
        assert state.canvas[p.type_id] == moved


class TestPeek:
    def test_first_peek_returns_canvas(self, session, target):
        p = target.pieces[0]
        state = submit_message(session, "teller", "go")
        state = drawer_turn(state, DrawerAction(adds=(p,)))
        state, snapshot = peek(state)
        assert snapshot == state.canvas
        assert state.peek_used

    def test_second_peek_rejected(self, session):
        state, _ = peek(session)
        with pytest.raises(EngineError) as exc:
            peek(state)
        assert exc.value.code == "peek-exhausted"

    def test_drawer_peek_rejected(self, session):
        with pytest.raises(EngineError) as exc:
            peek(session, role="drawer")
        assert exc.value.code == "peek-wrong-role"

    def test_peek_after_finish_rejected(self, session):
        state, _ = finish(session)
        with pytest.raises(EngineError) as exc:
            peek(state)
        assert exc.value.code == "session-finished"

    def test_peek_flag_recorded_on_next_round(self, session):
        state, _ = peek(session)
        state = submit_message(state, "teller", "after peek")
        state = drawer_turn(state)
        assert state.rounds[0].peek_flag is True


class TestFinish:
    def test_transcript_has_all_rounds(self, session, target):
        state = session
        for i, p in enumerate(target.pieces):
            state = submit_message(state, "teller", f"piece {i}")
            state = drawer_turn(state, DrawerAction(adds=(p,)))
        state, transcript = finish(state)
        assert len(transcript.rounds) == len(target)
        assert transcript.final_similarity == pytest.approx(5.0, abs=1e-9)

    def test_double_finish_rejected(self, session):
        state, _ = finish(session)
        with pytest.raises(EngineError) as exc:
            finish(state)
        assert exc.value.code == "double-finish"

    def test_finish_at_round_zero_scores_zero(self, session):
        _, transcript = finish(session)
        assert transcript.rounds == ()
        assert transcript.final_similarity == 0.0

    def test_no_events_after_finish(self, session):
        state, _ = finish(session)
        with pytest.raises(EngineError) as exc:
            submit_message(state, "teller", "hello?")
        assert exc.value.code == "session-finished"

    def test_unanswered_teller_message_sealed(self, session):
        state = submit_message(session, "teller", "last words")
        state, transcript = finish(state)
        assert transcript.rounds[-1].teller_text == "last words"
        assert transcript.rounds[-1].drawer_text is None

    def test_similarity_matches_metric(self, session, target):
        p = target.pieces[0]
        state = submit_message(session, "teller", "one piece")
        state = drawer_turn(state, DrawerAction(adds=(p,)))
        _, transcript = finish(state)
        assert transcript.final_similarity == similarity_score(target, Scene([p]))


class TestLimits:
    def test_max_rounds_cap(self, target):
        state = new_session(target, GameConfig(max_rounds=2))
        for i in range(2):
            state = submit_message(state, "teller", f"round {i}")
            state = drawer_turn(state)
        with pytest.raises(EngineError) as exc:
            submit_message(state, "teller", "one too many")
        assert exc.value.code == "max-rounds"

    def test_time_limit_when_configured(self, target):
        state = new_session(target, GameConfig(time_limit_seconds=60), now=1000.0)
        submit_message(state, "teller", "in time", now=1030.0)
        with pytest.raises(EngineError) as exc:
            submit_message(state, "teller", "too late", now=1091.0)
        assert exc.value.code == "time-limit"

    def test_no_time_limit_by_default(self, target):
        state = new_session(target, now=0.0)
        submit_message(state, "teller", "whenever", now=10**9)


class TestReplay:
    def test_live_session_replays_bit_exact(self, rng, target):
        state = new_session(target, scene_id="replay-me")
        for i, p in enumerate(target.pieces):
            state = submit_message(state, "teller", f"piece {i}")
            action = DrawerAction(adds=(p,))
            if i == 1:
                # also move the first piece with an edit this round
                action = DrawerAction(
                    adds=(p,), edits=(target.pieces[0].moved(0.42, 0.17),)
                )
            state = drawer_turn(state, action)
        state, transcript = finish(state)
        result = replay(transcript)
        assert result.clean
        assert result.canvases[-1] == state.canvas
        assert result.canvases[0] == Scene()

    def test_empty_transcript_single_empty_canvas(self, session):
        _, transcript = finish(session)
        result = replay(transcript)
        assert result.canvases == (Scene(),)

    def test_curve_starts_at_zero(self, session, target):
        state = session
        for i, p in enumerate(target.pieces):
            state = submit_message(state, "teller", f"piece {i}")
            state = drawer_turn(state, DrawerAction(adds=(p,)))
        _, transcript = finish(state)
        curve = similarity_curve(transcript)
        assert curve[0] == 0.0
        assert curve[-1] == pytest.approx(5.0, abs=1e-9)
        assert len(curve) == len(transcript.rounds) + 1


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n_events=st.integers(1, 40))
def test_message_count_invariant(seed, n_events):
    # at every reachable state, teller sent either as many or one more
    # message than the drawer, and only the side whose turn it is may move
    rng = random.Random(seed)
    target = random_scene(rng, max_pieces=5, min_pieces=1)
    state = new_session(target)
    teller_sent = drawer_sent = 0
    for _ in range(n_events):
        if state.turn == "teller":
            state = submit_message(state, "teller", "describe")
            teller_sent += 1
        else:
            if rng.random() < 0.5:
                absent = sorted(set(range(58)) - state.canvas.ids())
                if absent:
                    state = submit_action(
                        state,
                        DrawerAction(adds=(random_piece(rng, rng.choice(absent)),)),
                    )
            state = submit_message(state, "drawer", "ok")
            drawer_sent += 1
        assert teller_sent - drawer_sent in (0, 1)
        off_turn = "drawer" if state.turn == "teller" else "teller"
        with pytest.raises(EngineError):
            submit_message(state, off_turn, "out of turn")
