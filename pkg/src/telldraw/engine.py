"""Turn-based game state machine and transcript replay.

Rules enforced here, nowhere else:

* strict alternation - each side sends one message then waits; the teller
  opens every round and the drawer's reply closes it
* message length cap, counted over raw characters (default 140)
* the teller gets exactly one peek at the canvas for the whole session
* nothing moves after finish

State is immutable; every operation returns a new :class:`GameState`. One
live session is therefore a single-writer fold over events, and distinct
sessions share nothing. A peek is an atomic snapshot: events within a
session are serialized, so the canvas cannot change while a peek is being
taken, which settles the freeze-during-peek question by construction.

The drawer's canvas edits for a round are staged with :func:`submit_action`
(at most one action per turn, applied to the canvas immediately so a peek
shows work in progress) and sealed into the round when the drawer replies.
Attribute edits are canonicalized to remove+add of the same type in the
sealed record, so transcripts stay in the corpus schema and replay exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Iterable

from .cliparts import DrawerAction, Scene, SceneError, apply_action
from .metric import SimilarityWeights, DEFAULT_WEIGHTS, similarity_score
from .transcript import DialogTranscript, DRAWER, RoundRecord, TELLER


class EngineError(Exception):
    """A rejected game event; ``code`` is machine-readable."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class GameConfig:
    max_message_chars: int = 140
    max_rounds: int = 50
    time_limit_seconds: float | None = None

    def __post_init__(self):
        if self.max_message_chars < 1:
            raise ValueError("max_message_chars must be >= 1")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


@dataclass(frozen=True)
class GameState:
    target: Scene
    canvas: Scene
    turn: str
    rounds: tuple[RoundRecord, ...]
    config: GameConfig
    scene_id: str = "live"
    open_teller_text: str | None = None
    open_action_removed: tuple = ()
    open_action_added: tuple = ()
    open_action_staged: bool = False
    pending_peek: bool = False
    peek_used: bool = False
    finished: bool = False
    started_at: float | None = None

    @property
    def round_count(self) -> int:
        return len(self.rounds) + (1 if self.open_teller_text is not None else 0)


def new_session(
    target: Scene,
    config: GameConfig = GameConfig(),
    scene_id: str = "live",
    now: float | None = None,
) -> GameState:
    """Fresh session: empty canvas, teller to move, peek unused."""
    if len(target) == 0:
        raise EngineError("empty-target", "target scene has no pieces")
    return GameState(
        target=target,
        canvas=Scene(),
        turn=TELLER,
        rounds=(),
        config=config,
        scene_id=scene_id,
        started_at=now,
    )


def _check_live(state: GameState, now: float | None) -> None:
    if state.finished:
        raise EngineError("session-finished", "session is already finished")
    limit = state.config.time_limit_seconds
    if limit is not None and state.started_at is not None:
        elapsed = (now if now is not None else time.time()) - state.started_at
        if elapsed > limit:
            raise EngineError("time-limit", f"session time limit {limit}s exceeded")


def submit_message(
    state: GameState, role: str, text: str, now: float | None = None
) -> GameState:
    _check_live(state, now)
    if role not in (TELLER, DRAWER):
        raise EngineError("unknown-role", f"no such role {role!r}")
    if role != state.turn:
        raise EngineError("wrong-turn", f"it is the {state.turn}'s turn")
    if len(text) > state.config.max_message_chars:
        raise EngineError(
            "over-length",
            f"message of {len(text)} chars exceeds cap "
            f"{state.config.max_message_chars}",
        )

    if role == TELLER:
        if len(state.rounds) >= state.config.max_rounds:
            raise EngineError(
                "max-rounds", f"round cap {state.config.max_rounds} reached"
            )
        return replace(state, open_teller_text=text, turn=DRAWER)

    # drawer reply seals the open round
    round_record = RoundRecord(
        index=len(state.rounds),
        teller_text=state.open_teller_text,
        teller_tokens=tuple(state.open_teller_text.split(" ")),
        drawer_text=text,
        drawer_tokens=tuple(text.split(" ")),
        removed=state.open_action_removed,
        added=state.open_action_added,
        canvas_after=state.canvas,
        peek_flag=state.pending_peek,
    )
    return replace(
        state,
        rounds=state.rounds + (round_record,),
        turn=TELLER,
        open_teller_text=None,
        open_action_removed=(),
        open_action_added=(),
        open_action_staged=False,
        pending_peek=False,
    )


def submit_action(
    state: GameState, action: DrawerAction, now: float | None = None
) -> GameState:
    """Stage the drawer's canvas edits for the open round."""
    _check_live(state, now)
    if state.turn != DRAWER:
        raise EngineError("wrong-turn", "drawer can only act on their own turn")
    if state.open_action_staged:
        raise EngineError(
            "action-already-staged", "one action per round; edits must be batched"
        )
    try:
        canvas = apply_action(state.canvas, action)
    except SceneError as exc:
        raise EngineError("invalid-action", str(exc)) from exc
    # canonical corpus-schema form: an edit is a remove plus an add
    removed = action.removes + tuple(p.type_id for p in action.edits)
    added = action.edits + action.adds
    return replace(
        state,
        canvas=canvas,
        open_action_removed=removed,
        open_action_added=added,
        open_action_staged=True,
    )


def peek(state: GameState, role: str = TELLER, now: float | None = None):
    """The teller's one look at the canvas. Returns (state, snapshot)."""
    _check_live(state, now)
    if role != TELLER:
        raise EngineError("peek-wrong-role", "only the teller may peek")
    if state.peek_used:
        raise EngineError("peek-exhausted", "the single peek was already used")
    return replace(state, peek_used=True, pending_peek=True), state.canvas


def finish(
    state: GameState,
    role: str = TELLER,
    weights: SimilarityWeights = DEFAULT_WEIGHTS,
    duration_seconds: float | None = None,
) -> tuple[GameState, DialogTranscript]:
    """Seal the transcript and score the final canvas against the target."""
    if state.finished:
        raise EngineError("double-finish", "session is already finished")
    if role not in (TELLER, DRAWER):
        raise EngineError("unknown-role", f"no such role {role!r}")
    rounds = state.rounds
    if state.open_teller_text is not None:
        # dialog ends on an unanswered teller message; keep what happened
        rounds = rounds + (
            RoundRecord(
                index=len(rounds),
                teller_text=state.open_teller_text,
                teller_tokens=tuple(state.open_teller_text.split(" ")),
                drawer_text=None,
                drawer_tokens=None,
                removed=state.open_action_removed,
                added=state.open_action_added,
                canvas_after=state.canvas,
                peek_flag=state.pending_peek,
            ),
        )
    transcript = DialogTranscript(
        scene_id=state.scene_id,
        target=state.target,
        rounds=rounds,
        duration_seconds=duration_seconds,
        final_similarity=similarity_score(state.target, state.canvas, weights),
    )
    return replace(state, rounds=rounds, finished=True), transcript


@dataclass(frozen=True)
class ReplayResult:
    """Canvases reconstructed by folding recorded edits round by round.

    ``canvases[0]`` is the empty starting canvas and ``canvases[k]`` the
    state after round k. ``mismatches`` lists rounds whose recorded snapshot
    differs from the reconstruction.
    """

    canvases: tuple[Scene, ...]
    mismatches: tuple[tuple[int, str], ...] = field(default=())

    @property
    def clean(self) -> bool:
        return not self.mismatches


def replay(transcript: DialogTranscript) -> ReplayResult:
    """Deterministic reconstruction; the one code path every evaluation uses."""
    canvas = Scene()
    canvases = [canvas]
    mismatches = []
    for r in transcript.rounds:
        try:
            canvas = apply_action(
                canvas, DrawerAction(adds=r.added, removes=r.removed)
            )
        except SceneError as exc:
            raise CorpusReplayError(
                f"{transcript.scene_id} round {r.index}: {exc}"
            ) from exc
        canvases.append(canvas)
        if canvas != r.canvas_after:
            mismatches.append((r.index, "canvas snapshot differs from replay"))
    return ReplayResult(canvases=tuple(canvases), mismatches=tuple(mismatches))


class CorpusReplayError(Exception):
    """A recorded edit sequence cannot even be applied (malformed action)."""


def similarity_curve(
    transcript: DialogTranscript,
    weights: SimilarityWeights = DEFAULT_WEIGHTS,
    use_snapshots: bool = False,
) -> list[float]:
    """Score after each round, index 0 being the empty canvas.

    By default scores the replayed canvases; ``use_snapshots`` scores the
    recorded snapshots instead, which matters only for anomalous dialogs.
    """
    if use_snapshots:
        canvases: Iterable[Scene] = [Scene()] + [r.canvas_after for r in transcript.rounds]
    else:
        canvases = replay(transcript).canvases
    return [similarity_score(transcript.target, c, weights) for c in canvases]
