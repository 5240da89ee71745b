"""Players: scripted teller, retrieval-based teller and drawer.

A teller sees the target scene and produces one message per call, or None
when it has nothing left to say. A drawer turns the last teller message plus
its own canvas into one canvas action and a (normally trivial) reply; the
silent-drawer convention means replies default to "ok" and tellers never
condition on them.

Every agent carries an :class:`AgentManifest` naming the training partition
it was built from; the evaluation harness uses that to enforce the
disjoint-training rule. Agents are immutable after construction and
deterministic given their inputs, so one instance can serve any number of
concurrent sessions.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .cliparts import DrawerAction, Piece, Scene
from .editdist import NearestMessageIndex
from .metric import DEFAULT_WEIGHTS, PieceColumns, SimilarityWeights, batch_piece_similarity
from .rounds import SingleAddRound, retrieval_text
from .transcript import DialogTranscript

UNTRAINED = "none"


@dataclass(frozen=True)
class AgentManifest:
    """Identity plus data provenance; the crosstalk guard reads trained_on."""

    agent_kind: str
    trained_on: str = UNTRAINED
    data_fingerprint: str = ""

    def label(self) -> str:
        if self.trained_on == UNTRAINED:
            return self.agent_kind
        return f"{self.agent_kind}:{self.trained_on}"


class TellerAgent:
    """Interface: sees the target, emits messages, ignores drawer replies."""

    manifest: AgentManifest

    def next_message(self, target: Scene, history: Sequence[str]) -> str | None:
        """The next message given the messages this teller already sent,
        or None to stop."""
        raise NotImplementedError


class DrawerAgent:
    """Interface: turns (last teller message, own canvas) into an action."""

    manifest: AgentManifest

    def act(self, message: str, canvas: Scene) -> tuple[DrawerAction, str]:
        raise NotImplementedError

    def start_session(self, scene_id: str | None = None) -> None:
        """Hook for per-dialog state; stateless drawers ignore it."""


def _pool_fingerprint(pool: Iterable[SingleAddRound]) -> str:
    digest = hashlib.sha256()
    for r in pool:
        digest.update(f"{r.scene_id}#{r.round_index}:{r.message}\n".encode())
    return digest.hexdigest()


class ScriptedTeller(TellerAgent):
    """Replays the recorded teller messages of one dialog, then stops."""

    def __init__(self, transcript: DialogTranscript):
        self._messages = [retrieval_text(r.teller_tokens) for r in transcript.rounds]
        self.manifest = AgentManifest(
            agent_kind="script",
            trained_on=UNTRAINED,
            data_fingerprint=hashlib.sha256(
                json.dumps(self._messages).encode()
            ).hexdigest(),
        )

    def next_message(self, target: Scene, history: Sequence[str]) -> str | None:
        if len(history) >= len(self._messages):
            return None
        return self._messages[len(history)]


def _load_strata() -> dict[int, int]:
    raw = json.loads(
        resources.files("telldraw.data").joinpath("teller_order.json").read_text()
    )
    return {int(k): v for k, v in raw["stratum"].items()}


DESCRIBE_STRATA = _load_strata()


def describe_order(target: Scene) -> list[Piece]:
    """Sky first, then large scenery, then people and animals, then small
    items; ties broken by type id."""
    return sorted(target, key=lambda p: (DESCRIBE_STRATA[p.type_id], p.type_id))


class RuleBasedTeller(TellerAgent):
    """Describes one piece per round by replaying the message of the most
    similar single-add round from its training pool."""

    def __init__(self, pool: Sequence[SingleAddRound], manifest: AgentManifest):
        if not pool:
            raise ValueError("empty retrieval pool")
        self.pool = list(pool)
        self.manifest = manifest
        self._buckets: dict[int, tuple[list[SingleAddRound], PieceColumns]] = {}
        by_type: dict[int, list[SingleAddRound]] = {}
        for r in self.pool:  # pool order == corpus order == tie-break order
            by_type.setdefault(r.piece.type_id, []).append(r)
        for type_id, rounds in by_type.items():
            self._buckets[type_id] = (rounds, PieceColumns(r.piece for r in rounds))

    def nearest_message(self, piece: Piece) -> str:
        """Message of the argmax-similarity pool round for this piece.

        A round whose piece has a different type scores 0 under the scene
        metric (empty type intersection), so normally any same-type round
        wins and the per-type bucket is the whole search. The full argmax
        semantics still hold in the corners: a same-type score can dip below
        0 (pieces far off canvas), losing to the earliest different-type
        round, and exact ties break toward the lowest pool order.
        """
        bucket = self._buckets.get(piece.type_id)
        other = next(
            (r for r in self.pool if r.piece.type_id != piece.type_id), None
        )
        if bucket is None:
            return other.message  # every round ties at 0; lowest order wins
        rounds, columns = bucket
        scores = batch_piece_similarity(piece, columns)
        best = int(np.argmax(scores))  # first max = lowest order
        if other is not None:
            if scores[best] < 0:
                return other.message
            if scores[best] == 0 and other.order < rounds[best].order:
                return other.message
        return rounds[best].message

    def next_message(self, target: Scene, history: Sequence[str]) -> str | None:
        order = describe_order(target)
        if len(history) >= len(order):
            return None
        return self.nearest_message(order[len(history)])


class RuleBasedDrawer(DrawerAgent):
    """Adds the piece of the pool round whose message is nearest in edit
    distance to the incoming message."""

    reply = "ok"

    def __init__(self, pool: Sequence[SingleAddRound], manifest: AgentManifest):
        if not pool:
            raise ValueError("empty retrieval pool")
        self.pool = list(pool)
        self.manifest = manifest
        self._index = NearestMessageIndex([r.message for r in self.pool])

    def act(self, message: str, canvas: Scene) -> tuple[DrawerAction, str]:
        idx, _dist = self._index.nearest(message)
        piece = self.pool[idx].piece
        if piece.type_id in canvas:
            # the retrieved type is already drawn: honor the intent as an
            # attribute edit so the one-per-type invariant holds
            action = DrawerAction(edits=(piece,))
        else:
            action = DrawerAction(adds=(piece,))
        return action, self.reply


class IdleDrawer(DrawerAgent):
    """Replies and never draws; the evaluation floor."""

    reply = "ok"

    def __init__(self):
        self.manifest = AgentManifest(agent_kind="idle")

    def act(self, message: str, canvas: Scene) -> tuple[DrawerAction, str]:
        return DrawerAction(), self.reply


def rule_based_teller(
    pool: Sequence[SingleAddRound], partition: str
) -> RuleBasedTeller:
    manifest = AgentManifest(
        agent_kind="rb_teller",
        trained_on=partition,
        data_fingerprint=_pool_fingerprint(pool),
    )
    return RuleBasedTeller(pool, manifest)


def rule_based_drawer(
    pool: Sequence[SingleAddRound], partition: str
) -> RuleBasedDrawer:
    manifest = AgentManifest(
        agent_kind="rb_drawer",
        trained_on=partition,
        data_fingerprint=_pool_fingerprint(pool),
    )
    return RuleBasedDrawer(pool, manifest)
