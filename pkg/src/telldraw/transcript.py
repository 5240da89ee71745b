"""Dialog records and the line-delimited JSON corpus store.

One transcript per line, schema-versioned. Raw text and pre-tokenized text
are both carried; to keep files small the token list is omitted on disk when
it equals the raw text split on single spaces. A golden sample lives at
``data/sample_corpus.jsonl``.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator

from .cliparts import Piece, Scene

SCHEMA_VERSION = 1

TELLER = "teller"
DRAWER = "drawer"


class CorpusError(Exception):
    """Unreadable or schema-mismatched corpus content."""


@dataclass(frozen=True)
class RoundRecord:
    """One conversational round: teller message, drawer reply, canvas edits.

    ``drawer_text`` may be None: dialogs can end on an unanswered teller
    message. ``anomaly`` carries an import-time note when the recorded
    ``canvas_after`` does not match replaying the recorded edits; anomalous
    rounds are kept, never silently fixed.
    """

    index: int
    teller_text: str
    teller_tokens: tuple[str, ...]
    drawer_text: str | None = None
    drawer_tokens: tuple[str, ...] | None = None
    removed: tuple[int, ...] = ()
    added: tuple[Piece, ...] = ()
    canvas_after: Scene = field(default_factory=Scene)
    peek_flag: bool = False
    anomaly: str | None = None

    def to_json(self) -> dict:
        out: dict = {"i": self.index, "t": self.teller_text}
        if tuple(self.teller_text.split(" ")) != self.teller_tokens:
            out["tt"] = list(self.teller_tokens)
        if self.drawer_text is not None:
            out["d"] = self.drawer_text
            if (
                self.drawer_tokens is not None
                and tuple(self.drawer_text.split(" ")) != self.drawer_tokens
            ):
                out["dt"] = list(self.drawer_tokens)
        if self.removed:
            out["rm"] = list(self.removed)
        if self.added:
            out["add"] = [p.to_json() for p in self.added]
        out["canvas"] = self.canvas_after.to_json()
        if self.peek_flag:
            out["peek"] = True
        if self.anomaly:
            out["anomaly"] = self.anomaly
        return out

    @classmethod
    def from_json(cls, d: dict) -> "RoundRecord":
        teller_text = d["t"]
        drawer_text = d.get("d")
        return cls(
            index=d["i"],
            teller_text=teller_text,
            teller_tokens=tuple(d.get("tt", teller_text.split(" "))),
            drawer_text=drawer_text,
            drawer_tokens=(
                tuple(d["dt"]) if "dt" in d
                else tuple(drawer_text.split(" ")) if drawer_text is not None
                else None
            ),
            removed=tuple(d.get("rm", ())),
            added=tuple(Piece.from_json(p) for p in d.get("add", ())),
            canvas_after=Scene.from_json(d.get("canvas", ())),
            peek_flag=bool(d.get("peek", False)),
            anomaly=d.get("anomaly"),
        )


@dataclass(frozen=True)
class DialogTranscript:
    """A full game record: the target scene plus every round."""

    scene_id: str
    target: Scene
    rounds: tuple[RoundRecord, ...]
    duration_seconds: float | None = None
    final_similarity: float | None = None

    @property
    def n_teller_messages(self) -> int:
        return len(self.rounds)

    @property
    def n_drawer_messages(self) -> int:
        return sum(1 for r in self.rounds if r.drawer_text is not None)

    def final_canvas(self) -> Scene:
        return self.rounds[-1].canvas_after if self.rounds else Scene()

    def with_similarity(self, score: float) -> "DialogTranscript":
        return replace(self, final_similarity=score)

    def to_json(self) -> dict:
        out: dict = {
            "v": SCHEMA_VERSION,
            "scene_id": self.scene_id,
            "target": self.target.to_json(),
            "rounds": [r.to_json() for r in self.rounds],
        }
        if self.duration_seconds is not None:
            out["duration"] = self.duration_seconds
        if self.final_similarity is not None:
            out["score"] = self.final_similarity
        return out

    @classmethod
    def from_json(cls, d: dict) -> "DialogTranscript":
        if d.get("v") != SCHEMA_VERSION:
            raise CorpusError(f"unsupported transcript schema {d.get('v')!r}")
        return cls(
            scene_id=d["scene_id"],
            target=Scene.from_json(d["target"]),
            rounds=tuple(RoundRecord.from_json(r) for r in d["rounds"]),
            duration_seconds=d.get("duration"),
            final_similarity=d.get("score"),
        )


def dump_line(transcript: DialogTranscript) -> str:
    return json.dumps(transcript.to_json(), separators=(",", ":"), sort_keys=True)


def write_corpus(path: str | Path, transcripts: Iterable[DialogTranscript]) -> int:
    n = 0
    with open(path, "w") as f:
        for t in transcripts:
            f.write(dump_line(t) + "\n")
            n += 1
    return n


def iter_corpus(path: str | Path) -> Iterator[DialogTranscript]:
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                yield DialogTranscript.from_json(json.loads(line))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc


def read_corpus(path: str | Path) -> list[DialogTranscript]:
    return list(iter_corpus(path))


def corpus_fingerprint(transcripts: Iterable[DialogTranscript]) -> str:
    """Content hash used to stamp splits, manifests, and reports."""
    digest = hashlib.sha256()
    for t in transcripts:
        digest.update(dump_line(t).encode())
        digest.update(b"\n")
    return digest.hexdigest()


class TranscriptStore:
    """Append-only JSONL store for finished live sessions.

    Appends are one ``write`` call per line under a process-wide lock, so
    concurrent sessions never interleave partial lines.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, transcript: DialogTranscript) -> None:
        line = dump_line(transcript) + "\n"
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a") as f:
                f.write(line)
                f.flush()

    def load(self) -> list[DialogTranscript]:
        if not self.path.exists():
            return []
        return read_corpus(self.path)
