"""Adapter from a corpus release directory to the internal transcript form.

The adapter consumes a release directory containing ``dialogs.json``:

.. code-block:: text

    {
      "format": "telldraw-release/1",
      "canvas": {"width": 800, "height": 500},
      "dialogs": {
        "<scene_id>": {
          "split": "teller_train",          # optional partition label
          "duration_seconds": 312.5,        # optional
          "scene": [<piece>, ...],          # the target, pixel coordinates
          "rounds": [
            {"teller": {"text": "...", "tokens": ["..."]},
             "drawer": {"text": "ok", "tokens": ["ok"]} | null,
             "removed": [<type id>, ...],
             "added": [<piece>, ...],
             "canvas": [<piece>, ...],      # snapshot after the round
             "peek": false},
            ...
          ]
        }, ...
      }
    }

where ``<piece>`` is ``{"id", "flip", "size", "px", "py"[, "pose", "expr"]}``
with pixel coordinates. Import divides pixels by the canvas dimensions; the
manifest records those dimensions, so pixel values stay recoverable, and
everything downstream consumes normalized coordinates only.

Import is single-threaded and deterministic: dialogs are processed in sorted
scene-id order, every round is replayed against its recorded snapshot, and
mismatches are flagged on the round (and listed in the manifest) rather than
repaired. A second import of the same directory is bit-identical.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .cliparts import DrawerAction, Piece, Scene, SceneError, apply_action
from .cliparts import FLIP_BY_NAME, SIZE_BY_NAME
from .transcript import CorpusError, DialogTranscript, RoundRecord

RELEASE_FORMAT = "telldraw-release/1"
RELEASE_FILENAME = "dialogs.json"


@dataclass(frozen=True)
class ImportManifest:
    source: str
    source_fingerprint: str
    canvas_width: float
    canvas_height: float
    n_dialogs: int
    n_rounds: int
    n_messages: int
    has_split_labels: bool
    anomalies: tuple[tuple[str, int, str], ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "source_fingerprint": self.source_fingerprint,
            "canvas": {"width": self.canvas_width, "height": self.canvas_height},
            "n_dialogs": self.n_dialogs,
            "n_rounds": self.n_rounds,
            "n_messages": self.n_messages,
            "has_split_labels": self.has_split_labels,
            "anomalies": [list(a) for a in self.anomalies],
        }


@dataclass(frozen=True)
class ImportResult:
    transcripts: tuple[DialogTranscript, ...]
    manifest: ImportManifest
    split_labels: dict[str, str] | None


def _piece_from_release(d: Mapping, width: float, height: float, where: str) -> Piece:
    try:
        return Piece(
            type_id=d["id"],
            flip=FLIP_BY_NAME[d["flip"]],
            size=SIZE_BY_NAME[d["size"]],
            x=float(d["px"]) / width,
            y=float(d["py"]) / height,
            pose=d.get("pose"),
            expression=d.get("expr"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusError(f"{where}: bad piece record {d!r}: {exc}") from exc


def _message(d: Mapping | None, where: str) -> tuple[str, tuple[str, ...]] | None:
    if d is None:
        return None
    try:
        return d["text"], tuple(d["tokens"])
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"{where}: bad message record {d!r}: {exc}") from exc


def import_official(path: str | Path) -> ImportResult:
    """Import a release directory; see the module docstring for the schema."""
    root = Path(path)
    release_file = root / RELEASE_FILENAME
    if not release_file.exists():
        raise CorpusError(f"no-corpus: {release_file} does not exist")
    raw_bytes = release_file.read_bytes()
    try:
        raw = json.loads(raw_bytes)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{release_file}: not valid JSON: {exc}") from exc

    if raw.get("format") != RELEASE_FORMAT:
        raise CorpusError(
            f"{release_file}: expected format {RELEASE_FORMAT!r}, "
            f"got {raw.get('format')!r}"
        )
    try:
        width = float(raw["canvas"]["width"])
        height = float(raw["canvas"]["height"])
        dialogs = raw["dialogs"]
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"{release_file}: missing canvas or dialogs: {exc}") from exc
    if width <= 0 or height <= 0:
        raise CorpusError(f"{release_file}: bad canvas dimensions {width}x{height}")

    transcripts = []
    anomalies = []
    split_labels: dict[str, str] = {}
    n_rounds = 0
    n_messages = 0
    for scene_id in sorted(dialogs):
        entry = dialogs[scene_id]
        where = f"dialog {scene_id}"
        try:
            target = Scene(
                _piece_from_release(p, width, height, where) for p in entry["scene"]
            )
            raw_rounds = entry["rounds"]
        except (KeyError, TypeError, SceneError) as exc:
            raise CorpusError(f"{where}: {exc}") from exc
        if "split" in entry:
            split_labels[scene_id] = entry["split"]

        canvas = Scene()
        rounds = []
        for i, rr in enumerate(raw_rounds):
            rwhere = f"{where} round {i}"
            teller = _message(rr.get("teller"), rwhere)
            if teller is None:
                raise CorpusError(f"{rwhere}: missing teller message")
            drawer = _message(rr.get("drawer"), rwhere)
            removed = tuple(rr.get("removed", ()))
            added = tuple(
                _piece_from_release(p, width, height, rwhere)
                for p in rr.get("added", ())
            )
            snapshot = Scene(
                _piece_from_release(p, width, height, rwhere)
                for p in rr.get("canvas", ())
            )
            anomaly = None
            try:
                canvas = apply_action(
                    canvas, DrawerAction(adds=added, removes=removed)
                )
            except SceneError as exc:
                raise CorpusError(f"{rwhere}: unreplayable action: {exc}") from exc
            if canvas != snapshot:
                anomaly = "snapshot differs from replayed canvas"
                anomalies.append((scene_id, i, anomaly))
            rounds.append(
                RoundRecord(
                    index=i,
                    teller_text=teller[0],
                    teller_tokens=teller[1],
                    drawer_text=drawer[0] if drawer else None,
                    drawer_tokens=drawer[1] if drawer else None,
                    removed=removed,
                    added=added,
                    canvas_after=snapshot,
                    peek_flag=bool(rr.get("peek", False)),
                    anomaly=anomaly,
                )
            )
            n_rounds += 1
            n_messages += 1 + (1 if drawer else 0)
        transcripts.append(
            DialogTranscript(
                scene_id=scene_id,
                target=target,
                rounds=tuple(rounds),
                duration_seconds=entry.get("duration_seconds"),
            )
        )

    manifest = ImportManifest(
        source=str(root),
        source_fingerprint=hashlib.sha256(raw_bytes).hexdigest(),
        canvas_width=width,
        canvas_height=height,
        n_dialogs=len(transcripts),
        n_rounds=n_rounds,
        n_messages=n_messages,
        has_split_labels=bool(split_labels),
        anomalies=tuple(anomalies),
    )
    return ImportResult(
        transcripts=tuple(transcripts),
        manifest=manifest,
        split_labels=split_labels or None,
    )
