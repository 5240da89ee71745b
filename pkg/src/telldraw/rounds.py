"""The single-add round pool both retrieval agents are built from.

A round qualifies when the drawer removed nothing and added exactly one
piece; the teller message that provoked it is paired with that piece. The
message text used for retrieval is the pre-tokenized text joined by single
spaces, no case folding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .cliparts import Piece
from .transcript import DialogTranscript

MESSAGE_JOINER = " "


@dataclass(frozen=True)
class SingleAddRound:
    order: int  # position in corpus enumeration; the retrieval tie-break key
    scene_id: str
    round_index: int
    message: str
    piece: Piece


def retrieval_text(tokens: Iterable[str]) -> str:
    return MESSAGE_JOINER.join(tokens)


def extract_single_add_rounds(
    transcripts: Iterable[DialogTranscript],
) -> list[SingleAddRound]:
    """All qualifying rounds, in corpus order."""
    pool = []
    for t in transcripts:
        for r in t.rounds:
            if not r.removed and len(r.added) == 1:
                pool.append(
                    SingleAddRound(
                        order=len(pool),
                        scene_id=t.scene_id,
                        round_index=r.index,
                        message=retrieval_text(r.teller_tokens),
                        piece=r.added[0],
                    )
                )
    return pool
