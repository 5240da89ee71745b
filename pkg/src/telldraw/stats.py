"""Corpus statistics: message lengths, round counts, durations, replay rate."""

from __future__ import annotations

import statistics
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .engine import replay
from .transcript import DialogTranscript


@dataclass(frozen=True)
class CorpusStats:
    n_dialogs: int
    n_rounds: int
    n_teller_messages: int
    n_drawer_messages: int
    teller_token_hist: dict[int, int]
    drawer_token_hist: dict[int, int]
    round_hist: dict[int, int]
    median_teller_tokens: float
    median_drawer_tokens: float
    median_rounds: float
    single_token_drawer_messages: int
    median_duration_seconds: float | None

    @property
    def n_messages(self) -> int:
        return self.n_teller_messages + self.n_drawer_messages

    @property
    def single_token_drawer_share(self) -> float:
        return self.single_token_drawer_messages / max(1, self.n_drawer_messages)

    def to_rows(self) -> list[tuple[str, str]]:
        rows = [
            ("dialogs", f"{self.n_dialogs}"),
            ("rounds", f"{self.n_rounds}"),
            ("messages", f"{self.n_messages}"),
            ("teller messages", f"{self.n_teller_messages}"),
            ("drawer messages", f"{self.n_drawer_messages}"),
            ("median teller tokens", f"{self.median_teller_tokens:g}"),
            ("median drawer tokens", f"{self.median_drawer_tokens:g}"),
            ("median rounds", f"{self.median_rounds:g}"),
            (
                "single-token drawer messages",
                f"{self.single_token_drawer_messages}"
                f" ({self.single_token_drawer_share:.2%})",
            ),
        ]
        if self.median_duration_seconds is not None:
            rows.append(
                ("median duration", f"{self.median_duration_seconds / 60:.1f} min")
            )
        return rows

    def to_markdown(self) -> str:
        lines = ["| statistic | value |", "| --- | --- |"]
        lines += [f"| {k} | {v} |" for k, v in self.to_rows()]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        return "statistic,value\n" + "".join(
            f"{k},{v}\n" for k, v in self.to_rows()
        )


def _median(values: Sequence) -> float:
    return float(statistics.median(values)) if values else 0.0


def corpus_stats(transcripts: Iterable[DialogTranscript]) -> CorpusStats:
    teller_hist: Counter = Counter()
    drawer_hist: Counter = Counter()
    round_hist: Counter = Counter()
    durations = []
    n_dialogs = 0
    for t in transcripts:
        n_dialogs += 1
        round_hist[len(t.rounds)] += 1
        if t.duration_seconds is not None:
            durations.append(t.duration_seconds)
        for r in t.rounds:
            teller_hist[len(r.teller_tokens)] += 1
            if r.drawer_tokens is not None:
                drawer_hist[len(r.drawer_tokens)] += 1

    def expand(hist: Counter) -> list[int]:
        out = []
        for value in sorted(hist):
            out.extend([value] * hist[value])
        return out

    teller_counts = expand(teller_hist)
    drawer_counts = expand(drawer_hist)
    return CorpusStats(
        n_dialogs=n_dialogs,
        n_rounds=sum(k * v for k, v in round_hist.items()),
        n_teller_messages=len(teller_counts),
        n_drawer_messages=len(drawer_counts),
        teller_token_hist=dict(sorted(teller_hist.items())),
        drawer_token_hist=dict(sorted(drawer_hist.items())),
        round_hist=dict(sorted(round_hist.items())),
        median_teller_tokens=_median(teller_counts),
        median_drawer_tokens=_median(drawer_counts),
        median_rounds=_median(expand(round_hist)),
        single_token_drawer_messages=drawer_hist.get(1, 0),
        median_duration_seconds=_median(durations) if durations else None,
    )


@dataclass(frozen=True)
class ReplayReport:
    total_rounds: int
    matching_rounds: int
    mismatches: tuple[tuple[str, int], ...]  # (scene_id, round index)

    @property
    def match_rate(self) -> float:
        return self.matching_rounds / max(1, self.total_rounds)


def replay_consistency(transcripts: Iterable[DialogTranscript]) -> ReplayReport:
    """Fraction of rounds whose recorded snapshot equals the replayed canvas."""
    total = 0
    mismatches = []
    for t in transcripts:
        total += len(t.rounds)
        for idx, _reason in replay(t).mismatches:
            mismatches.append((t.scene_id, idx))
    return ReplayReport(
        total_rounds=total,
        matching_rounds=total - len(mismatches),
        mismatches=tuple(mismatches),
    )
