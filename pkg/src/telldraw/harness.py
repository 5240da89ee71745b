"""Script-based and paired evaluation with crosstalk enforcement.

Script evaluation replays a recorded dialog's teller messages into a drawer
model on a fresh canvas and scores the final canvas against the target.
Paired evaluation runs live engine sessions between a teller model and a
drawer model. Both refuse, by default, any pairing whose manifests share a
training partition; reproducing the shared-codebook pathology requires the
explicit ``allow_codebook`` override.

Per-scene evaluation is order-independent and embarrassingly parallel in
principle; this implementation is single-threaded and deterministic.
"""

from __future__ import annotations

import hashlib
import json
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .agents import DrawerAgent, TellerAgent, UNTRAINED, AgentManifest
from .cliparts import DrawerAction, Scene, apply_action
from .engine import GameConfig, finish, new_session, replay, similarity_curve, submit_action, submit_message
from .metric import DEFAULT_WEIGHTS, SimilarityWeights, similarity_score
from .rounds import retrieval_text
from .transcript import DialogTranscript

PADDED_ROUNDS = 35

# Published human-condition means, kept for context in rendered reports.
# These are reference constants only; nothing asserts them.
REFERENCE_SCORES = {
    "script x human drawer": 3.83,
    "rule-based teller x human drawer": 3.21,
    "generative teller (imitation) x human drawer": 2.69,
    "generative teller (+aux loss) x human drawer": 3.04,
    "generative teller (+fine-tuning) x human drawer": 3.65,
    "human x human": 4.17,
}


class CrosstalkViolation(Exception):
    def __init__(self, shared_partition: str):
        super().__init__(
            f"teller and drawer were both trained on {shared_partition!r}; "
            "pass allow_codebook to run this pairing anyway"
        )
        self.shared_partition = shared_partition


@dataclass(frozen=True)
class CrosstalkCheck:
    ok: bool
    shared_partition: str | None = None


def enforce_crosstalk(
    teller: AgentManifest, drawer: AgentManifest
) -> CrosstalkCheck:
    """Agents may not share a training partition; untrained agents always pass."""
    if (
        teller.trained_on != UNTRAINED
        and teller.trained_on == drawer.trained_on
    ):
        return CrosstalkCheck(ok=False, shared_partition=teller.trained_on)
    return CrosstalkCheck(ok=True)


@dataclass(frozen=True)
class RoundCurve:
    """Mean similarity after round k; index 0 is the empty canvas."""

    mean_after_round: tuple[float, ...]
    dialogs_at_round: tuple[int, ...]
    padded: bool


@dataclass(frozen=True)
class EvalReport:
    label: str
    teller: AgentManifest
    drawer: AgentManifest
    scene_ids: tuple[str, ...]
    scores: tuple[float, ...]
    curve_truncated: RoundCurve
    curve_padded: RoundCurve
    eval_partition: str = "test"

    @property
    def mean(self) -> float:
        return statistics.fmean(self.scores) if self.scores else 0.0

    @property
    def median(self) -> float:
        return statistics.median(self.scores) if self.scores else 0.0

    @property
    def std(self) -> float:
        return statistics.pstdev(self.scores) if len(self.scores) > 1 else 0.0

    def fingerprint(self) -> str:
        payload = json.dumps(
            {
                "label": self.label,
                "teller": self.teller.__dict__,
                "drawer": self.drawer.__dict__,
                "scenes": self.scene_ids,
                "partition": self.eval_partition,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def to_markdown(self) -> str:
        lines = [
            f"# {self.label}",
            "",
            "| teller | drawer | scenes | mean | median | std |",
            "| --- | --- | --- | --- | --- | --- |",
            f"| {self.teller.label()} | {self.drawer.label()} "
            f"| {len(self.scores)} | {self.mean:.2f} | {self.median:.2f} "
            f"| {self.std:.2f} |",
            "",
            "Published human-condition means, for context (not reproduced here):",
            "",
            "| condition | mean |",
            "| --- | --- |",
        ]
        lines += [f"| {k} | {v:.2f} |" for k, v in REFERENCE_SCORES.items()]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        rows = ["scene_id,score"]
        rows += [f"{sid},{s:.6f}" for sid, s in zip(self.scene_ids, self.scores)]
        return "\n".join(rows) + "\n"

    def save(self, out_dir: str | Path) -> tuple[Path, Path]:
        """Write markdown + CSV, content-addressed by the report fingerprint."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{self.label.replace(' ', '_')}-{self.fingerprint()[:12]}"
        md = out / f"{stem}.md"
        csv = out / f"{stem}.csv"
        md.write_text(self.to_markdown())
        csv.write_text(self.to_csv())
        return md, csv


def _curves_from_score_lists(
    score_lists: Sequence[Sequence[float]], pad_to: int = PADDED_ROUNDS
) -> tuple[RoundCurve, RoundCurve]:
    """Truncated-population and padded-to-N curves from per-dialog curves."""
    max_len = max((len(s) for s in score_lists), default=1)
    trunc_means, trunc_counts = [], []
    for k in range(max_len):
        present = [s[k] for s in score_lists if len(s) > k]
        trunc_means.append(statistics.fmean(present) if present else 0.0)
        trunc_counts.append(len(present))
    padded_means = []
    for k in range(pad_to + 1):
        vals = [s[min(k, len(s) - 1)] for s in score_lists]
        padded_means.append(statistics.fmean(vals) if vals else 0.0)
    return (
        RoundCurve(tuple(trunc_means), tuple(trunc_counts), padded=False),
        RoundCurve(tuple(padded_means), tuple([len(score_lists)] * (pad_to + 1)),
                   padded=True),
    )


def per_round_curves(
    transcripts: Iterable[DialogTranscript],
    weights: SimilarityWeights = DEFAULT_WEIGHTS,
    pad_to: int = PADDED_ROUNDS,
) -> tuple[RoundCurve, RoundCurve]:
    """Curves for recorded dialogs, via the replay code path."""
    score_lists = [similarity_curve(t, weights) for t in transcripts]
    return _curves_from_score_lists(score_lists, pad_to=pad_to)


class ReplayHumanDrawer(DrawerAgent):
    """Pseudo-drawer that re-performs the recorded human actions round by
    round; script-evaluating it must reproduce the recorded outcome exactly."""

    reply = "ok"

    def __init__(self, transcripts: Iterable[DialogTranscript]):
        self._by_scene = {t.scene_id: t for t in transcripts}
        self._current: DialogTranscript | None = None
        self._round = 0
        self.manifest = AgentManifest(agent_kind="human_replay")

    def start_session(self, scene_id: str | None = None) -> None:
        self._current = self._by_scene[scene_id] if scene_id else None
        self._round = 0

    def act(self, message: str, canvas: Scene) -> tuple[DrawerAction, str]:
        if self._current is None or self._round >= len(self._current.rounds):
            return DrawerAction(), self.reply
        r = self._current.rounds[self._round]
        self._round += 1
        return DrawerAction(adds=r.added, removes=r.removed), self.reply


def eval_script_drawer(
    drawer: DrawerAgent,
    transcripts: Sequence[DialogTranscript],
    weights: SimilarityWeights = DEFAULT_WEIGHTS,
    eval_partition: str = "test",
    label: str | None = None,
) -> EvalReport:
    """Feed each recorded dialog's teller messages to the drawer, fresh
    canvas per dialog, and score the final canvas against the target."""
    if drawer.manifest.trained_on == eval_partition:
        raise CrosstalkViolation(eval_partition)
    scene_ids, scores, score_lists = [], [], []
    script_manifest = AgentManifest(agent_kind="script")
    for t in transcripts:
        drawer.start_session(t.scene_id)
        canvas = Scene()
        curve = [similarity_score(t.target, canvas, weights)]
        for r in t.rounds:
            action, _reply = drawer.act(retrieval_text(r.teller_tokens), canvas)
            canvas = apply_action(canvas, action)
            curve.append(similarity_score(t.target, canvas, weights))
        scene_ids.append(t.scene_id)
        scores.append(curve[-1])
        score_lists.append(curve)
    trunc, padded = _curves_from_score_lists(score_lists)
    return EvalReport(
        label=label or f"script x {drawer.manifest.label()}",
        teller=script_manifest,
        drawer=drawer.manifest,
        scene_ids=tuple(scene_ids),
        scores=tuple(scores),
        curve_truncated=trunc,
        curve_padded=padded,
        eval_partition=eval_partition,
    )


def run_pair_session(
    teller: TellerAgent,
    drawer: DrawerAgent,
    scene_id: str,
    target: Scene,
    config: GameConfig = GameConfig(),
    weights: SimilarityWeights = DEFAULT_WEIGHTS,
) -> DialogTranscript:
    """One live engine session; STOP or the round cap ends it."""
    state = new_session(target, config, scene_id=scene_id)
    drawer.start_session(scene_id)
    history: list[str] = []
    while len(state.rounds) < config.max_rounds:
        message = teller.next_message(target, history)
        if message is None:
            break
        history.append(message)
        state = submit_message(state, "teller", message)
        action, reply = drawer.act(message, state.canvas)
        if not action.is_empty:
            state = submit_action(state, action)
        state = submit_message(state, "drawer", reply)
    _state, transcript = finish(state, "teller", weights=weights)
    return transcript


def eval_pair(
    teller: TellerAgent,
    drawer: DrawerAgent,
    scenes: Sequence[tuple[str, Scene]],
    config: GameConfig = GameConfig(),
    weights: SimilarityWeights = DEFAULT_WEIGHTS,
    allow_codebook: bool = False,
    eval_partition: str = "test",
    label: str | None = None,
) -> tuple[EvalReport, list[DialogTranscript]]:
    """Paired evaluation over scenes; crosstalk-guarded by default."""
    check = enforce_crosstalk(teller.manifest, drawer.manifest)
    if not check.ok and not allow_codebook:
        raise CrosstalkViolation(check.shared_partition)
    scene_ids, scores, score_lists, transcripts = [], [], [], []
    for scene_id, target in scenes:
        transcript = run_pair_session(
            teller, drawer, scene_id, target, config, weights
        )
        transcripts.append(transcript)
        scene_ids.append(scene_id)
        scores.append(transcript.final_similarity)
        score_lists.append(similarity_curve(transcript, weights))
    trunc, padded = _curves_from_score_lists(score_lists)
    report = EvalReport(
        label=label or f"{teller.manifest.label()} x {drawer.manifest.label()}",
        teller=teller.manifest,
        drawer=drawer.manifest,
        scene_ids=tuple(scene_ids),
        scores=tuple(scores),
        curve_truncated=trunc,
        curve_padded=padded,
        eval_partition=eval_partition,
    )
    return report, transcripts
