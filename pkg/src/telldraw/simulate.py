"""Simulated corpus release: scripted park scenes and dialogs at full scale.

The real corpus is a crowdsourced collection this environment cannot fetch,
so this module fabricates a release in the exact directory format
:mod:`telldraw.importer` consumes, shaped to the published corpus statistics:
9,993 dialogs, teller messages with a median of 16 tokens, drawer replies
dominated by single tokens (41,195 of them in the full build), a median of 7
rounds, and a median session duration around 6 minutes. Scenes hold 6 to 17
pieces. Dialogs follow the human pattern: the teller describes one or two
pieces per round in sky-to-small-items order, the drawer places them with
small errors, an occasional round re-positions an earlier piece, some
dialogs end on an unanswered teller message, and a small fraction of round
snapshots are corrupted to exercise anomaly handling (mis-recordings are a
fact of the real data).

Generation is fully deterministic given the seed. The default full build is
the corpus every full-scale test and demo runs against.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

from .cliparts import FLIP_NAMES, LIBRARY, SIZE_NAMES, Size, is_human
from .importer import RELEASE_FILENAME, RELEASE_FORMAT
from .splits import split_crosstalk

DEFAULT_SEED = 714025
RELEASE_DIALOGS = 9993
SINGLE_TOKEN_REPLIES = 41195
CANVAS_W = 800.0
CANVAS_H = 500.0

_BY_NAME = {t.name: t.id for t in LIBRARY}

# sampling weight per type; humans handled separately
_TYPE_WEIGHTS = {
    "sun": 8, "cloud": 7, "rainbow": 2, "lightning": 1.5, "helicopter": 2,
    "airplane": 2.5, "hot air balloon": 2, "kite": 3,
    "oak tree": 6, "pine tree": 5, "apple tree": 4, "bush": 4, "flowers": 3,
    "slide": 4, "swing set": 4, "sandbox": 3, "seesaw": 2, "picnic table": 4,
    "grill": 2.5, "tent": 2.5, "campfire": 2, "pond": 2.5,
    "bear": 3, "cat": 3, "dog": 4, "duck": 2.5, "owl": 1.5, "snake": 1.5,
    "soccer ball": 4, "basketball": 3, "baseball": 2.5, "beach ball": 3,
    "tennis ball": 2, "football": 2, "baseball bat": 2.5, "tennis racket": 2.5,
    "frisbee": 2.5, "shovel": 2, "pail": 2, "balloons": 2.5, "pinwheel": 1.5,
    "hamburger": 2.5, "hot dog": 2.5, "pizza": 2, "soda": 2, "apple": 2,
    "pie": 1.5, "ketchup": 1, "mustard": 1,
    "baseball cap": 2.5, "chef hat": 1, "crown": 1.5, "pirate hat": 1.5,
    "witch hat": 1, "wizard hat": 1, "sunglasses": 2.5,
}

_PIECE_COUNT_PMF = [
    (6, 0.62), (7, 0.18), (8, 0.09), (9, 0.045), (10, 0.025), (11, 0.015),
    (12, 0.008), (13, 0.004), (14, 0.002), (15, 0.0008), (16, 0.0003),
    (17, 0.0001),
]

# teller message token counts; calibrated so the corpus median is 16
_TOKEN_COUNT_PMF = (
    [(n, w) for n, w in zip(range(8, 16),
                            [0.040, 0.045, 0.050, 0.055, 0.060, 0.065, 0.070, 0.068])]
    + [(16, 0.100)]
    + [(n, w) for n, w in zip(range(17, 41), [
        0.060, 0.055, 0.050, 0.045, 0.040, 0.035, 0.030, 0.025, 0.020, 0.017,
        0.014, 0.012, 0.010, 0.008, 0.007, 0.006, 0.005, 0.004, 0.0035, 0.003,
        0.0025, 0.002, 0.0015, 0.001])]
)

# desired round counts; the add phase puts a floor under short draws, so the
# corpus median lands at 7 with a mean near 7.1 (relevant for message totals)
_ROUND_COUNT_PMF = (
    [(4, 0.12), (5, 0.20), (6, 0.23), (7, 0.21), (8, 0.09), (9, 0.042),
     (10, 0.024), (11, 0.014), (12, 0.009), (13, 0.0065), (14, 0.0045),
     (15, 0.0034), (16, 0.0026), (17, 0.0021), (18, 0.0017), (19, 0.0014),
     (20, 0.0011), (21, 0.0008), (22, 0.0007), (23, 0.0006), (24, 0.0005),
     (25, 0.0005)]
    + [(n, 0.0003) for n in range(26, 36)]
)

_POSE_WORDS = ["standing", "sitting", "running", "waving", "jumping",
               "kicking", "reaching"]
_EXPR_WORDS = ["smiling", "sad", "angry", "surprised", "scared"]
_SINGLE_REPLIES = [("ok", 45), ("done", 30), ("okay", 10), ("k", 5),
                   ("yes", 5), ("yep", 3), ("sure", 2)]
_MULTI_REPLIES = [
    "got it", "all set", "placed it", "done what next ?", "where exactly ?",
    "should it be small or large ?", "i put it near the top", "moved it over",
    "done with that one", "facing which way ?", "ok got that placed",
]
_FILLERS = [
    ["please"], ["thanks"], ["now"], ["next"], ["carefully"], ["ok", "so"],
    ["got", "that", "?"], ["let", "me", "know"], ["when", "done"],
    ["as", "i", "said"], ["just", "like", "that"], ["make", "it", "exact"],
    ["take", "your", "time"], ["right", "about", "there"],
]
_CHATTER_CORES = [
    ["how", "does", "it", "look", "?"], ["anything", "else", "missing", "?"],
    ["did", "you", "get", "that", "?"], ["almost", "done", "now"],
    ["let", "me", "think", "a", "second"], ["double", "check", "the", "sizes"],
    ["we", "are", "nearly", "there"],
]
_CLOSING_CORES = [
    ["that", "should", "be", "everything"],
    ["i", "think", "we", "are", "done"],
    ["looks", "complete", "to", "me", "thanks"],
    ["ok", "submit", "when", "ready"],
]


def _draw(rng: random.Random, pmf) -> int:
    return rng.choices([v for v, _ in pmf], weights=[w for _, w in pmf])[0]


def _weighted_sample(rng: random.Random, weights: dict[int, float], k: int) -> list[int]:
    # weight-biased shuffle, deterministic given the rng state
    keyed = sorted(weights, key=lambda t: -(rng.random() ** (1.0 / weights[t])))
    return keyed[:k]


def _sample_scene(rng: random.Random) -> list[dict]:
    n = _draw(rng, _PIECE_COUNT_PMF)
    ids = []
    if rng.random() < 0.90:
        ids.append(_BY_NAME["boy"])
    if rng.random() < 0.85:
        ids.append(_BY_NAME["girl"])
    pool = {_BY_NAME[name]: w for name, w in _TYPE_WEIGHTS.items()}
    ids.extend(_weighted_sample(rng, pool, max(0, n - len(ids))))
    pieces = []
    for t in ids[:n]:
        cat = LIBRARY[t].category
        if cat == "sky":
            y = rng.uniform(0.02, 0.25)
        elif cat == "scenery":
            y = rng.uniform(0.35, 0.75)
        elif cat in ("human", "animal"):
            y = rng.uniform(0.45, 0.85)
        else:
            y = rng.uniform(0.40, 0.90)
        x = rng.uniform(0.02, 0.95)
        if rng.random() < 0.03:  # partially off canvas, a real-data quirk
            x = rng.choice([rng.uniform(-0.12, -0.01), rng.uniform(1.0, 1.10)])
        piece = {
            "id": t,
            "flip": FLIP_NAMES[rng.randrange(2)],
            "size": SIZE_NAMES[Size(rng.choices([0, 1, 2], [0.25, 0.60, 0.15])[0])],
            "px": round(x * CANVAS_W, 1),
            "py": round(y * CANVAS_H, 1),
        }
        if is_human(t):
            piece["pose"] = rng.randrange(7)
            piece["expr"] = rng.randrange(5)
        pieces.append(piece)
    return pieces


def _describe_order(rng: random.Random, pieces: list[dict]) -> list[dict]:
    stratum = {"sky": 0, "scenery": 1, "human": 2, "animal": 2}
    ordered = sorted(
        pieces, key=lambda p: (stratum.get(LIBRARY[p["id"]].category, 3), p["id"])
    )
    for i in range(len(ordered) - 1):  # humans are only roughly consistent
        if rng.random() < 0.15:
            ordered[i], ordered[i + 1] = ordered[i + 1], ordered[i]
    return ordered


def _name_tokens(rng: random.Random, type_id: int) -> list[str]:
    name = LIBRARY[type_id].name
    if name == "boy":
        return ["mike"] if rng.random() < 0.5 else ["the", "boy"]
    if name == "girl":
        return ["jenny"] if rng.random() < 0.5 else ["the", "girl"]
    return name.split(" ")


def _coarse_position(px: float, py: float) -> list[str]:
    x, y = px / CANVAS_W, py / CANVAS_H
    if y < 0.18:
        v = ["top"]
    elif y < 0.40:
        v = ["upper"]
    elif y < 0.60:
        v = ["middle"]
    elif y < 0.80:
        v = ["lower"]
    else:
        v = ["bottom"]
    if x < 0.15:
        h = ["far", "left"]
    elif x < 0.38:
        h = ["left"]
    elif x < 0.62:
        h = ["center"]
    elif x < 0.85:
        h = ["right"]
    else:
        h = ["far", "right"]
    return v + h


def _piece_message(rng: random.Random, piece: dict, budget: int) -> list[str]:
    """Describe one piece in roughly ``budget`` tokens, padded with filler."""
    x20 = max(-2, min(22, round(20 * piece["px"] / CANVAS_W)))
    y20 = max(-2, min(22, round(20 * piece["py"] / CANVAS_H)))
    tokens = _name_tokens(rng, piece["id"]) + _coarse_position(piece["px"], piece["py"])
    optional = [
        [{"small": "small", "normal": "medium", "large": "large"}[piece["size"]]],
        ["about", str(x20), "from", "left"],
        ["and", str(y20), "from", "top"],
    ]
    if "pose" in piece:
        optional.insert(1, [_POSE_WORDS[piece["pose"]]])
        optional.insert(2, [_EXPR_WORDS[piece["expr"]]])
        flip_prob = 0.75
    else:
        flip_prob = 0.45 if LIBRARY[piece["id"]].category == "animal" else 0.25
    if rng.random() < flip_prob:
        optional.append(["facing", piece["flip"]])
    for block in optional:
        if len(tokens) + len(block) <= budget:
            tokens = tokens + block
    while len(tokens) < budget:
        filler = rng.choice(_FILLERS)
        tokens = tokens + filler[: budget - len(tokens)]
    return tokens


def _padded(rng: random.Random, core: list[str], budget: int) -> list[str]:
    tokens = list(core)
    while len(tokens) < budget:
        filler = rng.choice(_FILLERS)
        tokens = tokens + filler[: budget - len(tokens)]
    return tokens


def _place(rng: random.Random, truth: dict) -> dict:
    """The drawer's attempt at a described piece: close but imperfect."""
    placed = dict(truth)
    placed["px"] = round(truth["px"] + rng.gauss(0.0, 0.03) * CANVAS_W, 1)
    placed["py"] = round(truth["py"] + rng.gauss(0.0, 0.03) * CANVAS_H, 1)
    if rng.random() < 0.08:
        placed["size"] = rng.choice(["small", "normal", "large"])
    if rng.random() < 0.08:
        placed["flip"] = "left" if truth["flip"] == "right" else "right"
    if "pose" in truth and rng.random() < 0.10:
        placed["pose"] = rng.randrange(7)
    if "expr" in truth and rng.random() < 0.10:
        placed["expr"] = rng.randrange(5)
    return placed


def _reply(rng: random.Random) -> str:
    if rng.random() < 0.6206:
        return rng.choices(
            [w for w, _ in _SINGLE_REPLIES], weights=[w for _, w in _SINGLE_REPLIES]
        )[0]
    return rng.choice(_MULTI_REPLIES)


def _build_dialog(rng: random.Random, pieces: list[dict]) -> dict:
    described = _describe_order(rng, pieces)
    queue = list(described)
    add_batches: list[list[dict]] = []
    while queue:
        take = 2 if len(queue) >= 2 and rng.random() < 0.45 else 1
        add_batches.append(queue[:take])
        queue = queue[take:]

    fixup = rng.random() < 0.25
    unanswered = rng.random() < 0.48
    target_rounds = _draw(rng, _ROUND_COUNT_PMF)
    base = len(add_batches) + (1 if fixup else 0)
    chatter = max(0, target_rounds - base - (1 if unanswered else 0))

    rounds = []
    canvas: list[dict] = []
    placed_by_id: dict[int, dict] = {}

    def snapshot() -> list[dict]:
        return [dict(p) for p in canvas]

    for batch in add_batches:
        budget = _draw(rng, _TOKEN_COUNT_PMF)
        if len(batch) == 1:
            tokens = _piece_message(rng, batch[0], budget)
        else:
            half = max(6, budget // 2)
            tokens = (
                _piece_message(rng, batch[0], half)
                + ["and", "also"]
                + _piece_message(rng, batch[1], max(6, budget - half - 2))
            )
        added = []
        for truth in batch:
            placed = _place(rng, truth)
            placed_by_id[placed["id"]] = placed
            canvas.append(placed)
            added.append(placed)
        rounds.append(
            {
                "teller": {"text": " ".join(tokens), "tokens": tokens},
                "drawer": {"text": (r := _reply(rng)), "tokens": r.split(" ")},
                "removed": [],
                "added": [dict(p) for p in added],
                "canvas": snapshot(),
            }
        )

    if fixup and placed_by_id:
        # re-place one earlier piece closer to where it belongs
        victim_id = rng.choice(sorted(placed_by_id))
        truth = next(p for p in described if p["id"] == victim_id)
        better = dict(truth)
        better["px"] = round(truth["px"] + rng.gauss(0.0, 0.01) * CANVAS_W, 1)
        better["py"] = round(truth["py"] + rng.gauss(0.0, 0.01) * CANVAS_H, 1)
        canvas = [p for p in canvas if p["id"] != victim_id] + [better]
        placed_by_id[victim_id] = better
        budget = _draw(rng, _TOKEN_COUNT_PMF)
        core = (["move", "the"] + _name_tokens(rng, victim_id)
                + ["a", "bit"] + _coarse_position(better["px"], better["py"]))
        tokens = _padded(rng, core, budget)
        rounds.append(
            {
                "teller": {"text": " ".join(tokens), "tokens": tokens},
                "drawer": {"text": (r := _reply(rng)), "tokens": r.split(" ")},
                "removed": [victim_id],
                "added": [dict(better)],
                "canvas": snapshot(),
            }
        )

    for _ in range(chatter):
        budget = _draw(rng, _TOKEN_COUNT_PMF)
        tokens = _padded(rng, rng.choice(_CHATTER_CORES), budget)
        rounds.append(
            {
                "teller": {"text": " ".join(tokens), "tokens": tokens},
                "drawer": {"text": (r := _reply(rng)), "tokens": r.split(" ")},
                "removed": [],
                "added": [],
                "canvas": snapshot(),
            }
        )

    if unanswered:
        budget = _draw(rng, _TOKEN_COUNT_PMF)
        tokens = _padded(rng, rng.choice(_CLOSING_CORES), budget)
        rounds.append(
            {
                "teller": {"text": " ".join(tokens), "tokens": tokens},
                "drawer": None,
                "removed": [],
                "added": [],
                "canvas": snapshot(),
            }
        )

    if rng.random() < 0.10 and len(rounds) >= 2:
        rounds[rng.randrange(1, len(rounds))]["peek"] = True

    duration = min(1200.0, max(60.0, rng.lognormvariate(math.log(360.0), 0.45)))
    return {
        "duration_seconds": round(duration, 1),
        "scene": described,
        "rounds": rounds,
    }


def _inject_anomalies(rng: random.Random, dialogs: dict, rate: float) -> None:
    """Corrupt a small fraction of recorded snapshots (never the actions)."""
    for scene_id in sorted(dialogs):
        for rr in dialogs[scene_id]["rounds"]:
            if not rr["canvas"] or rng.random() >= rate:
                continue
            snap = rr["canvas"]
            if rng.random() < 0.6:
                victim = snap[rng.randrange(len(snap))]
                victim["px"] = round(victim["px"] + 2.7, 1)
            else:
                snap.pop(rng.randrange(len(snap)))


def _force_single_token_count(dialogs: dict, target: int) -> None:
    """Nudge drawer replies so exactly ``target`` of them are single-token."""
    singles, multis = [], []
    for scene_id in sorted(dialogs):
        for rr in dialogs[scene_id]["rounds"]:
            if rr["drawer"] is None:
                continue
            (singles if len(rr["drawer"]["tokens"]) == 1 else multis).append(rr)
    excess = len(singles) - target
    if excess > 0:
        for i in range(excess):  # evenly spaced, strictly increasing indices
            rr = singles[i * len(singles) // excess]
            text = rr["drawer"]["text"] + " done"
            rr["drawer"] = {"text": text, "tokens": text.split(" ")}
    elif excess < 0:
        for rr in multis[: -excess]:
            rr["drawer"] = {"text": "ok", "tokens": ["ok"]}


def generate_release(
    n_dialogs: int = RELEASE_DIALOGS,
    seed: int = DEFAULT_SEED,
    include_split_labels: bool = False,
    anomaly_rate: float = 0.008,
) -> dict:
    """Build a release document; full-size builds match the published stats."""
    rng = random.Random(seed)
    dialogs = {}
    for i in range(n_dialogs):
        scene_id = f"scene_{i:05d}"
        dialogs[scene_id] = _build_dialog(rng, _sample_scene(rng))
    _inject_anomalies(random.Random(seed + 1), dialogs, anomaly_rate)
    if n_dialogs == RELEASE_DIALOGS:
        _force_single_token_count(dialogs, SINGLE_TOKEN_REPLIES)
    if include_split_labels:
        split = split_crosstalk(dialogs.keys(), seed=seed)
        for scene_id in dialogs:
            dialogs[scene_id]["split"] = split.partition_of(scene_id)
    return {
        "format": RELEASE_FORMAT,
        "canvas": {"width": CANVAS_W, "height": CANVAS_H},
        "seed": seed,
        "dialogs": dialogs,
    }


def write_release(directory: str | Path, **kwargs) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    release = generate_release(**kwargs)
    path = directory / RELEASE_FILENAME
    with open(path, "w") as f:
        json.dump(release, f, separators=(",", ":"), sort_keys=True)
    return path
