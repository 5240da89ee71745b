"""Minibatch momentum SGD for the drawing network, plus checkpoint I/O.

The schedule is deliberately plain: fixed learning rate decayed by a
constant factor each epoch, classical momentum, global gradient-norm
clipping. Training consumes the drawer training partition only; asking it
to train on anything else is refused unless explicitly overridden, so a
teller and drawer can never silently share data.

Checkpoints are a single ``.npz``: every parameter block plus a JSON header
carrying the manifest, config, and vocabulary.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from ..agents import AgentManifest
from ..cliparts import Scene
from ..transcript import DialogTranscript
from .model import (
    DrawerConfig,
    DrawerParams,
    PARAM_BLOCKS,
    TrainingExample,
    batch_loss,
    init_params,
)
from .vocab import Vocabulary

DRAWER_PARTITION = "drawer_train"


@dataclass
class TrainConfig:
    epochs: int = 4
    batch_size: int = 64
    learning_rate: float = 0.02
    momentum: float = 0.9
    lr_decay: float = 0.7  # multiplied in after each epoch
    grad_clip: float = 5.0  # global norm
    min_token_freq: int = 2
    seed: int = 0
    model: DrawerConfig = field(default_factory=DrawerConfig)

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["model"] = self.model.to_json()
        return out

    @classmethod
    def from_json(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        d["model"] = DrawerConfig.from_json(d["model"])
        return cls(**d)


def examples_from_transcripts(
    transcripts: Iterable[DialogTranscript], vocab: Vocabulary
) -> list[TrainingExample]:
    """One example per round: message, canvas the drawer saw, pieces added.

    Rounds whose action removed pieces supervise presence negatively only
    (empty add target); the network can only add.
    """
    examples = []
    for t in transcripts:
        canvas_before = Scene()
        for r in t.rounds:
            before = canvas_before
            added = () if r.removed else r.added
            examples.append(
                TrainingExample.build(vocab, r.teller_tokens, before, added)
            )
            canvas_before = r.canvas_after
    return examples


def build_vocabulary(
    transcripts: Iterable[DialogTranscript], min_freq: int = 2
) -> Vocabulary:
    return Vocabulary.build(
        (r.teller_tokens for t in transcripts for r in t.rounds), min_freq=min_freq
    )


@dataclass
class EpochLog:
    epoch: int
    mean_loss: float
    learning_rate: float
    seconds: float
    extra: dict = field(default_factory=dict)


def train_drawer(
    transcripts: Sequence[DialogTranscript],
    partition: str,
    config: TrainConfig = TrainConfig(),
    allow_any_partition: bool = False,
    data_fingerprint: str = "",
    epoch_hook: Callable[[DrawerParams, EpochLog], dict | None] | None = None,
) -> tuple[DrawerParams, Vocabulary, AgentManifest, list[EpochLog]]:
    """Train on one partition's transcripts; returns params + provenance.

    ``epoch_hook`` runs after each epoch (e.g. dev-set scoring); whatever
    dict it returns is recorded in that epoch's log.
    """
    if partition != DRAWER_PARTITION and not allow_any_partition:
        raise ValueError(
            f"drawer training expects partition {DRAWER_PARTITION!r}, got "
            f"{partition!r}; pass allow_any_partition=True to override"
        )
    vocab = build_vocabulary(transcripts, min_freq=config.min_token_freq)
    examples = examples_from_transcripts(transcripts, vocab)
    params = init_params(len(vocab), config.model, seed=config.seed)
    blocks = params.blocks()
    velocity = {name: np.zeros_like(arr) for name, arr in blocks.items()}
    rng = np.random.default_rng(config.seed + 1)

    logs: list[EpochLog] = []
    lr = config.learning_rate
    for epoch in range(config.epochs):
        t0 = time.time()
        order = rng.permutation(len(examples))
        total = 0.0
        batches = 0
        for start in range(0, len(order), config.batch_size):
            batch = [examples[i] for i in order[start : start + config.batch_size]]
            loss, grads = batch_loss(batch, params, config.model)
            total += loss
            batches += 1
            grad_blocks = grads.blocks()
            norm = np.sqrt(
                sum(float((g * g).sum()) for g in grad_blocks.values())
            )
            scale = 1.0 if norm <= config.grad_clip else config.grad_clip / norm
            for name, grad in grad_blocks.items():
                v = velocity[name]
                v *= config.momentum
                v -= lr * scale * grad
                blocks[name] += v
        log = EpochLog(
            epoch=epoch,
            mean_loss=total / max(1, batches),
            learning_rate=lr,
            seconds=time.time() - t0,
        )
        if epoch_hook is not None:
            log.extra = epoch_hook(params, log) or {}
        logs.append(log)
        lr *= config.lr_decay

    manifest = AgentManifest(
        agent_kind="neural_drawer",
        trained_on=partition,
        data_fingerprint=data_fingerprint,
    )
    return params, vocab, manifest, logs


def save_checkpoint(
    path: str | Path,
    params: DrawerParams,
    vocab: Vocabulary,
    config: TrainConfig,
    manifest: AgentManifest,
) -> Path:
    path = Path(path)
    if path.suffix != ".npz":
        path = path.with_suffix(".npz")
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format": "telldraw-drawer-checkpoint/1",
        "manifest": manifest.__dict__,
        "config": config.to_json(),
        "vocab": vocab.to_json(),
    }
    arrays = {f"param_{k}": v for k, v in params.blocks().items()}
    np.savez(path, header=np.frombuffer(json.dumps(header).encode(), dtype=np.uint8),
             **arrays)
    return path


def load_checkpoint(path: str | Path):
    with np.load(path) as data:
        header = json.loads(bytes(data["header"]).decode())
        if header.get("format") != "telldraw-drawer-checkpoint/1":
            raise ValueError(f"{path}: not a drawer checkpoint")
        params = DrawerParams(
            **{name: data[f"param_{name}"] for name in PARAM_BLOCKS}
        )
    vocab = Vocabulary.from_json(header["vocab"])
    config = TrainConfig.from_json(header["config"])
    manifest = AgentManifest(**header["manifest"])
    return params, vocab, config, manifest
