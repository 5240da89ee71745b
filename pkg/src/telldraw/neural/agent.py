"""The trained network as a drawer agent."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..agents import AgentManifest, DrawerAgent
from ..cliparts import DrawerAction, Scene
from ..features import canvas_vector
from .model import ActionLogits, DrawerParams, drawer_forward, greedy_decode
from .train import load_checkpoint
from .vocab import Vocabulary


class NeuralDrawer(DrawerAgent):
    reply = "ok"

    def __init__(self, params: DrawerParams, vocab: Vocabulary, manifest: AgentManifest):
        self.params = params
        self.vocab = vocab
        self.manifest = manifest

    @classmethod
    def from_checkpoint(cls, path: str | Path) -> "NeuralDrawer":
        params, vocab, _config, manifest = load_checkpoint(path)
        return cls(params, vocab, manifest)

    def logits_for(self, message: str, canvas: Scene) -> ActionLogits:
        token_ids = self.vocab.encode(message.split(" ") if message else [])
        vec = canvas_vector(canvas)[None, :]
        logits, _cache = drawer_forward(vec, [token_ids], self.params)
        return ActionLogits(vector=logits[0])

    def act(self, message: str, canvas: Scene) -> tuple[DrawerAction, str]:
        return greedy_decode(self.logits_for(message, canvas), canvas), self.reply
