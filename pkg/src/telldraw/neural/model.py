"""The drawing network: message encoder + feed-forward action head.

The head consumes the 2552-entry canvas vector and the bidirectional
encoding of the last teller message:

    action = W_out . relu(W_canvas . canvas + W_msg . message + b_in) + b_out

The action vector packs one 20-wide slot per clip-art type: a presence
logit, mutually exclusive logit groups for flip (2), size (3), pose (7) and
expression (5), and the predicted x, y position. Presence probabilities come
from the sigmoid, group probabilities from per-group softmax. Training
minimizes presence binary cross-entropy over all 58 types, attribute
cross-entropies and squared position error for the pieces the human added.

Everything here is plain numpy with hand-derived gradients; the tests check
every parameter block against central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..cliparts import DrawerAction, Flip, N_TYPES, Piece, Scene, Size, is_human
from ..features import CANVAS_VECTOR_SIZE, canvas_vector
from .lstm import lstm_backward, lstm_forward, lstm_init
from .vocab import Vocabulary

SLOT = 20  # presence + 2 flip + 3 size + 7 pose + 5 expr + x + y
ACTION_SIZE = N_TYPES * SLOT
PRESENCE, FLIP_LO, FLIP_HI = 0, 1, 3
SIZE_LO, SIZE_HI = 3, 6
POSE_LO, POSE_HI = 6, 13
EXPR_LO, EXPR_HI = 13, 18
POS_X, POS_Y = 18, 19


@dataclass
class DrawerConfig:
    embedding_size: int = 64
    hidden_size: int = 128
    presence_weight: float = 1.0
    attribute_weight: float = 1.0
    position_weight: float = 1.0

    def to_json(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_json(cls, d: dict) -> "DrawerConfig":
        return cls(**d)


PARAM_BLOCKS = ("embeddings", "fwd", "bwd", "w_canvas", "w_msg", "b_in",
                "w_out", "b_out")


@dataclass
class DrawerParams:
    """All trainable arrays, keyed by block name."""

    embeddings: np.ndarray
    fwd: np.ndarray
    bwd: np.ndarray
    w_canvas: np.ndarray
    w_msg: np.ndarray
    b_in: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray

    def blocks(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_BLOCKS}

    def copy(self) -> "DrawerParams":
        return DrawerParams(**{k: v.copy() for k, v in self.blocks().items()})


def init_params(
    vocab_size: int, config: DrawerConfig, seed: int
) -> DrawerParams:
    """Uniform fan-in-scaled init, fully determined by the seed."""
    rng = np.random.default_rng(seed)
    e, h = config.embedding_size, config.hidden_size

    def uniform(rows, cols, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=(rows, cols))

    return DrawerParams(
        embeddings=uniform(vocab_size, e, e),
        fwd=lstm_init(e, h, rng),
        bwd=lstm_init(e, h, rng),
        w_canvas=uniform(h, CANVAS_VECTOR_SIZE, CANVAS_VECTOR_SIZE),
        w_msg=uniform(h, 2 * h, 2 * h),
        b_in=np.zeros(h),
        w_out=uniform(ACTION_SIZE, h, h),
        b_out=np.zeros(ACTION_SIZE),
    )


def _pad_batch(token_ids: list[np.ndarray], pad_id: int):
    steps = max(len(t) for t in token_ids)
    batch = len(token_ids)
    ids = np.full((steps, batch), pad_id, dtype=np.int64)
    mask = np.zeros((steps, batch))
    for b, seq in enumerate(token_ids):
        ids[: len(seq), b] = seq
        mask[: len(seq), b] = 1.0
    return ids, mask


def encode_messages(token_ids: list[np.ndarray], params: DrawerParams):
    """Bidirectional encoding: concatenated final states of a forward pass
    and a pass over the reversed tokens. Returns (v_msg (B, 2H), cache)."""
    ids, mask = _pad_batch(token_ids, pad_id=0)
    x = params.embeddings[ids]
    # reversal is per-sequence: valid tokens flip, padding stays at the tail
    rev_ids = np.empty_like(ids)
    for b, seq in enumerate(token_ids):
        n = len(seq)
        rev_ids[:n, b] = seq[::-1]
        rev_ids[n:, b] = 0
    x_rev = params.embeddings[rev_ids]
    h_fwd, cache_fwd = lstm_forward(x, mask, params.fwd)
    h_bwd, cache_bwd = lstm_forward(x_rev, mask, params.bwd)
    v_msg = np.concatenate([h_fwd, h_bwd], axis=1)
    return v_msg, (ids, rev_ids, mask, cache_fwd, cache_bwd)


def encode_messages_backward(d_v_msg: np.ndarray, cache, params: DrawerParams):
    ids, rev_ids, mask, cache_fwd, cache_bwd = cache
    hidden = params.fwd.shape[1] // 4
    d_x_fwd, d_w_fwd = lstm_backward(d_v_msg[:, :hidden], cache_fwd)
    d_x_bwd, d_w_bwd = lstm_backward(d_v_msg[:, hidden:], cache_bwd)
    d_emb = np.zeros_like(params.embeddings)
    steps, batch, _ = d_x_fwd.shape
    flat_fwd = d_x_fwd.reshape(steps * batch, -1)
    flat_bwd = d_x_bwd.reshape(steps * batch, -1)
    np.add.at(d_emb, ids.reshape(-1), flat_fwd)
    np.add.at(d_emb, rev_ids.reshape(-1), flat_bwd)
    # masked steps carry exactly zero gradient, so the pad row stays zero
    return d_emb, d_w_fwd, d_w_bwd


def head_forward(canvas_vecs: np.ndarray, v_msg: np.ndarray, params: DrawerParams):
    pre = canvas_vecs @ params.w_canvas.T + v_msg @ params.w_msg.T + params.b_in
    hidden = np.maximum(pre, 0.0)
    logits = hidden @ params.w_out.T + params.b_out
    return logits, (canvas_vecs, v_msg, pre, hidden)


def head_backward(d_logits: np.ndarray, cache, params: DrawerParams):
    canvas_vecs, v_msg, pre, hidden = cache
    d_w_out = d_logits.T @ hidden
    d_b_out = d_logits.sum(axis=0)
    d_hidden = d_logits @ params.w_out
    d_pre = d_hidden * (pre > 0.0)
    d_w_canvas = d_pre.T @ canvas_vecs
    d_w_msg = d_pre.T @ v_msg
    d_b_in = d_pre.sum(axis=0)
    d_v_msg = d_pre @ params.w_msg
    return d_w_canvas, d_w_msg, d_b_in, d_w_out, d_b_out, d_v_msg


def drawer_forward(
    canvas_vecs: np.ndarray, token_ids: list[np.ndarray], params: DrawerParams
):
    """Full forward pass: (B, 2552) canvases + token id lists -> (B, 1160)."""
    if canvas_vecs.shape[-1] != CANVAS_VECTOR_SIZE:
        raise ValueError(
            f"canvas vector width {canvas_vecs.shape[-1]} != {CANVAS_VECTOR_SIZE}"
        )
    v_msg, msg_cache = encode_messages(token_ids, params)
    logits, head_cache = head_forward(canvas_vecs, v_msg, params)
    return logits, (msg_cache, head_cache)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log_sigmoid(z):
    return np.where(z >= 0, -np.log1p(np.exp(-np.abs(z))),
                    z - np.log1p(np.exp(-np.abs(z))))


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class ActionLogits:
    """One example's action vector, sliced per type for inspection."""

    vector: np.ndarray

    def slot(self, type_id: int) -> np.ndarray:
        return self.vector[type_id * SLOT : (type_id + 1) * SLOT]

    def presence_probability(self, type_id: int) -> float:
        return float(_sigmoid(self.slot(type_id)[PRESENCE : PRESENCE + 1])[0])

    def group_probabilities(self, type_id: int, lo: int, hi: int) -> np.ndarray:
        return _softmax(self.slot(type_id)[lo:hi])

    def position(self, type_id: int) -> tuple[float, float]:
        s = self.slot(type_id)
        return float(s[POS_X]), float(s[POS_Y])


def greedy_decode(logits: ActionLogits, canvas: Scene) -> DrawerAction:
    """Add every absent type whose presence probability strictly exceeds
    0.5, at its predicted position with argmax attributes."""
    adds = []
    for type_id in range(N_TYPES):
        if type_id in canvas:
            continue  # never re-add a type already on the canvas
        if logits.presence_probability(type_id) <= 0.5:
            continue
        slot = logits.slot(type_id)
        x, y = logits.position(type_id)
        adds.append(
            Piece(
                type_id=type_id,
                flip=Flip(int(np.argmax(slot[FLIP_LO:FLIP_HI]))),
                size=Size(int(np.argmax(slot[SIZE_LO:SIZE_HI]))),
                x=float(np.clip(x, -0.5, 1.5)),
                y=float(np.clip(y, -0.5, 1.5)),
                pose=int(np.argmax(slot[POSE_LO:POSE_HI])) if is_human(type_id) else None,
                expression=(
                    int(np.argmax(slot[EXPR_LO:EXPR_HI])) if is_human(type_id) else None
                ),
            )
        )
    return DrawerAction(adds=tuple(adds))


@dataclass(frozen=True)
class TrainingExample:
    """One round as the drawer saw it: message, canvas before, pieces added."""

    token_ids: np.ndarray
    canvas_before: Scene
    added: tuple[Piece, ...]
    canvas_vec: np.ndarray | None = field(repr=False, default=None)

    @classmethod
    def build(cls, vocab: Vocabulary, tokens, canvas_before: Scene, added=()):
        return cls(
            token_ids=vocab.encode(tuple(tokens)),
            canvas_before=canvas_before,
            added=tuple(added),
            canvas_vec=canvas_vector(canvas_before),
        )


def drawer_loss_and_grad(
    logits: np.ndarray, examples: list[TrainingExample], config: DrawerConfig
):
    """Mean per-example loss over the batch and its gradient w.r.t. logits.

    Per example: presence BCE over all 58 types, plus cross-entropy for each
    attribute group and squared position error for each added piece. Types
    neither added nor supervised contribute only their presence term.
    """
    batch = logits.shape[0]
    mat = logits.reshape(batch, N_TYPES, SLOT)
    d_mat = np.zeros_like(mat)

    presence_logits = mat[:, :, PRESENCE]
    targets = np.zeros((batch, N_TYPES))
    for b, ex in enumerate(examples):
        for p in ex.added:
            targets[b, p.type_id] = 1.0
    # stable BCE-with-logits, summed over types
    bce = np.maximum(presence_logits, 0) - presence_logits * targets + np.log1p(
        np.exp(-np.abs(presence_logits))
    )
    loss = config.presence_weight * bce.sum()
    d_mat[:, :, PRESENCE] = config.presence_weight * (
        _sigmoid(presence_logits) - targets
    )

    for b, ex in enumerate(examples):
        for p in ex.added:
            slot = mat[b, p.type_id]
            d_slot = d_mat[b, p.type_id]
            groups = [(FLIP_LO, FLIP_HI, int(p.flip)), (SIZE_LO, SIZE_HI, int(p.size))]
            if p.is_human and p.pose is not None and p.expression is not None:
                groups.append((POSE_LO, POSE_HI, p.pose))
                groups.append((EXPR_LO, EXPR_HI, p.expression))
            for lo, hi, target in groups:
                z = slot[lo:hi]
                z_shift = z - z.max()
                log_probs = z_shift - np.log(np.exp(z_shift).sum())
                loss += -config.attribute_weight * log_probs[target]
                grad = np.exp(log_probs)
                grad[target] -= 1.0
                d_slot[lo:hi] += config.attribute_weight * grad
            dx = slot[POS_X] - p.x
            dy = slot[POS_Y] - p.y
            loss += config.position_weight * (dx * dx + dy * dy)
            d_slot[POS_X] += config.position_weight * 2.0 * dx
            d_slot[POS_Y] += config.position_weight * 2.0 * dy

    return loss / batch, d_mat.reshape(batch, ACTION_SIZE) / batch


def batch_loss(
    examples: list[TrainingExample], params: DrawerParams, config: DrawerConfig
):
    """Loss plus gradients for every parameter block."""
    canvas_vecs = np.stack([ex.canvas_vec for ex in examples])
    token_ids = [ex.token_ids for ex in examples]
    logits, (msg_cache, head_cache) = drawer_forward(canvas_vecs, token_ids, params)
    loss, d_logits = drawer_loss_and_grad(logits, examples, config)
    d_w_canvas, d_w_msg, d_b_in, d_w_out, d_b_out, d_v_msg = head_backward(
        d_logits, head_cache, params
    )
    d_emb, d_w_fwd, d_w_bwd = encode_messages_backward(d_v_msg, msg_cache, params)
    grads = DrawerParams(
        embeddings=d_emb,
        fwd=d_w_fwd,
        bwd=d_w_bwd,
        w_canvas=d_w_canvas,
        w_msg=d_w_msg,
        b_in=d_b_in,
        w_out=d_w_out,
        b_out=d_b_out,
    )
    return loss, grads
