"""Scene similarity: the 0-5 score used everywhere scenes are compared.

The score combines a unary term (per-piece attribute agreement for types the
two scenes share, normalized by the size of the type union) and a pairwise
term (relative left/right and above/below ordering of shared pieces). With
the default weights a perfect reconstruction scores exactly 5, a disjoint or
empty reconstruction scores 0.

Two denominator guards that the formula itself leaves open:

* fewer than two shared types means there are no pairs; the pairwise term is
  defined as 0 rather than dividing by zero, and
* two empty scenes count as a perfect reconstruction (score 5, IOU 1).

Scores are reported raw, never clamped: adversarial inputs (many order
inversions, or pieces far off canvas) can push the score slightly below 0,
and the breakdown keeps that auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cliparts import Piece, Scene

W_PERFECT = 5.0


@dataclass(frozen=True)
class SimilarityWeights:
    """The eight nonnegative weights of the score.

    ``w0`` is the per-piece credit; ``w1``..``w5`` are the unary penalties
    (flip, expression, pose, size, Euclidean distance); ``w6``/``w7`` the
    pairwise x/y order penalties.
    """

    w0: float = 5.0
    w1: float = 1.0
    w2: float = 0.5
    w3: float = 0.5
    w4: float = 1.0
    w5: float = 1.0
    w6: float = 1.0
    w7: float = 1.0

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if value < 0:
                raise ValueError(f"{name} must be nonnegative, got {value}")

    def as_dict(self) -> dict[str, float]:
        return {f"w{i}": getattr(self, f"w{i}") for i in range(8)}

    @classmethod
    def from_list(cls, values) -> "SimilarityWeights":
        if len(values) != 8:
            raise ValueError("expected 8 weights")
        return cls(*[float(v) for v in values])


DEFAULT_WEIGHTS = SimilarityWeights()


@dataclass(frozen=True)
class SimilarityBreakdown:
    """Score plus the pieces it was assembled from."""

    score: float
    n_int: int
    n_union: int
    unary_total: float
    pairwise_total: float
    per_type_unary: dict[int, float] = field(default_factory=dict)


def iou(truth: Scene, pred: Scene) -> float:
    """Intersection over union of the clip-art type sets; 1 when both empty."""
    union = truth.ids() | pred.ids()
    if not union:
        return 1.0
    return len(truth.ids() & pred.ids()) / len(union)


def piece_similarity(
    c: Piece, c_hat: Piece, w: SimilarityWeights = DEFAULT_WEIGHTS
) -> float:
    """Attribute agreement for one shared type: credit w0 minus penalties.

    Penalties: wrong facing direction (w1), wrong expression (w2) and wrong
    pose (w3) for the human types, wrong size (w4), and w5 times the
    Euclidean distance between the normalized positions.
    """
    if c.type_id != c_hat.type_id:
        raise ValueError(
            f"piece types differ: {c.type_id} vs {c_hat.type_id}"
        )
    g = w.w0
    if c.flip != c_hat.flip:
        g -= w.w1
    if c.is_human:
        if c.expression != c_hat.expression:
            g -= w.w2
        if c.pose != c_hat.pose:
            g -= w.w3
    if c.size != c_hat.size:
        g -= w.w4
    g -= w.w5 * math.hypot(c_hat.x - c.x, c_hat.y - c.y)
    return g


def pair_order_penalty(
    c_i: Piece,
    c_j: Piece,
    c_hat_i: Piece,
    c_hat_j: Piece,
    w: SimilarityWeights = DEFAULT_WEIGHTS,
) -> float:
    """Penalty (<= 0) when the predicted pair disagrees on x or y order.

    A coordinate tie on either side makes the sign product zero, which is
    not strictly negative, so ties are never penalized.
    """
    penalty = 0.0
    if (c_hat_i.x - c_hat_j.x) * (c_i.x - c_j.x) < 0:
        penalty -= w.w6
    if (c_hat_i.y - c_hat_j.y) * (c_i.y - c_j.y) < 0:
        penalty -= w.w7
    return penalty


def scene_similarity(
    truth: Scene, pred: Scene, w: SimilarityWeights = DEFAULT_WEIGHTS
) -> SimilarityBreakdown:
    """Full score with its unary/pairwise decomposition.

    ``score = sum_i g_i / n_union + sum_{i<j} h_ij / (n_union * (n_int - 1))``
    over shared types i, j; the pairwise term is 0 when fewer than two types
    are shared.
    """
    truth_ids = truth.ids()
    pred_ids = pred.ids()
    shared = sorted(truth_ids & pred_ids)
    n_int = len(shared)
    n_union = len(truth_ids | pred_ids)

    if n_union == 0:
        # Vacuous perfection: nothing to draw, nothing drawn.
        return SimilarityBreakdown(
            score=W_PERFECT, n_int=0, n_union=0,
            unary_total=W_PERFECT, pairwise_total=0.0,
        )

    per_type = {i: piece_similarity(truth[i], pred[i], w) for i in shared}
    unary = sum(per_type.values()) / n_union

    pairwise = 0.0
    if n_int >= 2:
        total = 0.0
        for a in range(n_int):
            for b in range(a + 1, n_int):
                i, j = shared[a], shared[b]
                total += pair_order_penalty(truth[i], truth[j], pred[i], pred[j], w)
        pairwise = total / (n_union * (n_int - 1))

    return SimilarityBreakdown(
        score=unary + pairwise,
        n_int=n_int,
        n_union=n_union,
        unary_total=unary,
        pairwise_total=pairwise,
        per_type_unary=per_type,
    )


def similarity_score(
    truth: Scene, pred: Scene, w: SimilarityWeights = DEFAULT_WEIGHTS
) -> float:
    """Just the score, when the breakdown is not needed."""
    return scene_similarity(truth, pred, w).score


class PieceColumns:
    """A set of same-type pieces unpacked into arrays for batch scoring."""

    def __init__(self, pieces):
        pieces = list(pieces)
        types = {p.type_id for p in pieces}
        if len(types) > 1:
            raise ValueError(f"pieces span multiple types: {sorted(types)}")
        self.type_id = pieces[0].type_id if pieces else None
        self.flip = np.array([int(p.flip) for p in pieces])
        self.size = np.array([int(p.size) for p in pieces])
        self.pose = np.array([-1 if p.pose is None else p.pose for p in pieces])
        self.expression = np.array(
            [-1 if p.expression is None else p.expression for p in pieces]
        )
        self.x = np.array([p.x for p in pieces])
        self.y = np.array([p.y for p in pieces])

    def __len__(self) -> int:
        return len(self.flip)


def batch_piece_similarity(
    c: Piece, candidates: PieceColumns, w: SimilarityWeights = DEFAULT_WEIGHTS
):
    """:func:`piece_similarity` of one piece against a column batch.

    Exactly the scalar formula, vectorized; retrieval agents use this so
    their argmax is this module's scoring, not a private variant.
    """
    if candidates.type_id is not None and candidates.type_id != c.type_id:
        raise ValueError(
            f"piece types differ: {c.type_id} vs {candidates.type_id}"
        )
    g = np.full(len(candidates), w.w0)
    g -= w.w1 * (candidates.flip != int(c.flip))
    if c.is_human:
        c_expr = -1 if c.expression is None else c.expression
        c_pose = -1 if c.pose is None else c.pose
        g -= w.w2 * (candidates.expression != c_expr)
        g -= w.w3 * (candidates.pose != c_pose)
    g -= w.w4 * (candidates.size != int(c.size))
    g -= w.w5 * np.hypot(candidates.x - c.x, candidates.y - c.y)
    return g
