"""Collaborative clip-art drawing game: data model, metric, agents, evaluation.

Subsystems:

* ``cliparts`` / ``features`` - pieces, scenes, canvas edits, feature encoding
* ``metric`` - the 0-5 scene similarity score
* ``transcript`` / ``importer`` / ``simulate`` - corpus records, JSONL store,
  release import, simulated release generation
* ``stats`` / ``splits`` - corpus statistics and crosstalk partitioning
* ``engine`` - the turn-based game state machine and transcript replay
* ``agents`` / ``editdist`` / ``neural`` - scripted, retrieval, and neural players
* ``harness`` - script-based and paired evaluation with crosstalk enforcement
* ``service`` - live play server (JSON over websocket)
* ``cli`` - the ``telldraw`` command
"""

from .cliparts import (
    DrawerAction,
    Flip,
    LIBRARY,
    Piece,
    Scene,
    Size,
    apply_action,
    validate_scene,
)
from .metric import (
    DEFAULT_WEIGHTS,
    SimilarityBreakdown,
    SimilarityWeights,
    iou,
    scene_similarity,
    similarity_score,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_WEIGHTS",
    "DrawerAction",
    "Flip",
    "LIBRARY",
    "Piece",
    "Scene",
    "SimilarityBreakdown",
    "SimilarityWeights",
    "Size",
    "apply_action",
    "iou",
    "scene_similarity",
    "similarity_score",
    "validate_scene",
    "__version__",
]
