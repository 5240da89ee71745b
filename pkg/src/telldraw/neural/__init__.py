"""Neural drawer: numpy BiLSTM encoder + feed-forward action head."""

from .agent import NeuralDrawer
from .model import (
    ActionLogits,
    DrawerConfig,
    DrawerParams,
    TrainingExample,
    batch_loss,
    drawer_forward,
    drawer_loss_and_grad,
    greedy_decode,
    init_params,
)
from .train import (
    TrainConfig,
    build_vocabulary,
    examples_from_transcripts,
    load_checkpoint,
    save_checkpoint,
    train_drawer,
)
from .vocab import Vocabulary

__all__ = [
    "ActionLogits",
    "DrawerConfig",
    "DrawerParams",
    "NeuralDrawer",
    "TrainConfig",
    "TrainingExample",
    "Vocabulary",
    "batch_loss",
    "build_vocabulary",
    "drawer_forward",
    "drawer_loss_and_grad",
    "examples_from_transcripts",
    "greedy_decode",
    "init_params",
    "load_checkpoint",
    "save_checkpoint",
    "train_drawer",
]
