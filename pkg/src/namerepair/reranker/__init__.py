"""Dual-encoder candidate reranker: scoring, training, persistence."""

from .loss import Gradients, TrainingPair, infonce_loss
from .model import (
    DualEncoderModel,
    ModelLoadError,
    ScoringConfig,
    adjusted_score,
    encode_context,
    encode_name,
    load_model,
    rerank,
    save_model,
    score,
)
from .schedule import TrainConfig, lr_at_step
from .training import (
    MiningReport,
    TrainingDivergedError,
    build_vocab,
    mine_training_pairs,
    train_reranker,
)
from .vocab import MASK_TOKEN, PAD_TOKEN, UNK_TOKEN, SubtokenVocab
from .window import context_tokens, extract_context_window, in_scope_names

__all__ = [
    "DualEncoderModel",
    "Gradients",
    "MASK_TOKEN",
    "MiningReport",
    "ModelLoadError",
    "PAD_TOKEN",
    "ScoringConfig",
    "SubtokenVocab",
    "TrainConfig",
    "TrainingDivergedError",
    "TrainingPair",
    "UNK_TOKEN",
    "adjusted_score",
    "build_vocab",
    "context_tokens",
    "encode_context",
    "encode_name",
    "extract_context_window",
    "in_scope_names",
    "infonce_loss",
    "load_model",
    "lr_at_step",
    "mine_training_pairs",
    "rerank",
    "save_model",
    "score",
    "train_reranker",
]
