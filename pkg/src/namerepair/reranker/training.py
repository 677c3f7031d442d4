"""Reranker training: pair mining, Adam optimization, divergence handling.

Training is single-threaded and fully seeded: parameter initialization, pair
shuffling, and context-token dropout all derive from the config seed, so a
rerun with the same seed reproduces the final parameters bit for bit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from ..identifiers import Candidate, split_subtokens
from ..mining.masking import MaskedExample
from .loss import Gradients, TrainingPair, infonce_loss
from .model import DualEncoderModel, ScoringConfig
from .schedule import TrainConfig, lr_at_step
from .vocab import SubtokenVocab
from .window import context_tokens

__all__ = ["MiningReport", "TrainingDivergedError", "mine_training_pairs", "train_reranker"]

logger = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; carries the last healthy step for diagnosis."""

    def __init__(self, step: int, last_good_loss: float | None):
        self.step = step
        self.last_good_loss = last_good_loss
        detail = f"last good loss {last_good_loss:.6f}" if last_good_loss is not None else "no prior step"
        super().__init__(f"training diverged at step {step} ({detail})")


@dataclass
class MiningReport:
    pairs: int = 0
    skipped_empty: int = 0
    skipped_error: int = 0
    zero_negative_pairs: int = 0

    def as_dict(self) -> dict:
        return {
            "pairs": self.pairs,
            "skipped_empty": self.skipped_empty,
            "skipped_error": self.skipped_error,
            "zero_negative_pairs": self.zero_negative_pairs,
        }


def mine_training_pairs(
    examples: Iterable[MaskedExample],
    candidate_source: Callable[[MaskedExample], list[Candidate]],
    k: int,
    context_window: int = ScoringConfig.context_window,
) -> tuple[list[TrainingPair], MiningReport]:
    """Build contrastive pairs: gold positive vs generated negatives.

    Candidates equal to the gold name (case-insensitively) are removed from
    the negatives. Examples with an empty candidate list yield no pair;
    source failures skip the example and are counted. Pairs with zero
    negatives are kept but flagged in the report.
    """
    pairs: list[TrainingPair] = []
    report = MiningReport()
    for example in examples:
        try:
            candidates = candidate_source(example)
        except Exception:
            report.skipped_error += 1
            logger.warning("candidate source failed for %s", example.id, exc_info=True)
            continue
        if not candidates:
            report.skipped_empty += 1
            continue
        gold = example.gold
        negatives = tuple(
            c.name for c in candidates[:k] if c.name.lower() != gold.lower()
        )
        if not negatives:
            report.zero_negative_pairs += 1
        pairs.append(
            TrainingPair(
                example_id=example.id,
                context=tuple(context_tokens(example, context_window)),
                positive=gold,
                negatives=negatives,
            )
        )
        report.pairs += 1
    return pairs, report


def build_vocab(pairs: list[TrainingPair], min_count: int = 1) -> SubtokenVocab:
    """Vocabulary over context tokens and name subtokens of the pairs."""

    def streams():
        for pair in pairs:
            yield pair.context
            yield split_subtokens(pair.positive)
            for negative in pair.negatives:
                yield split_subtokens(negative)

    return SubtokenVocab.build(streams(), min_count=min_count)


@dataclass
class _AdamState:
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    m_tau: float = 0.0
    v_tau: float = 0.0


def train_reranker(
    pairs: list[TrainingPair],
    cfg: TrainConfig,
    dim: int = 64,
    scoring: ScoringConfig | None = None,
    vocab: SubtokenVocab | None = None,
) -> tuple[DualEncoderModel, list[dict]]:
    """Train a dual encoder on mined pairs; returns (model, per-step log).

    Each log entry is ``{"step": int, "lr": float, "loss": float}``.

    Raises:
        TrainingDivergedError: on a non-finite batch loss.
    """
    if not pairs:
        raise ValueError("training requires at least one pair")
    if vocab is None:
        vocab = build_vocab(pairs)
    model = DualEncoderModel.initialize(vocab, dim=dim, seed=cfg.seed, scoring=scoring)
    if cfg.steps == 0:
        return model, []

    rng = np.random.RandomState(cfg.seed)
    params = [model.code_embeddings, model.name_embeddings, model.code_projection, model.name_projection]
    state = _AdamState(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params])

    order = rng.permutation(len(pairs))
    cursor = 0
    log: list[dict] = []
    last_good: float | None = None

    for step in range(1, cfg.steps + 1):
        grads = Gradients.zeros_like(model)
        batch_loss = 0.0
        batch = []
        for _ in range(cfg.batch_size):
            if cursor >= len(order):
                order = rng.permutation(len(pairs))
                cursor = 0
            batch.append(pairs[int(order[cursor])])
            cursor += 1
        for pair in batch:
            effective = pair
            if cfg.in_batch_negatives:
                extra = tuple(
                    other.positive
                    for other in batch
                    if other is not pair
                    and other.positive != pair.positive
                    and other.positive not in pair.negatives
                )
                effective = TrainingPair(
                    example_id=pair.example_id,
                    context=pair.context,
                    positive=pair.positive,
                    negatives=pair.negatives + extra,
                )
            keep = None
            if cfg.dropout_rate > 0.0:
                keep = (rng.random_sample(len(effective.context)) >= cfg.dropout_rate).tolist()
            loss, _ = infonce_loss(model, effective, context_keep=keep, accumulate_into=grads)
            batch_loss += loss
        batch_loss /= len(batch)
        grads.scale_(1.0 / len(batch))

        if not np.isfinite(batch_loss):
            raise TrainingDivergedError(step, last_good)

        lr = lr_at_step(step, cfg)
        _adam_update(model, grads, state, step, lr)
        log.append({"step": step, "lr": lr, "loss": batch_loss})
        last_good = batch_loss

    return model, log


def _adam_update(model: DualEncoderModel, grads: Gradients, state: _AdamState, step: int, lr: float) -> None:
    grad_arrays = [grads.code_embeddings, grads.name_embeddings, grads.code_projection, grads.name_projection]
    params = [model.code_embeddings, model.name_embeddings, model.code_projection, model.name_projection]
    bias1 = 1.0 - ADAM_BETA1**step
    bias2 = 1.0 - ADAM_BETA2**step
    for param, grad, m, v in zip(params, grad_arrays, state.m, state.v):
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * grad
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * np.square(grad)
        param -= lr * (m / bias1) / (np.sqrt(v / bias2) + ADAM_EPS)
    state.m_tau = ADAM_BETA1 * state.m_tau + (1.0 - ADAM_BETA1) * grads.log_tau
    state.v_tau = ADAM_BETA2 * state.v_tau + (1.0 - ADAM_BETA2) * grads.log_tau**2
    model.log_tau -= lr * (state.m_tau / bias1) / ((state.v_tau / bias2) ** 0.5 + ADAM_EPS)
