"""Contrastive InfoNCE loss with exact analytic gradients.

For one training pair the positive name competes against the mined negatives
in a softmax over temperature-scaled cosine scores; the loss is the negative
log-probability of the positive. Gradients are derived by hand through the
mean-pool, projection, L2-normalization, and temperature, and are validated
against central finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..identifiers import split_subtokens
from .model import DualEncoderModel

__all__ = ["Gradients", "TrainingPair", "infonce_loss"]


@dataclass(frozen=True)
class TrainingPair:
    """One contrastive example: a context window, the gold name, negatives."""

    example_id: str
    context: tuple[str, ...]
    positive: str
    negatives: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.context:
            raise ValueError("training pair needs a non-empty context window")
        if self.positive in self.negatives:
            raise ValueError("positive name must not appear among negatives")


@dataclass
class Gradients:
    """Dense gradients matching the model's parameter shapes."""

    code_embeddings: np.ndarray
    name_embeddings: np.ndarray
    code_projection: np.ndarray
    name_projection: np.ndarray
    log_tau: float

    @classmethod
    def zeros_like(cls, model: DualEncoderModel) -> Gradients:
        return cls(
            code_embeddings=np.zeros_like(model.code_embeddings),
            name_embeddings=np.zeros_like(model.name_embeddings),
            code_projection=np.zeros_like(model.code_projection),
            name_projection=np.zeros_like(model.name_projection),
            log_tau=0.0,
        )

    def add_(self, other: Gradients) -> None:
        self.code_embeddings += other.code_embeddings
        self.name_embeddings += other.name_embeddings
        self.code_projection += other.code_projection
        self.name_projection += other.name_projection
        self.log_tau += other.log_tau

    def scale_(self, factor: float) -> None:
        self.code_embeddings *= factor
        self.name_embeddings *= factor
        self.code_projection *= factor
        self.name_projection *= factor
        self.log_tau *= factor


def _normalize_rows(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(mat, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("encoder produced a zero vector")
    return mat / norms[:, None], norms


def infonce_loss(
    model: DualEncoderModel,
    pair: TrainingPair,
    context_keep: list[bool] | None = None,
    accumulate_into: Gradients | None = None,
) -> tuple[float, Gradients]:
    """Loss and gradients for one pair.

    ``context_keep`` is the training-time dropout mask over context tokens
    (True keeps a token); when it would drop everything, all tokens are kept.
    ``accumulate_into`` adds this pair's gradients into an existing buffer
    instead of allocating a fresh one (mini-batch accumulation).
    """
    tokens = list(pair.context)
    if context_keep is not None:
        kept = [t for t, keep in zip(tokens, context_keep) if keep]
        tokens = kept if kept else tokens

    vocab = model.vocab
    ctx_ids = vocab.ids(tokens)
    names = [pair.positive, *pair.negatives]
    name_ids = [vocab.ids(split_subtokens(n)) for n in names]
    m = len(names)
    tau = model.tau

    # Forward: mean pool -> projection -> L2 normalize, each side.
    e_ctx = model.code_embeddings[ctx_ids].mean(axis=0)
    u_raw = e_ctx @ model.code_projection
    u_norm = np.linalg.norm(u_raw)
    if u_norm == 0.0:
        raise ValueError("context encoder produced a zero vector")
    u = u_raw / u_norm

    e_names = np.stack([model.name_embeddings[ids].mean(axis=0) for ids in name_ids])
    v_raw = e_names @ model.name_projection
    v, v_norms = _normalize_rows(v_raw)

    cosines = v @ u
    scores = cosines / tau
    shifted = scores - scores.max()
    exp = np.exp(shifted)
    probs = exp / exp.sum()
    loss = float(np.log(exp.sum()) - shifted[0])

    # Backward. dL/ds_j = p_j - [j == 0].
    g_scores = probs.copy()
    g_scores[0] -= 1.0

    grads = accumulate_into if accumulate_into is not None else Gradients.zeros_like(model)

    # Temperature (through s = cos / tau, tau = exp(log_tau)):
    # dL/dlog_tau = -sum_j g_j * cos_j / tau.
    grads.log_tau += float(-(g_scores @ cosines) / tau)

    # Context side: dL/du = sum_j g_j v_j / tau, then back through the
    # normalization (dL/du_raw = (I - u u^T) dL/du / |u_raw|), projection,
    # and mean pool.
    g_u = (g_scores @ v) / tau
    g_u_raw = (g_u - (g_u @ u) * u) / u_norm
    grads.code_projection += np.outer(e_ctx, g_u_raw)
    g_e_ctx = model.code_projection @ g_u_raw
    contribution = g_e_ctx / len(ctx_ids)
    np.add.at(grads.code_embeddings, ctx_ids, contribution)

    # Name side, vectorized over the m names.
    g_v = np.outer(g_scores, u) / tau  # (m, D)
    g_v_raw = (g_v - (np.sum(g_v * v, axis=1))[:, None] * v) / v_norms[:, None]
    grads.name_projection += e_names.T @ g_v_raw
    g_e_names = g_v_raw @ model.name_projection.T  # (m, D)
    for j in range(m):
        ids = name_ids[j]
        np.add.at(grads.name_embeddings, ids, g_e_names[j] / len(ids))

    return loss, grads
