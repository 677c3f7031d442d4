"""Dual-encoder reranker model and scoring.

Each side embeds its tokens (mean pool over an embedding table), applies a
linear projection, and L2-normalizes, so the two sides share one vector
space. A candidate's raw score is the cosine between the code-context vector
and the name vector divided by a learned temperature; penalties for in-scope
collisions and excessive length are subtracted before ranking.
"""

from __future__ import annotations

import base64
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..identifiers import Candidate, InvalidIdentifierError, is_valid_identifier, split_subtokens
from ..mining.masking import MaskedExample
from .vocab import SubtokenVocab
from .window import context_tokens, in_scope_names

__all__ = [
    "DualEncoderModel",
    "ModelLoadError",
    "ScoringConfig",
    "adjusted_score",
    "encode_context",
    "encode_name",
    "load_model",
    "rerank",
    "save_model",
    "score",
]

MODEL_FORMAT_VERSION = 1
INIT_SCALE = 0.05
INITIAL_TAU = 0.07


class ModelLoadError(ValueError):
    """Model file is corrupted, truncated, or from an incompatible format."""


@dataclass(frozen=True)
class ScoringConfig:
    collision_penalty: float = 0.5
    length_threshold: int = 20
    length_penalty_per_char: float = 0.02
    context_window: int = 64

    def __post_init__(self) -> None:
        if self.collision_penalty < 0 or self.length_penalty_per_char < 0:
            raise ValueError("penalties must be non-negative")
        if self.length_threshold <= 0 or self.context_window <= 0:
            raise ValueError("length_threshold and context_window must be positive")


@dataclass
class DualEncoderModel:
    """Embedding tables, projections, and the learned temperature.

    The temperature is stored as ``log_tau`` so positivity is structural.
    All arrays are float64 for exact gradient checking.
    """

    vocab: SubtokenVocab
    dim: int
    code_embeddings: np.ndarray
    name_embeddings: np.ndarray
    code_projection: np.ndarray
    name_projection: np.ndarray
    log_tau: float
    scoring: ScoringConfig = field(default_factory=ScoringConfig)

    @property
    def tau(self) -> float:
        return math.exp(self.log_tau)

    @classmethod
    def initialize(
        cls,
        vocab: SubtokenVocab,
        dim: int,
        seed: int,
        scoring: ScoringConfig | None = None,
        tau: float = INITIAL_TAU,
    ) -> DualEncoderModel:
        """Seeded uniform(-0.05, 0.05) parameters; draw order is fixed."""
        rng = np.random.RandomState(seed)
        v = len(vocab)
        shape_order = [(v, dim), (v, dim), (dim, dim), (dim, dim)]
        arrays = [rng.uniform(-INIT_SCALE, INIT_SCALE, size=s) for s in shape_order]
        return cls(
            vocab=vocab,
            dim=dim,
            code_embeddings=arrays[0],
            name_embeddings=arrays[1],
            code_projection=arrays[2],
            name_projection=arrays[3],
            log_tau=math.log(tau),
            scoring=scoring if scoring is not None else ScoringConfig(),
        )

    def copy(self) -> DualEncoderModel:
        return DualEncoderModel(
            vocab=self.vocab,
            dim=self.dim,
            code_embeddings=self.code_embeddings.copy(),
            name_embeddings=self.name_embeddings.copy(),
            code_projection=self.code_projection.copy(),
            name_projection=self.name_projection.copy(),
            log_tau=self.log_tau,
            scoring=self.scoring,
        )


def _pool_project_normalize(ids: list[int], table: np.ndarray, projection: np.ndarray) -> np.ndarray:
    pooled = table[ids].mean(axis=0)
    projected = pooled @ projection
    norm = np.linalg.norm(projected)
    if norm == 0.0:
        raise ValueError("encoder produced a zero vector")
    return projected / norm


def encode_context(model: DualEncoderModel, tokens: list[str]) -> np.ndarray:
    """Unit vector for a code-context token window."""
    if not tokens:
        raise ValueError("cannot encode an empty token window")
    return _pool_project_normalize(model.vocab.ids(tokens), model.code_embeddings, model.code_projection)


def encode_name(model: DualEncoderModel, name: str) -> np.ndarray:
    """Unit vector for a candidate identifier (mean over its subtokens)."""
    if not is_valid_identifier(name):
        raise InvalidIdentifierError(f"not a valid identifier: {name!r}")
    subtokens = split_subtokens(name)
    if not subtokens:
        subtokens = [name.lower()]
    return _pool_project_normalize(model.vocab.ids(subtokens), model.name_embeddings, model.name_projection)


def score(model: DualEncoderModel, context_vec: np.ndarray, name_vec: np.ndarray) -> float:
    """Temperature-scaled cosine: cos(context, name) / tau (unit inputs)."""
    return float(context_vec @ name_vec) / model.tau


def adjusted_score(
    raw: float, candidate: str, in_scope: frozenset[str] | set[str], cfg: ScoringConfig
) -> float:
    """Raw score minus collision and length penalties."""
    value = raw
    if candidate in in_scope:
        value -= cfg.collision_penalty
    value -= cfg.length_penalty_per_char * max(0, len(candidate) - cfg.length_threshold)
    return value


def rerank(
    model: DualEncoderModel,
    cfg: ScoringConfig,
    example: MaskedExample,
    candidates: list[Candidate],
) -> list[Candidate]:
    """Reorder candidates by descending adjusted score, stable on ties.

    The output is a permutation of the input with ``rerank_score`` populated.
    """
    if not candidates:
        raise ValueError("rerank requires a non-empty candidate list")
    context_vec = encode_context(model, context_tokens(example, cfg.context_window))
    scope = in_scope_names(example)
    scored = []
    for idx, cand in enumerate(candidates):
        raw = score(model, context_vec, encode_name(model, cand.name))
        scored.append(
            (
                Candidate(name=cand.name, gen_logprob=cand.gen_logprob, rerank_score=adjusted_score(raw, cand.name, scope, cfg)),
                idx,
            )
        )
    scored.sort(key=lambda pair: (-pair[0].rerank_score, pair[1]))
    return [cand for cand, _ in scored]


# --- model persistence -------------------------------------------------------


def _encode_array(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype=np.float64).tobytes()).decode("ascii")


def _decode_array(data: str, shape: tuple[int, int]) -> np.ndarray:
    raw = base64.b64decode(data.encode("ascii"), validate=True)
    expected = shape[0] * shape[1] * 8
    if len(raw) != expected:
        raise ModelLoadError(f"array payload has {len(raw)} bytes, expected {expected}")
    return np.frombuffer(raw, dtype=np.float64).reshape(shape).copy()


def save_model(model: DualEncoderModel, path: str | Path) -> None:
    """Write the model as self-describing JSON; bit-exact on reload."""
    v, d = len(model.vocab), model.dim
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "dim": d,
        "vocab_size": v,
        "vocab": list(model.vocab.tokens),
        "log_tau": model.log_tau.hex() if isinstance(model.log_tau, float) else float(model.log_tau).hex(),
        "code_embeddings": _encode_array(model.code_embeddings),
        "name_embeddings": _encode_array(model.name_embeddings),
        "code_projection": _encode_array(model.code_projection),
        "name_projection": _encode_array(model.name_projection),
        "scoring": {
            "collision_penalty": model.scoring.collision_penalty,
            "length_threshold": model.scoring.length_threshold,
            "length_penalty_per_char": model.scoring.length_penalty_per_char,
            "context_window": model.scoring.context_window,
        },
    }
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload), encoding="utf-8")
    os.replace(tmp, path)


def load_model(path: str | Path) -> DualEncoderModel:
    """Load a model saved by :func:`save_model`.

    Raises:
        ModelLoadError: version mismatch, truncation, or shape problems;
            never returns a partially initialized model.
    """
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ModelLoadError(f"cannot read model file {path}: {exc}") from exc
    try:
        version = payload["format_version"]
        if version != MODEL_FORMAT_VERSION:
            raise ModelLoadError(f"unsupported model format version {version}")
        dim = int(payload["dim"])
        vocab_tokens = tuple(payload["vocab"])
        if len(vocab_tokens) != int(payload["vocab_size"]):
            raise ModelLoadError("vocab size mismatch")
        v = len(vocab_tokens)
        scoring = payload["scoring"]
        model = DualEncoderModel(
            vocab=SubtokenVocab(tokens=vocab_tokens),
            dim=dim,
            code_embeddings=_decode_array(payload["code_embeddings"], (v, dim)),
            name_embeddings=_decode_array(payload["name_embeddings"], (v, dim)),
            code_projection=_decode_array(payload["code_projection"], (dim, dim)),
            name_projection=_decode_array(payload["name_projection"], (dim, dim)),
            log_tau=float.fromhex(payload["log_tau"]),
            scoring=ScoringConfig(
                collision_penalty=scoring["collision_penalty"],
                length_threshold=scoring["length_threshold"],
                length_penalty_per_char=scoring["length_penalty_per_char"],
                context_window=scoring["context_window"],
            ),
        )
    except ModelLoadError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelLoadError(f"malformed model file {path}: {exc}") from exc
    return model
