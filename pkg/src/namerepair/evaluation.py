"""Evaluation harness: per-example metrics, aggregation, and output files.

Three metrics per example: exact match (case-insensitive equality of the top
candidate and the gold name), top-5 hit (any of the first five candidates
matches), and partial match (embedding cosine between top candidate and gold,
normalized from [-1, 1] to [0, 100]). Partial match can use an external
sentence-embedding HTTP service or the deterministic builtin character-
trigram embedder, and every output records which one produced it.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator

import numpy as np
import requests

from .candidates import GenerationError
from .identifiers import Candidate, is_valid_identifier, split_subtokens
from .mining.masking import MaskedExample

__all__ = [
    "EmbeddingProvider",
    "EvalRecord",
    "EvalSummary",
    "builtin_embed",
    "evaluate",
    "exact_match",
    "partial_match",
    "read_summary",
    "top5_hit",
    "write_records",
    "write_summary",
]

BUILTIN_EMBED_DIM = 256


def exact_match(top: str, gold: str) -> int:
    """1 iff the candidate equals the gold name case-insensitively (ASCII)."""
    if not gold:
        raise ValueError("gold name must be non-empty")
    return int(top.lower() == gold.lower())


def top5_hit(candidates: list[str], gold: str) -> int:
    """1 iff any of the (at most five) candidates exact-matches the gold name."""
    if len(candidates) > 5:
        raise ValueError("top5_hit expects the caller to truncate to five candidates")
    return int(any(exact_match(name, gold) for name in candidates))


def builtin_embed(text: str, dim: int = BUILTIN_EMBED_DIM) -> np.ndarray:
    """Deterministic character-trigram hash embedding, L2-normalized.

    The text is case-folded and subtoken-joined (identifiers split on
    camelCase/underscores, joined with spaces) and wrapped in boundary
    markers, then every character trigram is hashed into one of ``dim``
    buckets. Stable across runs and platforms.
    """
    import hashlib

    if dim < 64:
        raise ValueError("builtin embedding dim must be at least 64")
    if is_valid_identifier(text):
        joined = " ".join(split_subtokens(text)) or text.lower()
    else:
        joined = text.lower()
    wrapped = f"<{joined}>"
    vec = np.zeros(dim, dtype=np.float64)
    for i in range(len(wrapped) - 2):
        trigram = wrapped[i : i + 3]
        digest = hashlib.sha1(trigram.encode("utf-8")).digest()
        bucket = int.from_bytes(digest[:8], "big") % dim
        vec[bucket] += 1.0
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        vec[0] = 1.0
        return vec
    return vec / norm


@dataclass(frozen=True)
class EmbeddingProvider:
    """Where partial-match embeddings come from."""

    kind: str  # "builtin_ngram" | "http_embedding"
    dim: int = BUILTIN_EMBED_DIM
    endpoint: str | None = None
    model: str | None = None
    credential_env: str | None = None
    timeout: float = 30.0
    retry_base_delay: float = 1.0

    def __post_init__(self) -> None:
        if self.kind == "builtin_ngram":
            if self.endpoint is not None:
                raise ValueError("builtin embedder takes no endpoint")
        elif self.kind == "http_embedding":
            if not self.endpoint:
                raise ValueError("http embedder needs an endpoint")
        else:
            raise ValueError(f"unknown embedder kind: {self.kind}")
        if self.dim <= 0:
            raise ValueError("dim must be positive")

    @classmethod
    def builtin(cls, dim: int = BUILTIN_EMBED_DIM) -> EmbeddingProvider:
        return cls(kind="builtin_ngram", dim=dim)

    @classmethod
    def http(cls, endpoint: str, model: str | None = None, dim: int = 384, **kw) -> EmbeddingProvider:
        return cls(kind="http_embedding", endpoint=endpoint, model=model, dim=dim, **kw)

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        if self.kind == "builtin_ngram":
            return [builtin_embed(t, self.dim) for t in texts]
        return self._embed_http(texts)

    def _embed_http(self, texts: list[str]) -> list[np.ndarray]:
        headers = {"Content-Type": "application/json"}
        if self.credential_env:
            token = os.environ.get(self.credential_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        body: dict = {"input": texts}
        if self.model:
            body["model"] = self.model
        last_error: Exception | None = None
        for attempt in range(3):
            if attempt:
                time.sleep(self.retry_base_delay * (2 ** (attempt - 1)))
            try:
                resp = requests.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code != 200:
                last_error = GenerationError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                if resp.status_code not in (429,) and resp.status_code < 500:
                    break
                continue
            data = resp.json()["data"]
            vectors = [np.asarray(entry["embedding"], dtype=np.float64) for entry in data]
            for vec in vectors:
                if vec.shape != (self.dim,):
                    raise ValueError(f"embedder returned dim {vec.shape}, expected ({self.dim},)")
            return vectors
        raise GenerationError(f"embedding failed after retries: {last_error}")


def partial_match(top: str, gold: str, embedder: EmbeddingProvider) -> float:
    """100 * (cos(e(top), e(gold)) + 1) / 2, clamped into [0, 100]."""
    vec_top, vec_gold = embedder.embed([top, gold])
    denom = np.linalg.norm(vec_top) * np.linalg.norm(vec_gold)
    cosine = float(vec_top @ vec_gold) / denom if denom else 0.0
    return min(100.0, max(0.0, 100.0 * (cosine + 1.0) / 2.0))


@dataclass(frozen=True)
class EvalRecord:
    example_id: str
    gold: str
    top5: tuple[tuple[str, float | None], ...]  # (name, score)
    exact: int
    top5_hit: int
    partial: float | None
    status: str  # "ok" | "generation_error" | "parse_miss"

    def __post_init__(self) -> None:
        if self.status not in ("ok", "generation_error", "parse_miss"):
            raise ValueError(f"unknown status {self.status}")
        if self.exact == 1 and self.top5_hit != 1:
            raise ValueError("exact match implies a top-5 hit")
        if self.partial is not None and (self.status != "ok" or not self.top5):
            raise ValueError("partial score requires status=ok and candidates")


@dataclass(frozen=True)
class EvalSummary:
    n: int
    n_ok: int
    n_errored: int  # any non-ok status (generation errors and parse misses)
    exact_pct: float
    top5_pct: float
    partial_mean: float
    config: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "n_ok": self.n_ok,
            "n_errored": self.n_errored,
            "exact_pct": self.exact_pct,
            "top5_pct": self.top5_pct,
            "partial_mean": self.partial_mean,
            "config": self.config,
        }


def evaluate(
    dataset: Iterable[MaskedExample],
    candidate_source: Callable[[MaskedExample], list[Candidate]],
    embedder: EmbeddingProvider,
    reranker: Callable[[MaskedExample, list[Candidate]], list[Candidate]] | None = None,
    k: int = 10,
    config: dict | None = None,
) -> tuple[EvalSummary, list[EvalRecord]]:
    """Score every example; returns the aggregate summary and per-example records.

    Per-example failures set the record status and never abort the run; the
    three means are computed over status=ok examples only. Truncation to the
    top five happens after reranking when a reranker is supplied.
    """
    records: list[EvalRecord] = []
    exact_sum = 0
    top5_sum = 0
    partial_sum = 0.0
    n_ok = 0

    for example in dataset:
        gold = example.gold
        try:
            candidates = candidate_source(example)[:k]
        except GenerationError:
            records.append(
                EvalRecord(example.id, gold, (), 0, 0, None, "generation_error")
            )
            continue
        if reranker is not None and candidates:
            candidates = reranker(example, candidates)
        top5 = candidates[:5]
        if not top5:
            records.append(EvalRecord(example.id, gold, (), 0, 0, None, "parse_miss"))
            continue
        names = [c.name for c in top5]
        exact = exact_match(names[0], gold)
        hit = top5_hit(names, gold)
        try:
            partial = partial_match(names[0], gold, embedder)
        except GenerationError:
            records.append(
                EvalRecord(example.id, gold, tuple((c.name, _score_of(c)) for c in top5), 0, 0, None, "generation_error")
            )
            continue
        record = EvalRecord(
            example_id=example.id,
            gold=gold,
            top5=tuple((c.name, _score_of(c)) for c in top5),
            exact=exact,
            top5_hit=hit,
            partial=partial,
            status="ok",
        )
        assert record.exact <= record.top5_hit  # exact implies top-5 hit
        records.append(record)
        n_ok += 1
        exact_sum += exact
        top5_sum += hit
        partial_sum += partial

    n = len(records)
    summary = EvalSummary(
        n=n,
        n_ok=n_ok,
        n_errored=n - n_ok,
        exact_pct=100.0 * exact_sum / n_ok if n_ok else 0.0,
        top5_pct=100.0 * top5_sum / n_ok if n_ok else 0.0,
        partial_mean=partial_sum / n_ok if n_ok else 0.0,
        config=dict(config or {}),
    )
    return summary, records


def _score_of(candidate: Candidate) -> float | None:
    if candidate.rerank_score is not None:
        return candidate.rerank_score
    return candidate.gen_logprob


def write_summary(summary: EvalSummary, path: str | Path) -> None:
    """Write the summary as a single JSON document (atomic)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(summary.as_dict(), ensure_ascii=True, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def read_summary(path: str | Path) -> EvalSummary:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return EvalSummary(
        n=obj["n"],
        n_ok=obj["n_ok"],
        n_errored=obj["n_errored"],
        exact_pct=obj["exact_pct"],
        top5_pct=obj["top5_pct"],
        partial_mean=obj["partial_mean"],
        config=obj.get("config", {}),
    )


def write_records(records: Iterable[EvalRecord], path: str | Path) -> int:
    """Write per-example records as JSONL (atomic); returns the line count."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    count = 0
    with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(
                json.dumps(
                    {
                        "id": record.example_id,
                        "gold": record.gold,
                        "top5": [{"name": n, "score": s} for n, s in record.top5],
                        "exact": record.exact,
                        "top5_hit": record.top5_hit,
                        "partial": record.partial,
                        "status": record.status,
                    },
                    ensure_ascii=True,
                    separators=(",", ":"),
                )
            )
            handle.write("\n")
            count += 1
    os.replace(tmp, path)
    return count


def read_records(path: str | Path) -> Iterator[EvalRecord]:
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            obj = json.loads(line)
            yield EvalRecord(
                example_id=obj["id"],
                gold=obj["gold"],
                top5=tuple((e["name"], e["score"]) for e in obj["top5"]),
                exact=obj["exact"],
                top5_hit=obj["top5_hit"],
                partial=obj["partial"],
                status=obj["status"],
            )
