"""Candidate-name sources: prompt construction, output parsing, backends.

Two interchangeable backends produce candidates for a masked example: an
HTTP chat-completion generator (prompted with the zero- or few-shot template
and parsed leniently, since chat models wrap JSON in prose or fences) and a
file backend that replays precomputed candidates bit-exactly from JSONL.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import requests

from .identifiers import Candidate, is_valid_identifier
from .mining.masking import MaskedExample

__all__ = [
    "CandidateFileError",
    "CompletionParseError",
    "GenerationError",
    "GeneratorBackend",
    "PromptTemplate",
    "SamplingConfig",
    "build_prompt",
    "dedupe_candidates",
    "generate_candidates",
    "load_shots",
    "parse_json_mapping",
    "parse_numbered_candidates",
    "read_candidate_file",
    "write_candidate_file",
]

MAX_CANDIDATES = 64

DEFAULT_SYSTEM_TEXT = (
    "You are given a C++ function in which every occurrence of one identifier "
    "has been replaced by a placeholder such as <ID_1>. Propose a natural, "
    "descriptive replacement name that fits the surrounding code. Reply with "
    'only a JSON object mapping each placeholder to the name, for example '
    '{"<ID_1>": "jsonValue"}.'
)

NUMBERED_SYSTEM_TEXT = (
    "You are given a C++ function in which every occurrence of one identifier "
    "has been replaced by the placeholder <ID_1>. Propose up to five natural, "
    "descriptive replacement names, best first, as a numbered list: one name "
    "per line in the form `1. name`."
)


class CompletionParseError(ValueError):
    """No usable JSON object was found in a generator completion."""


class GenerationError(RuntimeError):
    """Generation failed for one example after retries."""


class CandidateFileError(ValueError):
    """A candidate replay file is malformed."""


@dataclass(frozen=True)
class PromptTemplate:
    """System text plus optional few-shot (masked function, mapping) pairs."""

    system_text: str = DEFAULT_SYSTEM_TEXT
    shots: tuple[tuple[str, dict[str, str]], ...] = ()

    def __post_init__(self) -> None:
        for _, mapping in self.shots:
            for token, name in mapping.items():
                if not token.startswith("<ID_") or not is_valid_identifier(name):
                    raise ValueError(f"invalid shot mapping entry: {token!r} -> {name!r}")


@dataclass(frozen=True)
class SamplingConfig:
    k: int = 10
    temperature: float = 0.8
    top_p: float = 0.9
    max_tokens: int = 64

    def __post_init__(self) -> None:
        if not (1 <= self.k <= MAX_CANDIDATES):
            raise ValueError(f"k must be in [1, {MAX_CANDIDATES}]")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if not (0 < self.top_p <= 1):
            raise ValueError("top_p must be in (0, 1]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class GeneratorBackend:
    """Where candidates come from: an HTTP generator or a replay file."""

    kind: str  # "http_chat" | "file"
    endpoint: str | None = None
    model: str | None = None
    credential_env: str | None = None
    path: str | None = None
    samples_mode: str = "n"  # "n": one request with n=k; "repeat": k requests
    timeout: float = 60.0
    retry_base_delay: float = 1.0

    def __post_init__(self) -> None:
        if self.kind == "http_chat":
            if not self.endpoint or not self.model or self.path is not None:
                raise ValueError("http_chat backend needs endpoint+model and no path")
        elif self.kind == "file":
            if not self.path or self.endpoint is not None or self.model is not None:
                raise ValueError("file backend needs a path and no endpoint/model")
        else:
            raise ValueError(f"unknown backend kind: {self.kind}")
        if self.samples_mode not in ("n", "repeat"):
            raise ValueError("samples_mode must be 'n' or 'repeat'")

    @classmethod
    def http(cls, endpoint: str, model: str, credential_env: str | None = None, **kw) -> GeneratorBackend:
        return cls(kind="http_chat", endpoint=endpoint, model=model, credential_env=credential_env, **kw)

    @classmethod
    def from_file(cls, path: str | Path) -> GeneratorBackend:
        return cls(kind="file", path=str(path))


def load_shots(path: str | Path) -> tuple[tuple[str, dict[str, str]], ...]:
    """Read few-shot exemplars from a JSON config file.

    Format: a list of {"input_text": str, "mapping": {token: name}} objects.
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ValueError("shots file must contain a JSON list")
    return tuple((entry["input_text"], dict(entry["mapping"])) for entry in data)


def build_prompt(template: PromptTemplate, example: MaskedExample) -> list[dict[str, str]]:
    """Assemble chat messages: system, shot turns, then the masked function.

    Deterministic; the final user turn is exactly ``example.input_text``.
    """
    messages = [{"role": "system", "content": template.system_text}]
    for shot_input, mapping in template.shots:
        messages.append({"role": "user", "content": shot_input})
        messages.append(
            {"role": "assistant", "content": json.dumps(mapping, sort_keys=True, separators=(", ", ": "))}
        )
    messages.append({"role": "user", "content": example.input_text})
    return messages


def parse_json_mapping(completion: str, strict: bool = False) -> dict[str, str]:
    """Extract the first JSON object from a completion as token -> name.

    Models wrap JSON in prose or code fences, so every ``{`` is tried as the
    start of an object. Entries whose value is not a valid identifier are
    dropped; placeholder-shaped keys are required. With ``strict=True`` the
    completion must be exactly one JSON object (reproducibility studies).

    Raises:
        CompletionParseError: when no JSON object can be decoded at all.
    """
    decoder = json.JSONDecoder()
    if strict:
        try:
            obj = json.loads(completion)
        except ValueError as exc:
            raise CompletionParseError(f"strict mode: completion is not a JSON document: {exc}")
        if not isinstance(obj, dict):
            raise CompletionParseError("strict mode: completion is not a JSON object")
        return {
            token: name
            for token, name in obj.items()
            if token.startswith("<ID_") and isinstance(name, str) and is_valid_identifier(name)
        }
    start = completion.find("{")
    while start != -1:
        try:
            obj, _ = decoder.raw_decode(completion, start)
        except ValueError:
            start = completion.find("{", start + 1)
            continue
        if isinstance(obj, dict):
            mapping = {}
            for token, name in obj.items():
                if token.startswith("<ID_") and isinstance(name, str) and is_valid_identifier(name):
                    mapping[token] = name
            return mapping
        start = completion.find("{", start + 1)
    raise CompletionParseError("no JSON object found in completion")


def parse_numbered_candidates(completion: str, limit: int = 5) -> list[str]:
    """Parse ``N. name`` / ``N) name`` lines into a deduplicated name list.

    Invalid identifiers are dropped; the first occurrence of a duplicate
    wins; at most ``limit`` names are returned. An unparsable completion
    yields an empty list (the caller records a miss).
    """
    names: list[str] = []
    for line in completion.splitlines():
        stripped = line.strip()
        if not stripped or not stripped[0].isdigit():
            continue
        idx = 0
        while idx < len(stripped) and stripped[idx].isdigit():
            idx += 1
        if idx >= len(stripped) or stripped[idx] not in ".)":
            continue
        name = stripped[idx + 1 :].strip().strip("`'\"*")
        if is_valid_identifier(name) and name not in names:
            names.append(name)
        if len(names) >= limit:
            break
    return names


def dedupe_candidates(candidates: Iterable[Candidate]) -> list[Candidate]:
    """Drop duplicate names (case-sensitive), keeping the first occurrence."""
    seen: set[str] = set()
    out = []
    for cand in candidates:
        if cand.name not in seen:
            seen.add(cand.name)
            out.append(cand)
    return out


def generate_candidates(
    backend: GeneratorBackend,
    template: PromptTemplate,
    example: MaskedExample,
    cfg: SamplingConfig,
    parser: str = "json_mapping",
) -> list[Candidate]:
    """Produce up to ``cfg.k`` distinct candidates for one masked example.

    HTTP candidates follow generator order: log-probability descending when
    every sample reported one, sample order otherwise. The file backend
    replays its stored list verbatim after validation.

    ``parser`` selects how completions are read: ``json_mapping`` samples up
    to k completions each carrying one placeholder->name object (the default
    flow), while ``numbered`` issues a single request and parses a ranked
    numbered list from it (the pure-prompting flow).

    Raises:
        GenerationError: transport failure after retries (http backend).
    """
    if parser not in ("json_mapping", "numbered"):
        raise ValueError(f"unknown completion parser: {parser}")
    if backend.kind == "file":
        table = read_candidate_file(backend.path)
        return dedupe_candidates(table.get(example.id, []))[: cfg.k]
    if parser == "numbered":
        return _generate_http_numbered(backend, template, example, cfg)
    return _generate_http(backend, template, example, cfg)


# --- HTTP chat-completion backend ------------------------------------------


def _auth_headers(backend: GeneratorBackend) -> dict[str, str]:
    headers = {"Content-Type": "application/json"}
    if backend.credential_env:
        token = os.environ.get(backend.credential_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
    return headers


def _post_with_retries(backend: GeneratorBackend, body: dict) -> dict:
    last_error: Exception | None = None
    for attempt in range(3):
        if attempt:
            time.sleep(backend.retry_base_delay * (2 ** (attempt - 1)))
        try:
            resp = requests.post(
                backend.endpoint, json=body, headers=_auth_headers(backend), timeout=backend.timeout
            )
        except requests.RequestException as exc:
            last_error = exc
            continue
        if resp.status_code == 200:
            return resp.json()
        last_error = GenerationError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code not in (429,) and resp.status_code < 500:
            break  # non-retryable client error
    raise GenerationError(f"generation failed after retries: {last_error}")


def _request_body(backend: GeneratorBackend, messages: list[dict[str, str]], cfg: SamplingConfig, n: int) -> dict:
    return {
        "model": backend.model,
        "messages": messages,
        "temperature": cfg.temperature,
        "top_p": cfg.top_p,
        "n": n,
        "max_tokens": cfg.max_tokens,
    }


def _choice_completions(payload: Mapping) -> list[tuple[str, list | None]]:
    """(content, token logprob list or None) per choice, in response order."""
    out = []
    for choice in payload.get("choices", []):
        content = (choice.get("message") or {}).get("content") or ""
        logprobs = None
        lp = choice.get("logprobs")
        if isinstance(lp, dict) and isinstance(lp.get("content"), list):
            logprobs = lp["content"]
        out.append((content, logprobs))
    return out


def _name_logprob(content: str, name: str, token_logprobs: list | None) -> float | None:
    """Sum log-probabilities of the tokens overlapping the name's first span."""
    if not token_logprobs:
        return None
    at = content.find(name)
    if at < 0:
        return None
    end = at + len(name)
    total = 0.0
    cursor = 0
    matched = False
    for entry in token_logprobs:
        token = entry.get("token", "")
        lp = entry.get("logprob")
        tok_start, tok_end = cursor, cursor + len(token)
        cursor = tok_end
        if lp is None:
            continue
        if tok_start < end and tok_end > at:
            total += float(lp)
            matched = True
    return total if matched else None


def _generate_http(
    backend: GeneratorBackend,
    template: PromptTemplate,
    example: MaskedExample,
    cfg: SamplingConfig,
) -> list[Candidate]:
    messages = build_prompt(template, example)
    if backend.samples_mode == "n":
        payload = _post_with_retries(backend, _request_body(backend, messages, cfg, cfg.k))
        completions = _choice_completions(payload)
    else:
        completions = []
        for _ in range(cfg.k):
            payload = _post_with_retries(backend, _request_body(backend, messages, cfg, 1))
            completions.extend(_choice_completions(payload)[:1])

    placeholder = example.placeholder_tokens[0]
    sampled: list[Candidate] = []
    for content, token_logprobs in completions:
        try:
            mapping = parse_json_mapping(content)
        except CompletionParseError:
            continue
        name = mapping.get(placeholder)
        if name is None:
            continue
        sampled.append(Candidate(name=name, gen_logprob=_name_logprob(content, name, token_logprobs)))

    candidates = dedupe_candidates(sampled)
    if candidates and all(c.gen_logprob is not None for c in candidates):
        order = sorted(range(len(candidates)), key=lambda i: (-candidates[i].gen_logprob, i))
        candidates = [candidates[i] for i in order]
    return candidates[: cfg.k]


def _generate_http_numbered(
    backend: GeneratorBackend,
    template: PromptTemplate,
    example: MaskedExample,
    cfg: SamplingConfig,
) -> list[Candidate]:
    messages = build_prompt(template, example)
    payload = _post_with_retries(backend, _request_body(backend, messages, cfg, 1))
    completions = _choice_completions(payload)
    if not completions:
        return []
    names = parse_numbered_candidates(completions[0][0])
    return [Candidate(name=name) for name in names][: cfg.k]


# --- candidate replay files -------------------------------------------------


@dataclass
class _FileCache:
    path: str
    stat_key: tuple
    table: dict[str, list[Candidate]] = field(default_factory=dict)


_file_cache: _FileCache | None = None


def read_candidate_file(path: str | Path, use_cache: bool = True) -> dict[str, list[Candidate]]:
    """Load a candidate JSONL file: one {id, candidates:[{name, logprob}]} per line.

    Raises:
        CandidateFileError: malformed lines or invalid identifier names.
    """
    global _file_cache
    path = str(path)
    st = os.stat(path)
    stat_key = (st.st_mtime_ns, st.st_size, st.st_ino)
    if use_cache and _file_cache is not None and _file_cache.path == path and _file_cache.stat_key == stat_key:
        return _file_cache.table
    table: dict[str, list[Candidate]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                entries = []
                for item in obj["candidates"]:
                    if not is_valid_identifier(item["name"]):
                        raise ValueError(f"invalid candidate name {item['name']!r}")
                    entries.append(
                        Candidate(
                            name=item["name"],
                            gen_logprob=item.get("logprob"),
                            rerank_score=item.get("rerank_score"),
                        )
                    )
                table[obj["id"]] = entries
            except (KeyError, TypeError, ValueError) as exc:
                raise CandidateFileError(f"{path}:{lineno}: {exc}") from exc
    _file_cache = _FileCache(path=path, stat_key=stat_key, table=table)
    return table


def write_candidate_file(path: str | Path, rows: Iterable[tuple[str, list[Candidate]]]) -> int:
    """Write candidate lists as JSONL atomically; returns the line count."""
    path = Path(path)
    count = 0
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
        for example_id, candidates in rows:
            entry = {
                "id": example_id,
                "candidates": [
                    _candidate_json(c) for c in candidates
                ],
            }
            handle.write(json.dumps(entry, ensure_ascii=True, separators=(",", ":")))
            handle.write("\n")
            count += 1
    os.replace(tmp, path)
    return count


def _candidate_json(c: Candidate) -> dict:
    entry: dict = {"name": c.name, "logprob": c.gen_logprob}
    if c.rerank_score is not None:
        entry["rerank_score"] = c.rerank_score
    return entry
