"""JSONL serialization of masked examples.

One example per line, UTF-8 with ``\\n`` endings, ASCII-escaped so the bytes
are platform-independent. ``parse_record(to_json_line(x)) == x`` exactly.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Iterator

from .masking import ExampleMeta, MaskedExample

__all__ = ["parse_record", "read_examples", "to_json_line", "write_examples"]


def to_json_line(example: MaskedExample) -> str:
    """Serialize one example as a single JSON line (no trailing newline)."""
    payload = {
        "id": example.id,
        "input_text": example.input_text,
        "target_text": example.target_text,
        "meta": {
            "file_id": example.meta.file_id,
            "byte_start": example.meta.byte_start,
            "kind": example.meta.kind,
            "occurrence_count": example.meta.occurrence_count,
        },
    }
    return json.dumps(payload, ensure_ascii=True, separators=(",", ":"))


def parse_record(line: str) -> MaskedExample:
    """Parse one JSONL line back into a MaskedExample."""
    obj = json.loads(line)
    meta = obj["meta"]
    return MaskedExample(
        id=obj["id"],
        input_text=obj["input_text"],
        target_text=dict(obj["target_text"]),
        meta=ExampleMeta(
            file_id=meta["file_id"],
            byte_start=meta["byte_start"],
            kind=meta["kind"],
            occurrence_count=meta["occurrence_count"],
        ),
    )


def read_examples(path: str | Path) -> Iterator[MaskedExample]:
    """Stream examples from a JSONL file, skipping blank lines."""
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                yield parse_record(line)


def write_examples(path: str | Path, examples: Iterable[MaskedExample]) -> int:
    """Write examples as JSONL atomically (temp file + rename); returns count."""
    path = Path(path)
    count = 0
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            for example in examples:
                handle.write(to_json_line(example))
                handle.write("\n")
                count += 1
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return count
