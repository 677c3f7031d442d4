"""End-to-end mining: source tree in, masked JSONL examples out.

Files are visited in lexicographic order of their corpus-relative path and
functions in byte order, so two runs over the same corpus produce identical
output bytes. Files that fail to decode or tokenize are skipped and counted
in the mining manifest rather than aborting the run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from ..identifiers import Placeholder
from .extract import extract_functions_checked
from .masking import MaskedExample, PlaceholderCollisionError, mask_identifier
from .sites import collect_identifiers, select_mask_target

__all__ = ["CPP_SUFFIXES", "MiningStats", "discover_files", "mine_files"]

logger = logging.getLogger(__name__)

CPP_SUFFIXES = (".cc", ".cpp", ".cxx", ".h", ".hpp")


@dataclass
class MiningStats:
    """Counts for the mining manifest."""

    files_seen: int = 0
    files_parsed: int = 0
    files_skipped: int = 0
    functions_extracted: int = 0
    functions_without_sites: int = 0
    examples_emitted: int = 0
    examples_skipped_collision: int = 0
    skipped_files: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "files_seen": self.files_seen,
            "files_parsed": self.files_parsed,
            "files_skipped": self.files_skipped,
            "functions_extracted": self.functions_extracted,
            "functions_without_sites": self.functions_without_sites,
            "examples_emitted": self.examples_emitted,
            "examples_skipped_collision": self.examples_skipped_collision,
            "skipped_files": self.skipped_files,
        }


def discover_files(input_dir: str | Path | None = None, manifest: str | Path | None = None) -> list[tuple[str, Path]]:
    """Resolve the corpus file list as (file_id, path), sorted by file_id.

    Either a directory tree (C++ suffixes only) or a manifest file listing
    one path per line.
    """
    entries: list[tuple[str, Path]] = []
    if input_dir is not None:
        root = Path(input_dir)
        for path in root.rglob("*"):
            if path.is_file() and path.suffix in CPP_SUFFIXES:
                entries.append((path.relative_to(root).as_posix(), path))
    elif manifest is not None:
        base = Path(manifest).parent
        for line in Path(manifest).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line:
                continue
            path = Path(line)
            if not path.is_absolute():
                path = base / path
            entries.append((line, path))
    else:
        raise ValueError("either input_dir or manifest is required")
    entries.sort(key=lambda e: e[0])
    return entries


def mine_files(
    entries: list[tuple[str, Path]],
    stats: MiningStats,
    max_examples: int | None = None,
    placeholder: Placeholder = Placeholder(1),
) -> Iterator[MaskedExample]:
    """Mine masked examples from corpus files, updating ``stats`` in place."""
    for file_id, path in entries:
        if max_examples is not None and stats.examples_emitted >= max_examples:
            return
        stats.files_seen += 1
        data = path.read_bytes()
        functions, parsed = extract_functions_checked(data, file_id)
        if not parsed:
            stats.files_skipped += 1
            stats.skipped_files.append(file_id)
            logger.warning("skipping unparseable file %s", file_id)
            continue
        stats.files_parsed += 1
        stats.functions_extracted += len(functions)
        for fn in functions:
            if max_examples is not None and stats.examples_emitted >= max_examples:
                return
            sites = collect_identifiers(fn)
            if not sites:
                stats.functions_without_sites += 1
                continue
            target = select_mask_target(sites)
            try:
                example = mask_identifier(fn, target, placeholder)
            except PlaceholderCollisionError:
                stats.examples_skipped_collision += 1
                continue
            stats.examples_emitted += 1
            yield example
