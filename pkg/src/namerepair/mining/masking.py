"""Placeholder masking and its exact inverse.

Masking replaces every standalone occurrence of one identifier with the
placeholder token and touches nothing else, so substituting the original
name back reproduces the function text byte-for-byte. A function whose text
already contains the placeholder token literally is refused (the collision
would break the round trip).
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from ..identifiers import InvalidIdentifierError, Placeholder, is_valid_identifier
from .extract import SourceFunction
from .sites import IdentifierSite

__all__ = ["ExampleMeta", "MaskedExample", "PlaceholderCollisionError", "mask_identifier", "unmask"]


class PlaceholderCollisionError(ValueError):
    """The placeholder token already occurs literally in the function text."""


@dataclass(frozen=True)
class ExampleMeta:
    file_id: str
    byte_start: int
    kind: str
    occurrence_count: int


@dataclass(frozen=True)
class MaskedExample:
    """One masked function: the JSONL unit of the dataset.

    ``target_text`` maps placeholder tokens to gold names; this pipeline
    emits exactly one entry, though the format supports more.
    """

    id: str
    input_text: str
    target_text: dict[str, str]
    meta: ExampleMeta = field(compare=True)

    @property
    def gold(self) -> str:
        """The gold name of the single-placeholder configuration."""
        return next(iter(self.target_text.values()))

    @property
    def placeholder_tokens(self) -> list[str]:
        return list(self.target_text.keys())


def _standalone_pattern(name: str) -> re.Pattern[str]:
    return re.compile(r"(?<![A-Za-z0-9_])" + re.escape(name) + r"(?![A-Za-z0-9_])")


def example_id(file_id: str, byte_start: int, name: str) -> str:
    """Stable content hash identifying one masked example."""
    digest = hashlib.sha256(f"{file_id}\x00{byte_start}\x00{name}".encode("utf-8")).hexdigest()
    return digest[:16]


def mask_identifier(
    fn: SourceFunction, site: IdentifierSite, placeholder: Placeholder = Placeholder(1)
) -> MaskedExample:
    """Replace every standalone occurrence of ``site.name`` with the placeholder.

    Raises:
        PlaceholderCollisionError: if the placeholder token already appears
            literally in the function text (example must be skipped).
    """
    if placeholder.token in fn.text:
        raise PlaceholderCollisionError(
            f"{placeholder.token} occurs literally in {fn.file_id}@{fn.byte_start}"
        )
    input_text, count = _standalone_pattern(site.name).subn(placeholder.token, fn.text)
    if count == 0:
        raise ValueError(f"site {site.name!r} does not occur in the function text")
    return MaskedExample(
        id=example_id(fn.file_id, fn.byte_start, site.name),
        input_text=input_text,
        target_text={placeholder.token: site.name},
        meta=ExampleMeta(
            file_id=fn.file_id,
            byte_start=fn.byte_start,
            kind=site.kind,
            occurrence_count=count,
        ),
    )


def unmask(example: MaskedExample, name: str) -> str:
    """Substitute ``name`` for every placeholder token of the example.

    With the gold name this reproduces the original function text exactly.
    """
    if not is_valid_identifier(name):
        raise InvalidIdentifierError(f"not a valid identifier: {name!r}")
    text = example.input_text
    for token in example.target_text:
        text = text.replace(token, name)
    return text
