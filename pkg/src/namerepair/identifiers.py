"""Identifier-domain vocabulary shared by every stage of the pipeline.

Defines what counts as a valid C++ identifier, how identifiers break into
lowercase subtokens, the placeholder token format, and the candidate record
carried from generation through reranking to evaluation.

All functions here are pure and operate on immutable values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

__all__ = [
    "CPP_KEYWORDS",
    "Candidate",
    "InvalidIdentifierError",
    "Placeholder",
    "is_valid_identifier",
    "join_camel",
    "split_subtokens",
]


class InvalidIdentifierError(ValueError):
    """Raised when a string fails the C++ identifier lexical rule."""


def _load_keywords() -> frozenset[str]:
    text = resources.files("namerepair.data").joinpath("cpp_keywords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


#: C++17 keyword set (including alternative operator spellings), frozen in a
#: data file so the reject list is reproducible.
CPP_KEYWORDS: frozenset[str] = _load_keywords()

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# Alpha runs and digit runs are split first; alpha runs are then broken at
# camelCase boundaries. An all-caps run ends one character before the next
# lowercase letter, so `XMLParser` splits as `XML` + `Parser`.
_RUN_RE = re.compile(r"[A-Za-z]+|[0-9]+")
_CAMEL_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+")


def is_valid_identifier(text: str) -> bool:
    """Return True iff ``text`` is a lexically valid, non-keyword C++ identifier.

    ASCII only: the first character must be a letter or underscore, the rest
    letters, digits, or underscores, and the result must not be a reserved
    keyword. Total function; never raises.
    """
    if not isinstance(text, str) or not text:
        return False
    if not _IDENT_RE.match(text):
        return False
    return text not in CPP_KEYWORDS


def split_subtokens(name: str) -> list[str]:
    """Split an identifier into lowercase subtokens.

    Splits on underscores and camelCase boundaries. Consecutive capitals are
    treated as an acronym run that ends one character before the next
    lowercase letter (`XMLParser` -> `xml`, `parser`). Digit runs form their
    own subtokens (`buf2` -> `buf`, `2`). Empty segments from leading,
    trailing, or doubled underscores are dropped.

    Raises:
        InvalidIdentifierError: if ``name`` is not a valid identifier.
    """
    if not is_valid_identifier(name):
        raise InvalidIdentifierError(f"not a valid C++ identifier: {name!r}")
    subtokens: list[str] = []
    for segment in name.split("_"):
        for run in _RUN_RE.findall(segment):
            if run.isdigit():
                subtokens.append(run)
            else:
                subtokens.extend(piece.lower() for piece in _CAMEL_RE.findall(run))
    return subtokens


def join_camel(subtokens: list[str]) -> str:
    """Re-join subtokens into a camelCase identifier whose split is stable.

    Inverse direction used by the idempotence property:
    ``split_subtokens(join_camel(split_subtokens(x))) == split_subtokens(x)``.
    An underscore is inserted only where capitalization cannot encode the
    boundary: between two digit runs, and after a single-letter subtoken whose
    capital would otherwise fuse into an acronym run.
    """
    if not subtokens:
        raise ValueError("cannot join an empty subtoken list")
    out = subtokens[0]
    for piece in subtokens[1:]:
        capped = piece[:1].upper() + piece[1:]
        prev = out[-1]
        if (prev.isdigit() and piece[0].isdigit()) or (prev.isupper() and piece[0].isalpha()):
            out += "_" + capped
        else:
            out += capped
    # A leading digit run needs an underscore to stay a valid identifier, and
    # a join that lands on a keyword (e.g. ["if"]) needs a trailing one; the
    # splitter drops both again.
    if out[0].isdigit():
        out = "_" + out
    if out in CPP_KEYWORDS:
        out += "_"
    return out


_PLACEHOLDER_RE = re.compile(r"<ID_([1-9][0-9]*)>\Z")


@dataclass(frozen=True)
class Placeholder:
    """Mask token standing in for one identifier, rendered as ``<ID_{index}>``."""

    index: int = 1

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"placeholder index must be >= 1, got {self.index}")

    @property
    def token(self) -> str:
        return f"<ID_{self.index}>"

    @classmethod
    def parse(cls, token: str) -> Placeholder:
        """Parse a rendered token back into a Placeholder (round-trip exact)."""
        m = _PLACEHOLDER_RE.match(token)
        if not m:
            raise ValueError(f"not a placeholder token: {token!r}")
        return cls(index=int(m.group(1)))


@dataclass(frozen=True)
class Candidate:
    """A proposed replacement name with optional generator and reranker scores.

    ``gen_logprob`` is on the natural-log scale when the generator reports
    token log-probabilities; ``rerank_score`` is populated by the reranker.
    """

    name: str
    gen_logprob: float | None = None
    rerank_score: float | None = None

    def __post_init__(self) -> None:
        if not is_valid_identifier(self.name):
            raise InvalidIdentifierError(f"candidate name is not a valid identifier: {self.name!r}")
