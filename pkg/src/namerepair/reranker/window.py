"""Code-context windows around the placeholder.

The window holds up to W lexical tokens on each side of the first placeholder
occurrence, with the placeholder replaced by the reserved mask token and
identifiers split into lowercase subtokens. As a light stand-in for data-flow
hints, the tokens of the statement enclosing each placeholder occurrence (up
to three occurrences) can be appended after the window.
"""

from __future__ import annotations

from ..identifiers import is_valid_identifier, split_subtokens
from ..mining.lexer import LexError, Token, tokenize
from ..mining.masking import MaskedExample
from .vocab import MASK_TOKEN

__all__ = ["context_tokens", "extract_context_window", "in_scope_names"]

_STATEMENT_BOUNDARY = frozenset((";", "{", "}"))
_MAX_HINT_OCCURRENCES = 3


def _lex_example(example: MaskedExample) -> list[Token]:
    return tokenize(example.input_text.encode("utf-8"), placeholder_aware=True)


def _convert(token: Token) -> list[str]:
    if token.kind == "placeholder":
        return [MASK_TOKEN]
    if token.kind == "ident" and is_valid_identifier(token.text):
        return split_subtokens(token.text)
    return [token.text]


def extract_context_window(example: MaskedExample, w: int) -> list[str]:
    """Window of up to ``w`` lexical tokens either side of the first placeholder.

    Identifiers are split into subtokens; the placeholder becomes the reserved
    mask token. Shorter contexts simply yield shorter lists (no padding).

    Raises:
        ValueError: when the input text contains no placeholder.
    """
    if w <= 0:
        raise ValueError("window size must be positive")
    try:
        tokens = _lex_example(example)
    except LexError as exc:
        raise ValueError(f"example {example.id} does not tokenize: {exc}") from exc
    centers = [i for i, t in enumerate(tokens) if t.kind == "placeholder"]
    if not centers:
        raise ValueError(f"example {example.id} contains no placeholder token")
    center = centers[0]
    out: list[str] = []
    for token in tokens[max(0, center - w) : center]:
        out.extend(_convert(token))
    out.append(MASK_TOKEN)
    for token in tokens[center + 1 : center + 1 + w]:
        out.extend(_convert(token))
    return out


def _statement_span(tokens: list[Token], at: int) -> tuple[int, int]:
    lo = at
    while lo > 0 and tokens[lo - 1].text not in _STATEMENT_BOUNDARY:
        lo -= 1
    hi = at
    while hi + 1 < len(tokens) and tokens[hi].text not in _STATEMENT_BOUNDARY:
        hi += 1
    return lo, hi


def context_tokens(example: MaskedExample, w: int, include_statement_hints: bool = True) -> list[str]:
    """Model input for one example: the window plus enclosing-statement hints."""
    out = extract_context_window(example, w)
    if not include_statement_hints:
        return out
    tokens = _lex_example(example)
    centers = [i for i, t in enumerate(tokens) if t.kind == "placeholder"]
    for center in centers[:_MAX_HINT_OCCURRENCES]:
        lo, hi = _statement_span(tokens, center)
        for token in tokens[lo : hi + 1]:
            out.extend(_convert(token))
    return out


def in_scope_names(example: MaskedExample) -> frozenset[str]:
    """Identifiers textually present in the masked function.

    Used as the collision set when scoring candidates: proposing a name that
    already appears in the function duplicates an in-scope identifier. The
    masked name itself is absent by construction.
    """
    try:
        tokens = _lex_example(example)
    except LexError:
        return frozenset()
    return frozenset(t.text for t in tokens if t.kind == "ident" and is_valid_identifier(t.text))
