"""Byte-offset C++ tokenizer.

A resilient lexer over raw UTF-8 bytes: it recognizes comments, string and
character literals (including raw strings and encoding prefixes),
preprocessor directives (with line continuations), pp-numbers, identifiers,
and punctuators. Offsets are byte offsets into the input, which is what the
mining pipeline records for provenance.

The lexer is intentionally forgiving about content (stray non-ASCII bytes
become ``other`` tokens) but strict about delimiters: an unterminated block
comment, string, or raw literal raises LexError, and callers treat the whole
file as unparseable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = ["LexError", "Token", "tokenize"]


class LexError(ValueError):
    """Raised for unterminated comments or literals."""


@dataclass(frozen=True)
class Token:
    """One lexical token: ``kind`` plus its byte span in the source."""

    kind: str  # ident | number | string | char | comment | pp | punct | other | placeholder
    start: int
    end: int
    text: str


_WHITESPACE = b" \t\r\n\f\v"
_IDENT_START = frozenset(b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | frozenset(b"0123456789")
_DIGITS = frozenset(b"0123456789")

# Longest-match punctuators, three bytes down to one.
_PUNCTS3 = (b"<=>", b"<<=", b">>=", b"->*", b"...")
_PUNCTS2 = (
    b"::", b"->", b"++", b"--", b"<<", b">>", b"<=", b">=", b"==", b"!=",
    b"&&", b"||", b"+=", b"-=", b"*=", b"/=", b"%=", b"&=", b"|=", b"^=",
    b".*", b"##",
)

_STRING_PREFIXES = (b"u8R", b"uR", b"UR", b"LR", b"R", b"u8", b"u", b"U", b"L")

_PLACEHOLDER_AT = re.compile(rb"<ID_[1-9][0-9]*>")


def tokenize(data: bytes, *, keep_trivia: bool = False, placeholder_aware: bool = False) -> list[Token]:
    """Tokenize C++ source bytes.

    Args:
        data: raw UTF-8 source bytes.
        keep_trivia: include comment and preprocessor tokens in the output
            (whitespace is never emitted).
        placeholder_aware: recognize mask tokens like ``<ID_1>`` as single
            ``placeholder`` tokens instead of ``<``, ident, ``>``.

    Returns:
        Tokens in document order with byte offsets.

    Raises:
        LexError: on an unterminated block comment, string, char, or raw
            string literal.
    """
    tokens: list[Token] = []
    i = 0
    n = len(data)
    line_start = True  # only whitespace seen since the last newline

    def emit(kind: str, start: int, end: int) -> None:
        tokens.append(Token(kind, start, end, data[start:end].decode("utf-8", "replace")))

    while i < n:
        b = data[i]

        if b in _WHITESPACE:
            if b == 0x0A:
                line_start = True
            i += 1
            continue

        if placeholder_aware and b == 0x3C:  # '<'
            m = _PLACEHOLDER_AT.match(data, i)
            if m:
                emit("placeholder", i, m.end())
                i = m.end()
                line_start = False
                continue

        # Preprocessor directive: '#' as the first non-whitespace byte of a
        # line, consumed through line continuations so bodies of macros never
        # confuse brace matching.
        if b == 0x23 and line_start:  # '#'
            start = i
            i = _scan_pp_line(data, i)
            if keep_trivia:
                emit("pp", start, i)
            line_start = True
            continue

        line_start = False

        if b == 0x2F and i + 1 < n:  # '/'
            nxt = data[i + 1]
            if nxt == 0x2F:  # //
                start = i
                i = _scan_line_comment(data, i)
                if keep_trivia:
                    emit("comment", start, i)
                continue
            if nxt == 0x2A:  # /*
                start = i
                end = data.find(b"*/", i + 2)
                if end < 0:
                    raise LexError(f"unterminated block comment at byte {i}")
                i = end + 2
                if keep_trivia:
                    emit("comment", start, i)
                continue

        if b in _IDENT_START:
            start = i
            i += 1
            while i < n and data[i] in _IDENT_CONT:
                i += 1
            word = data[start:i]
            # String/char prefixes attach to the following quote.
            if i < n and data[i] in b"\"'" and word in _STRING_PREFIXES:
                if data[i] == 0x22 and word.endswith(b"R"):
                    i = _scan_raw_string(data, i)
                    emit("string", start, i)
                else:
                    kind = "string" if data[i] == 0x22 else "char"
                    i = _scan_quoted(data, i)
                    emit(kind, start, i)
                continue
            emit("ident", start, i)
            continue

        if b in _DIGITS or (b == 0x2E and i + 1 < n and data[i + 1] in _DIGITS):
            start = i
            i = _scan_number(data, i)
            emit("number", start, i)
            continue

        if b == 0x22:  # '"'
            start = i
            i = _scan_quoted(data, i)
            emit("string", start, i)
            continue

        if b == 0x27:  # "'"
            start = i
            i = _scan_quoted(data, i)
            emit("char", start, i)
            continue

        if b >= 0x80:
            # Non-ASCII outside literals: group the run into one opaque token.
            start = i
            while i < n and data[i] >= 0x80:
                i += 1
            emit("other", start, i)
            continue

        start = i
        chunk3 = data[i : i + 3]
        chunk2 = data[i : i + 2]
        if chunk3 in _PUNCTS3:
            i += 3
        elif chunk2 in _PUNCTS2:
            i += 2
        else:
            i += 1
        emit("punct", start, i)

    return tokens


def _scan_pp_line(data: bytes, i: int) -> int:
    n = len(data)
    while i < n:
        if data[i] == 0x5C:  # backslash: possible line splice
            j = i + 1
            if j < n and data[j] == 0x0D:
                j += 1
            if j < n and data[j] == 0x0A:
                i = j + 1
                continue
        if data[i] == 0x0A:
            return i
        i += 1
    return n


def _scan_line_comment(data: bytes, i: int) -> int:
    # Line splicing applies inside // comments as well.
    return _scan_pp_line(data, i)


def _scan_quoted(data: bytes, i: int) -> int:
    quote = data[i]
    n = len(data)
    i += 1
    while i < n:
        b = data[i]
        if b == 0x5C:  # escape
            i += 2
            continue
        if b == quote:
            return i + 1
        if b == 0x0A:
            break  # unterminated on this line
        i += 1
    kind = "string" if quote == 0x22 else "char"
    raise LexError(f"unterminated {kind} literal at byte {i}")


def _scan_raw_string(data: bytes, i: int) -> int:
    # data[i] == '"' ; raw form is "delim( ... )delim"
    n = len(data)
    j = data.find(b"(", i + 1)
    if j < 0 or j - (i + 1) > 16:
        raise LexError(f"malformed raw string literal at byte {i}")
    delim = data[i + 1 : j]
    closer = b")" + delim + b'"'
    end = data.find(closer, j + 1)
    if end < 0:
        raise LexError(f"unterminated raw string literal at byte {i}")
    return end + len(closer)


def _scan_number(data: bytes, i: int) -> int:
    # pp-number: digits, letters, underscores, dots, digit separators, and
    # signs directly after an exponent letter.
    n = len(data)
    i += 1
    while i < n:
        b = data[i]
        if b in _IDENT_CONT or b == 0x2E:
            i += 1
            continue
        if b == 0x27 and i + 1 < n and data[i + 1] in _IDENT_CONT:  # 1'000'000
            i += 2
            continue
        if b in b"+-" and data[i - 1] in b"eEpP":
            i += 1
            continue
        break
    return i
