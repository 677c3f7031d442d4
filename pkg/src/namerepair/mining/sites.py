"""Maskable-identifier collection within one extracted function.

Declaration discovery is structural (parameter lists, local declaration
statements, loop/condition init-statements, catch clauses); occurrence
discovery is textual: every standalone occurrence of a collected name inside
the function text counts, where standalone means not adjacent to an
identifier character on either side. The two deliberately differ: shadowed
reuses and same-named member accesses share the declared name's occurrence
list and are masked together.

Function names, member accesses, type names, and labels never produce sites
because only declarator names are collected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..identifiers import CPP_KEYWORDS, is_valid_identifier
from .extract import SourceFunction, find_function_shape
from .lexer import LexError, Token, tokenize

__all__ = ["IdentifierSite", "collect_identifiers", "select_mask_target", "standalone_occurrences"]


@dataclass(frozen=True)
class IdentifierSite:
    """One maskable name: where it was declared and everywhere it occurs.

    ``occurrences`` holds byte offsets (into the function text) of every
    standalone occurrence, in increasing order.
    """

    name: str
    kind: str  # "parameter" | "local"
    occurrences: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("parameter", "local"):
            raise ValueError(f"unknown site kind: {self.kind}")
        if not self.occurrences:
            raise ValueError(f"site for {self.name!r} has no occurrences")
        if any(a >= b for a, b in zip(self.occurrences, self.occurrences[1:])):
            raise ValueError("occurrences must be strictly increasing")


def standalone_occurrences(text_bytes: bytes, name: str) -> tuple[int, ...]:
    """Byte offsets of every standalone occurrence of ``name``."""
    pattern = re.compile(
        rb"(?<![A-Za-z0-9_])" + re.escape(name.encode("ascii")) + rb"(?![A-Za-z0-9_])"
    )
    return tuple(m.start() for m in pattern.finditer(text_bytes))


def collect_identifiers(fn: SourceFunction) -> list[IdentifierSite]:
    """Collect parameter and local-variable sites for one function.

    Returns sites ordered by first occurrence offset; an empty list when the
    function has no maskable names (callers skip such functions).
    """
    data = fn.text.encode("utf-8")
    try:
        tokens = tokenize(data)
    except LexError:
        return []
    shape = find_function_shape(tokens)
    if shape is None:
        return []

    declared: dict[str, str] = {}  # name -> kind, first declaration wins

    for name in _parameter_names(tokens[shape.params_open + 1 : shape.params_close]):
        declared.setdefault(name, "parameter")

    body = tokens[shape.body_open + 1 : shape.body_close]
    for name in _local_declarations(body):
        declared.setdefault(name, "local")

    sites = []
    for name, kind in declared.items():
        occ = standalone_occurrences(data, name)
        if occ:
            sites.append(IdentifierSite(name=name, kind=kind, occurrences=occ))
    sites.sort(key=lambda s: s.occurrences[0])
    return sites


def select_mask_target(sites: list[IdentifierSite]) -> IdentifierSite:
    """Pick the site to mask: first name in ascending byte-wise order.

    Ties between same-named sites break by earliest first occurrence.
    """
    if not sites:
        raise ValueError("select_mask_target requires a non-empty site list")
    return min(sites, key=lambda s: (s.name.encode("ascii"), s.occurrences[0]))


# --- declaration parsing heuristics ---------------------------------------

_TYPE_KEYWORDS = frozenset(
    "auto bool char char16_t char32_t wchar_t short int long float double signed unsigned void".split()
)
_SPECIFIER_KEYWORDS = frozenset(
    "const constexpr static volatile register mutable inline thread_local extern typename struct class enum union".split()
)
# Statements starting with these are never local declarations.
_STMT_REJECT = frozenset(
    """
    if else for while do switch case default break continue return goto try
    catch throw new delete this sizeof alignof static_assert using typedef
    namespace public private protected friend operator template asm true false
    nullptr and or not not_eq and_eq or_eq xor xor_eq bitand bitor compl
    """.split()
)

_DECLARATOR_PREFIX = frozenset(("*", "&", "&&"))


def _parameter_names(tokens: list[Token]) -> list[str]:
    """Names declared by a parameter list (or catch clause)."""
    names = []
    for chunk in _split_top_level(tokens, ","):
        name = _parameter_name(chunk)
        if name is not None and is_valid_identifier(name):
            names.append(name)
    return names


def _parameter_name(chunk: list[Token]) -> str | None:
    if not chunk:
        return None
    eq = _find_top_level(chunk, "=")
    if eq is not None:
        chunk = chunk[:eq]
    # Strip trailing array extents.
    while chunk and chunk[-1].text == "]":
        open_idx = _match_backward(chunk, len(chunk) - 1, "[", "]")
        if open_idx is None:
            return None
        chunk = chunk[:open_idx]
    if not chunk:
        return None
    last = chunk[-1]
    if last.text == ")":
        # Function-pointer declarator: the name lives in its own parens.
        open_idx = _match_backward(chunk, len(chunk) - 1, "(", ")")
        if open_idx is None:
            return None
        inner_close = open_idx - 1
        if inner_close <= 0 or chunk[inner_close].text != ")":
            return None
        inner_open = _match_backward(chunk, inner_close, "(", ")")
        if inner_open is None:
            return None
        candidates = [
            t.text
            for k, t in enumerate(chunk[inner_open + 1 : inner_close], start=inner_open + 1)
            if t.kind == "ident"
            and t.text not in CPP_KEYWORDS
            and chunk[k - 1].text != "::"
            and (k + 1 >= inner_close or chunk[k + 1].text != "::")
        ]
        return candidates[-1] if candidates else None
    if last.kind != "ident" or last.text in CPP_KEYWORDS:
        return None
    if len(chunk) == 1:
        return None  # a lone token is a type, not a name
    prev = chunk[-2]
    if prev.text == "::":
        return None  # qualified type with no declarator
    return last.text


def _local_declarations(body: list[Token]) -> list[str]:
    """Names declared by statements inside a function body, in token order."""
    names: list[str] = []
    stmt: list[Token] = []
    i = 0
    n = len(body)
    while i < n:
        t = body[i]
        if t.kind == "punct" and t.text in (";", "}"):
            names.extend(_declaration_names(stmt))
            stmt = []
            i += 1
            continue
        if t.kind == "punct" and t.text == "{":
            names.extend(_declaration_names(stmt))
            stmt = []
            i += 1
            continue
        if t.kind == "ident" and not stmt and t.text == "else":
            i += 1  # transparent: `else if (decl)` still declares
            continue
        if t.kind == "ident" and not stmt and t.text in ("for", "if", "while", "switch", "catch"):
            close, inner = _following_group(body, i + 1, n)
            if close is None:
                i += 1
                continue
            if t.text == "for":
                semi = _find_top_level(inner, ";")
                if semi is not None:
                    names.extend(_declaration_names(inner[:semi]))
                else:
                    colon = _find_top_level(inner, ":")
                    if colon is not None:
                        names.extend(_range_binding_names(inner[:colon]))
            elif t.text == "catch":
                names.extend(_parameter_names(inner))
            else:
                semi = _find_top_level(inner, ";")
                if semi is not None:
                    names.extend(_declaration_names(inner[:semi]))
                    names.extend(_declaration_names(inner[semi + 1 :]))
                else:
                    names.extend(_declaration_names(inner))
            i = close + 1
            stmt = []
            continue
        stmt.append(t)
        i += 1
    names.extend(_declaration_names(stmt))
    return names


def _following_group(body: list[Token], start: int, n: int) -> tuple[int | None, list[Token]]:
    """The paren group right after a control keyword, as (close index, inner tokens)."""
    if start >= n or body[start].text != "(":
        return None, []
    depth = 0
    for j in range(start, n):
        if body[j].kind == "punct":
            if body[j].text == "(":
                depth += 1
            elif body[j].text == ")":
                depth -= 1
                if depth == 0:
                    return j, body[start + 1 : j]
    return None, []


def _range_binding_names(decl: list[Token]) -> list[str]:
    """The loop variable of a range-based for; same shape as a declarator."""
    if decl and decl[-1].kind == "ident" and decl[-1].text not in CPP_KEYWORDS and len(decl) > 1:
        return [decl[-1].text] if is_valid_identifier(decl[-1].text) else []
    return []

def _declaration_names(stmt: list[Token]) -> list[str]:
    """Parse one statement; names it declares, or [] if not a declaration."""
    idx = 0
    n = len(stmt)
    while idx < n and stmt[idx].kind == "ident" and stmt[idx].text in _SPECIFIER_KEYWORDS:
        idx += 1
    if idx >= n or stmt[idx].kind != "ident":
        return []
    head = stmt[idx].text
    if head in _STMT_REJECT:
        return []

    if head == "decltype":
        nxt = _skip_group_at(stmt, idx + 1, "(", ")")
        if nxt is None:
            return []
        idx = nxt
    elif head in _TYPE_KEYWORDS:
        while idx < n and stmt[idx].kind == "ident" and stmt[idx].text in (_TYPE_KEYWORDS | _SPECIFIER_KEYWORDS):
            idx += 1
    else:
        idx = _consume_qualified_type(stmt, idx)
        if idx is None:
            return []

    names: list[str] = []
    while True:
        while idx < n and (stmt[idx].text in _DECLARATOR_PREFIX or (stmt[idx].kind == "ident" and stmt[idx].text in ("const", "volatile"))):
            idx += 1
        if idx >= n or stmt[idx].kind != "ident" or stmt[idx].text in CPP_KEYWORDS:
            return []
        name = stmt[idx].text
        idx += 1
        # Declarator tail: array extents, then an initializer or nothing.
        while idx < n and stmt[idx].text == "[":
            nxt = _skip_group_at(stmt, idx, "[", "]")
            if nxt is None:
                return []
            idx = nxt
        if idx < n:
            t = stmt[idx]
            if t.text == "=":
                idx = _skip_initializer(stmt, idx + 1)
            elif t.text == "(":
                nxt = _skip_group_at(stmt, idx, "(", ")")
                if nxt is None:
                    return []
                inner_first = stmt[idx + 1] if idx + 1 < nxt - 1 else None
                if inner_first is not None and inner_first.kind == "ident" and inner_first.text in _TYPE_KEYWORDS:
                    return []  # `int f(int);`: a local function declaration
                idx = nxt
            elif t.text == "{":
                nxt = _skip_group_at(stmt, idx, "{", "}")
                if nxt is None:
                    return []
                idx = nxt
            elif t.text != ",":
                return []
        if is_valid_identifier(name):
            names.append(name)
        if idx >= n:
            return names
        if stmt[idx].text != ",":
            return []
        idx += 1


def _consume_qualified_type(stmt: list[Token], idx: int) -> int | None:
    """Consume `ns::Outer<Args>::Inner`-shaped type tokens; None if not a type."""
    n = len(stmt)
    if idx >= n or stmt[idx].kind != "ident" or stmt[idx].text in CPP_KEYWORDS:
        return None
    idx += 1
    while idx < n:
        if stmt[idx].text == "<":
            end = _skip_angles(stmt, idx)
            if end is None:
                return None  # comparison expression, not template args
            idx = end
        elif stmt[idx].text == "::":
            idx += 1
            if idx >= n or stmt[idx].kind != "ident":
                return None
            idx += 1
        else:
            break
    return idx


def _skip_angles(stmt: list[Token], idx: int) -> int | None:
    depth = 0
    n = len(stmt)
    while idx < n:
        text = stmt[idx].text
        if text == "<":
            depth += 1
        elif text == "<<":
            depth += 2
        elif text == ">":
            depth -= 1
            if depth == 0:
                return idx + 1
        elif text == ">>":
            depth -= 2
            if depth <= 0:
                return idx + 1
        elif text in (";", "{", "}"):
            return None
        idx += 1
    return None


def _skip_group_at(stmt: list[Token], idx: int, open_text: str, close_text: str) -> int | None:
    """Skip the balanced group opening at ``idx``; index just past the closer."""
    if idx >= len(stmt) or stmt[idx].text != open_text:
        return None
    depth = 0
    for j in range(idx, len(stmt)):
        if stmt[j].kind == "punct":
            if stmt[j].text == open_text:
                depth += 1
            elif stmt[j].text == close_text:
                depth -= 1
                if depth == 0:
                    return j + 1
    return None


def _skip_initializer(stmt: list[Token], idx: int) -> int:
    """Skip initializer tokens up to the next top-level comma."""
    depth = 0
    n = len(stmt)
    while idx < n:
        text = stmt[idx].text
        if stmt[idx].kind == "punct":
            if text in ("(", "[", "{"):
                depth += 1
            elif text in (")", "]", "}"):
                depth -= 1
            elif text == "," and depth == 0:
                return idx
        idx += 1
    return idx


def _split_top_level(tokens: list[Token], sep: str) -> list[list[Token]]:
    """Split on ``sep`` at zero paren/bracket/brace/angle depth."""
    chunks: list[list[Token]] = []
    current: list[Token] = []
    depth = 0
    angle = 0
    prev_kind = None
    for t in tokens:
        text = t.text
        if t.kind == "punct":
            if text in ("(", "[", "{"):
                depth += 1
            elif text in (")", "]", "}"):
                depth -= 1
            elif text == "<" and prev_kind == "ident":
                angle += 1
            elif text == ">" and angle > 0:
                angle -= 1
            elif text == ">>" and angle > 0:
                angle = max(0, angle - 2)
            elif text == sep and depth == 0 and angle == 0:
                chunks.append(current)
                current = []
                prev_kind = t.kind
                continue
        prev_kind = t.kind
        current.append(t)
    chunks.append(current)
    return [c for c in chunks if c]


def _find_top_level(tokens: list[Token], sep: str) -> int | None:
    depth = 0
    angle = 0
    prev_kind = None
    for i, t in enumerate(tokens):
        text = t.text
        if t.kind == "punct":
            if text in ("(", "[", "{"):
                depth += 1
            elif text in (")", "]", "}"):
                depth -= 1
            elif text == "<" and prev_kind == "ident":
                angle += 1
            elif text == ">" and angle > 0:
                angle -= 1
            elif text == sep and depth == 0 and angle == 0:
                return i
        prev_kind = t.kind
    return None


def _match_backward(tokens: list[Token], close_idx: int, open_text: str, close_text: str) -> int | None:
    depth = 0
    for j in range(close_idx, -1, -1):
        if tokens[j].kind == "punct":
            if tokens[j].text == close_text:
                depth += 1
            elif tokens[j].text == open_text:
                depth -= 1
                if depth == 0:
                    return j
    return None
