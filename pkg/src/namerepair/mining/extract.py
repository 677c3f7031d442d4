"""Function-definition extraction from C++ token streams.

A resilient, self-contained grammar subset: the scanner walks declaration
scopes (file, namespace, class body) statement by statement and recognizes a
function definition as a parameter-list group followed, after optional
specifiers and a constructor initializer list, by a brace-enclosed body.
Namespace, class, and ``extern "C"`` bodies are entered recursively so member
functions defined in-class are extracted too; declarations without bodies are
ignored.

The grammar is deliberately forgiving: unknown constructs are skipped, and a
file whose delimiters cannot be matched yields whatever was recognized before
the imbalance (nothing, if the damage precedes the first function). Known
limitations, acceptable at corpus scale: function-try-blocks, K&R definitions,
and code whose braces only balance under preprocessor conditionals.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lexer import LexError, Token, tokenize

__all__ = ["FunctionShape", "SourceFunction", "extract_functions", "find_function_shape"]


@dataclass(frozen=True)
class SourceFunction:
    """An extracted C++ function with byte-span provenance into its file."""

    file_id: str
    byte_start: int
    byte_end: int
    text: str

    def __post_init__(self) -> None:
        if not (0 <= self.byte_start < self.byte_end):
            raise ValueError(f"invalid span [{self.byte_start}, {self.byte_end})")
        if len(self.text.encode("utf-8")) != self.byte_end - self.byte_start:
            raise ValueError("text length does not match byte span")


@dataclass(frozen=True)
class FunctionShape:
    """Token indices locating the parts of one function definition.

    ``params_open``/``params_close`` bracket the parameter-list parens;
    ``body_open``/``body_close`` bracket the body braces. All indices refer to
    the token list the shape was derived from.
    """

    stmt_start: int
    params_open: int
    params_close: int
    body_open: int
    body_close: int


# Identifiers that cannot be the declarator-id right before a parameter list.
_DISALLOWED_PRE = frozenset(
    """
    if for while switch catch return sizeof alignof typeid decltype noexcept
    throw new delete case goto asm using typedef else do static_assert alignas
    requires and or not not_eq and_eq or_eq xor xor_eq bitand bitor compl
    """.split()
)

# Groups prefixed by these are specifier arguments, not parameter lists.
_SPECIFIER_GROUP_PRE = frozenset(
    "noexcept throw decltype alignas sizeof typeid requires __attribute__".split()
)

_CLASS_KEYWORDS = frozenset(("class", "struct", "union"))


def extract_functions(file_bytes: bytes, file_id: str) -> list[SourceFunction]:
    """Extract function-definition spans from one C++ file.

    Returns functions in document order. Files that fail to decode as UTF-8
    or to tokenize yield an empty list (skip-and-log policy); per-construct
    damage is skipped without aborting the file.
    """
    functions, _ = extract_functions_checked(file_bytes, file_id)
    return functions


def extract_functions_checked(file_bytes: bytes, file_id: str) -> tuple[list[SourceFunction], bool]:
    """Like :func:`extract_functions`, also reporting whether the file parsed.

    The boolean is False when the file had to be abandoned wholesale (bad
    UTF-8 or an unterminated literal/comment), which the mining manifest
    counts separately from files that simply contain no functions.
    """
    try:
        file_bytes.decode("utf-8")
    except UnicodeDecodeError:
        return [], False
    try:
        tokens = tokenize(file_bytes)
    except LexError:
        return [], False
    shapes: list[FunctionShape] = []
    _scan_scope(tokens, 0, len(tokens), shapes)
    functions = [
        SourceFunction(
            file_id=file_id,
            byte_start=tokens[s.stmt_start].start,
            byte_end=tokens[s.body_close].end,
            text=file_bytes[tokens[s.stmt_start].start : tokens[s.body_close].end].decode("utf-8"),
        )
        for s in shapes
    ]
    functions.sort(key=lambda f: f.byte_start)
    return functions, True


def find_function_shape(tokens: list[Token]) -> FunctionShape | None:
    """Locate the parameter list and body of a single function definition.

    Used to re-analyze an extracted function's own text; returns None when
    the tokens do not form exactly one recognizable definition.
    """
    shapes: list[FunctionShape] = []
    _scan_scope(tokens, 0, len(tokens), shapes)
    if len(shapes) != 1:
        return None
    return shapes[0]


def _match_forward(tokens: list[Token], i: int, open_text: str, close_text: str, hi: int) -> int | None:
    """Index of the punct closing the group opened at ``i``, or None."""
    depth = 0
    j = i
    while j < hi:
        t = tokens[j]
        if t.kind == "punct":
            if t.text == open_text:
                depth += 1
            elif t.text == close_text:
                depth -= 1
                if depth == 0:
                    return j
        j += 1
    return None


def _skip_template_args(tokens: list[Token], i: int, hi: int) -> int | None:
    """Skip a ``<...>`` template argument list starting at token ``i``.

    Returns the index just past the closing ``>``. Counts ``>>`` as two
    closers. Bails out (None) if a ``;`` or ``{`` interrupts, which means the
    ``<`` was a comparison after all.
    """
    if i >= hi or tokens[i].text != "<":
        return None
    depth = 0
    j = i
    while j < hi:
        t = tokens[j]
        if t.kind == "punct":
            if t.text == "<":
                depth += 1
            elif t.text == "<<":
                depth += 2
            elif t.text == ">":
                depth -= 1
                if depth == 0:
                    return j + 1
            elif t.text == ">>":
                depth -= 2
                if depth <= 0:
                    return j + 1
            elif t.text in (";", "{", "}"):
                return None
        j += 1
    return None


def _scan_scope(tokens: list[Token], lo: int, hi: int, out: list[FunctionShape]) -> None:
    """Walk one declaration scope, collecting function shapes.

    ``lo``/``hi`` delimit the token range of the scope body (exclusive of the
    enclosing braces, when any).
    """
    i = lo
    stmt = -1  # first token index of the current statement, -1 if none
    has_assign = False
    saw_colon = False
    class_stmt = False
    enum_stmt = False
    groups: list[tuple[int, int, bool]] = []  # (open, close, before_colon)

    def reset() -> None:
        nonlocal stmt, has_assign, saw_colon, class_stmt, enum_stmt, groups
        stmt = -1
        has_assign = False
        saw_colon = False
        class_stmt = False
        enum_stmt = False
        groups = []

    while i < hi:
        t = tokens[i]
        if stmt < 0:
            if t.kind == "punct" and t.text == ";":
                i += 1
                continue
            stmt = i

        if t.kind == "ident":
            text = t.text
            if i == stmt:
                if text == "template":
                    end = _skip_template_args(tokens, i + 1, hi)
                    if end is None:
                        reset()
                        i += 1
                        continue
                    # Span starts at the declaration proper, not the prefix.
                    reset()
                    i = end
                    continue
                if text == "namespace" or (text == "inline" and i + 1 < hi and tokens[i + 1].text == "namespace"):
                    i = _handle_namespace(tokens, i, hi, out)
                    reset()
                    continue
                if text == "extern" and i + 2 < hi and tokens[i + 1].kind == "string" and tokens[i + 2].text == "{":
                    close = _match_forward(tokens, i + 2, "{", "}", hi)
                    if close is None:
                        return
                    _scan_scope(tokens, i + 3, close, out)
                    i = close + 1
                    reset()
                    continue
            if text in _CLASS_KEYWORDS:
                class_stmt = True
            elif text == "enum":
                enum_stmt = True
            i += 1
            continue

        if t.kind != "punct":
            i += 1
            continue

        text = t.text
        if text == ";":
            reset()
            i += 1
            continue
        if text == "=":
            has_assign = True
            i += 1
            continue
        if text == ":" and i == stmt + 1 and tokens[stmt].kind == "ident":
            # Access specifier or label: restart the statement after it.
            reset()
            i += 1
            continue
        if text == ":":
            saw_colon = True
            i += 1
            continue
        if text == "(":
            close = _match_forward(tokens, i, "(", ")", hi)
            if close is None:
                return
            pre = tokens[i - 1] if i > stmt else None
            if not has_assign and not (pre is not None and pre.kind == "ident" and pre.text in _SPECIFIER_GROUP_PRE):
                groups.append((i, close, not saw_colon))
            i = close + 1
            continue
        if text == "[":
            close = _match_forward(tokens, i, "[", "]", hi)
            if close is None:
                return
            i = close + 1
            continue
        if text == "}":
            # Unbalanced closer for this scope; abandon it.
            return
        if text == "{":
            close = _match_forward(tokens, i, "{", "}", hi)
            if close is None:
                return
            if class_stmt and not groups and not has_assign:
                # Class/struct/union body: member functions live inside.
                _scan_scope(tokens, i + 1, close, out)
                i = close + 1
                class_stmt = False
                continue
            if enum_stmt and not groups and not has_assign:
                i = close + 1
                continue
            prev = tokens[i - 1] if i > stmt else None
            if (
                saw_colon
                and not has_assign
                and prev is not None
                and (prev.kind == "ident" or prev.text == ">")
            ):
                # Brace member-initializer inside a ctor-init list.
                i = close + 1
                continue
            if not has_assign and groups:
                shape = _classify_function(tokens, stmt, groups, i, close)
                if shape is not None:
                    out.append(shape)
                    i = close + 1
                    reset()
                    continue
            # Unknown brace group (brace init, anonymous aggregate, ...).
            i = close + 1
            continue
        i += 1

    return


def _handle_namespace(tokens: list[Token], i: int, hi: int, out: list[FunctionShape]) -> int:
    """Enter a namespace body; returns the index to resume scanning at."""
    j = i
    while j < hi and tokens[j].text not in ("{", ";", "="):
        j += 1
    if j >= hi or tokens[j].text != "{":
        # Alias or forward form; skip past the terminator.
        return j + 1 if j < hi else hi
    close = _match_forward(tokens, j, "{", "}", hi)
    if close is None:
        return hi
    _scan_scope(tokens, j + 1, close, out)
    return close + 1


def _classify_function(
    tokens: list[Token],
    stmt: int,
    groups: list[tuple[int, int, bool]],
    body_open: int,
    body_close: int,
) -> FunctionShape | None:
    """Decide whether the pending statement is a function definition."""
    # Parameter list: the last paren group before the ctor-init colon, if one
    # was seen, else the last group outright.
    pre_colon = [g for g in groups if g[2]]
    params = pre_colon[-1] if pre_colon else groups[-1]
    params_open, params_close, _ = params

    pre_idx = params_open - 1
    if pre_idx < stmt:
        return None
    pre = tokens[pre_idx]
    has_operator = any(
        tokens[k].kind == "ident" and tokens[k].text == "operator" for k in range(stmt, params_open)
    )
    if not has_operator:
        if pre.kind != "ident" or pre.text in _DISALLOWED_PRE:
            return None

    # Between the parameter list and the body only specifiers, trailing
    # return types, and a ctor-init list may appear.
    saw_colon = False
    last_group_close = groups[-1][1]
    for k in range(params_close + 1, body_open):
        tk = tokens[k]
        if tk.kind == "ident" and tk.text == "try":
            return None  # function-try-block: unsupported, skip
        if tk.kind == "punct":
            if tk.text == ":":
                saw_colon = True
            elif tk.text == "," and not saw_colon and k > last_group_close:
                return None  # declarator list, not a function

    return FunctionShape(
        stmt_start=stmt,
        params_open=params_open,
        params_close=params_close,
        body_open=body_open,
        body_close=body_close,
    )
