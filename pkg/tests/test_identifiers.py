from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from namerepair.identifiers import (
    CPP_KEYWORDS,
    Candidate,
    InvalidIdentifierError,
    Placeholder,
    is_valid_identifier,
    join_camel,
    split_subtokens,
)


@pytest.mark.parametrize(
    "name,expected",
    [
        ("playerListUpdateTimer", ["player", "list", "update", "timer"]),
        ("_SC_GETPW_R_SIZE_MAX", ["sc", "getpw", "r", "size", "max"]),
        ("i", ["i"]),
        ("XMLParser", ["xml", "parser"]),
        ("buf2", ["buf", "2"]),
        ("jsonValue", ["json", "value"]),
        ("__double__under__", ["double", "under"]),
        ("HTML", ["html"]),
        ("getHTTPResponse2Code", ["get", "http", "response", "2", "code"]),
    ],
)
def test_split_subtokens(name, expected):
    assert split_subtokens(name) == expected


def test_split_rejects_invalid():
    with pytest.raises(InvalidIdentifierError):
        split_subtokens("2fast")
    with pytest.raises(InvalidIdentifierError):
        split_subtokens("for")
    with pytest.raises(InvalidIdentifierError):
        split_subtokens("")


@pytest.mark.parametrize(
    "text,expected",
    [
        ("jsonValue", True),
        ("2fast", False),
        ("for", False),
        ("_ok", True),
        ("has space", False),
        ("", False),
        ("a$b", False),
        ("while", False),
        ("whiles", True),
    ],
)
def test_is_valid_identifier(text, expected):
    assert is_valid_identifier(text) is expected


def test_keyword_list_is_cpp17():
    assert "constexpr" in CPP_KEYWORDS
    assert "thread_local" in CPP_KEYWORDS
    assert "xor_eq" in CPP_KEYWORDS
    # C++20 additions must not be rejected as keywords.
    assert is_valid_identifier("concept")
    assert is_valid_identifier("co_await")


_identifier = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,30}", fullmatch=True).filter(
    is_valid_identifier
)


@given(_identifier)
def test_subtokens_lowercase_nonempty(name):
    parts = split_subtokens(name)
    assert all(parts)
    assert all(p == p.lower() for p in parts)


@given(_identifier)
def test_subtokens_preserve_letters(name):
    # Concatenation equals the case-folded, underscore-stripped input.
    assert "".join(split_subtokens(name)) == name.lower().replace("_", "")


@given(_identifier)
def test_split_idempotent_under_rejoin(name):
    parts = split_subtokens(name)
    if not parts:  # names made only of underscores carry no subtokens
        return
    assert split_subtokens(join_camel(parts)) == parts


def test_placeholder_round_trip():
    assert Placeholder(1).token == "<ID_1>"
    assert Placeholder.parse("<ID_7>") == Placeholder(7)
    for idx in (1, 2, 10, 123):
        assert Placeholder.parse(Placeholder(idx).token).index == idx


@pytest.mark.parametrize("bad", ["<ID_0>", "<ID_01>", "ID_1", "<id_1>", "<ID_1> ", "<ID_>"])
def test_placeholder_rejects(bad):
    with pytest.raises(ValueError):
        Placeholder.parse(bad)


def test_placeholder_index_positive():
    with pytest.raises(ValueError):
        Placeholder(0)


def test_candidate_validates_name():
    Candidate("jsonValue", gen_logprob=-0.5)
    with pytest.raises(InvalidIdentifierError):
        Candidate("2fast")
