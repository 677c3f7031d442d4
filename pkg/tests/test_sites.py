from __future__ import annotations

import pytest

from namerepair.mining import (
    IdentifierSite,
    collect_identifiers,
    extract_functions,
    select_mask_target,
)


def only_function(src: bytes):
    fns = extract_functions(src, "t.cc")
    assert len(fns) == 1
    return fns[0]


def site_map(src: bytes):
    fn = only_function(src)
    return {s.name: s for s in collect_identifiers(fn)}


def test_parameters_with_occurrences():
    sites = site_map(b"int add(int a, int b){ return a+b; }")
    assert set(sites) == {"a", "b"}
    assert sites["a"].kind == "parameter"
    assert len(sites["a"].occurrences) == 2
    assert len(sites["b"].occurrences) == 2


def test_loop_index_collected():
    sites = site_map(b"void f(){ for(int i=0;i<3;++i){} }")
    assert set(sites) == {"i"}
    assert sites["i"].kind == "local"
    assert len(sites["i"].occurrences) == 3


def test_member_field_vs_local(fixture_corpus_dir):
    data = (fixture_corpus_dir / "members.cc").read_bytes()
    fn = [f for f in extract_functions(data, "members.cc") if "tally_sample" in f.text][0]
    sites = {s.name: s for s in collect_identifiers(fn)}
    # Only the local declaration and the parameter yield sites; the member
    # field contributes none.
    assert set(sites) == {"s", "count"}
    assert sites["count"].kind == "local"
    # Hand count: `int count = 0;` (1), `count += s.count;` (2, the member
    # access is textually standalone), `return count * s.weight;` (1).
    assert len(sites["count"].occurrences) == 4


def test_excludes_function_and_member_names():
    src = b"int calc(int x){ int y = helper(x); obj.field = y; ptr->slot = x; return ns::value + y; }"
    sites = site_map(src)
    assert set(sites) == {"x", "y"}


def test_occurrences_are_textual_standalone_matches():
    fn = only_function(b"int f(int count){ int counter = count; return counter; }")
    sites = {s.name: s for s in collect_identifiers(fn)}
    data = fn.text.encode()
    for name, site in sites.items():
        for off in site.occurrences:
            assert data[off : off + len(name)] == name.encode()
            assert off == 0 or chr(data[off - 1]) not in "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_"
    assert len(sites["count"].occurrences) == 2  # not the prefix of `counter`


def test_sites_ordered_by_first_occurrence():
    fn = only_function(b"void f(int beta, int alpha){ alpha = beta; }")
    names = [s.name for s in collect_identifiers(fn)]
    assert names == ["beta", "alpha"]


def test_condition_and_catch_declarations():
    src = (
        b"int f(){ if (auto hit = probe()) { return hit; } "
        b"try { go(); } catch (const Error& oops) { report(oops); } return 0; }"
    )
    sites = site_map(src)
    assert {"hit", "oops"} <= set(sites)


def test_range_for_binding():
    sites = site_map(b"int f(const V& items){ int acc=0; for (const auto& item : items) acc += item; return acc; }")
    assert {"items", "acc", "item"} <= set(sites)


def test_expressions_not_declarations():
    sites = site_map(b"void f(int x){ x = 1; helper(x); obj.run(); x = x + 2; }")
    assert set(sites) == {"x"}


def test_empty_when_no_sites():
    fn = only_function(b"void nop() { }")
    assert collect_identifiers(fn) == []


def test_select_mask_target_lexicographic():
    def fake_site(name: str) -> IdentifierSite:
        return IdentifierSite(name=name, kind="local", occurrences=(0,))

    chosen = select_mask_target([fake_site("count"), fake_site("buffer"), fake_site("i")])
    assert chosen.name == "buffer"
    assert select_mask_target([fake_site("i")]).name == "i"
    # Byte-wise order: 'T' (0x54) < '_' (0x5F) < 't' (0x74).
    chosen = select_mask_target([fake_site("_tmp"), fake_site("Tmp"), fake_site("tmp")])
    assert chosen.name == "Tmp"


def test_select_mask_target_requires_sites():
    with pytest.raises(ValueError):
        select_mask_target([])


def test_multi_declarator_statement():
    sites = site_map(b"void f(){ int lead = 0, trail = 1; use(lead, trail); }")
    assert set(sites) == {"lead", "trail"}


def test_else_if_condition_declaration():
    sites = site_map(
        b"int f(int x){ if (x) { return 1; } else if (int alt = probe(x)) { return alt; } return 0; }"
    )
    assert "alt" in sites
