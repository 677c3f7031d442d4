from __future__ import annotations

import pytest

from namerepair.identifiers import Placeholder
from namerepair.mining import (
    MaskedExample,
    PlaceholderCollisionError,
    collect_identifiers,
    extract_functions,
    mask_identifier,
    select_mask_target,
    standalone_occurrences,
    unmask,
)
from namerepair.mining.masking import ExampleMeta


def mine_one(src: bytes, target_name: str | None = None):
    fn = extract_functions(src, "t.cc")[0]
    sites = collect_identifiers(fn)
    if target_name is None:
        site = select_mask_target(sites)
    else:
        site = {s.name: s for s in sites}[target_name]
    return fn, site, mask_identifier(fn, site)


def test_lookaround_leaves_counter_untouched():
    fn, site, ex = mine_one(b"void f(){ int count = 0; count += counter; }", "count")
    assert ex.input_text == "void f(){ int <ID_1> = 0; <ID_1> += counter; }"


def test_lookaround_boundaries_both_sides():
    fn, site, ex = mine_one(b"void f(){ int i; mid = i; }", "i")
    assert ex.input_text == "void f(){ int <ID_1>; mid = <ID_1>; }"


def test_no_standalone_gold_remains_and_placeholder_present():
    fn, site, ex = mine_one(b"int f(int val){ int value = val; return val + value; }", "val")
    assert "<ID_1>" in ex.input_text
    assert standalone_occurrences(ex.input_text.encode(), "val") == ()
    assert "value" in ex.input_text


def test_round_trip_byte_exact(fixture_functions):
    for fn in fixture_functions:
        sites = collect_identifiers(fn)
        if not sites:
            continue
        site = select_mask_target(sites)
        ex = mask_identifier(fn, site)
        assert unmask(ex, site.name) == fn.text, fn.file_id


def test_masking_changes_only_target_occurrences(fixture_functions):
    # Diff the masked text against the original: every changed region must be
    # exactly one placeholder standing where the gold name stood.
    for fn in fixture_functions:
        sites = collect_identifiers(fn)
        if not sites:
            continue
        site = select_mask_target(sites)
        ex = mask_identifier(fn, site)
        rebuilt = ex.input_text.replace("<ID_1>", site.name)
        assert rebuilt == fn.text


def test_collision_refused():
    fn = extract_functions(b'void f(int x){ log("<ID_1>"); use(x); }', "t.cc")[0]
    site = collect_identifiers(fn)[0]
    with pytest.raises(PlaceholderCollisionError):
        mask_identifier(fn, site)


def test_custom_placeholder_index():
    fn = extract_functions(b"int f(int q){ return q; }", "t.cc")[0]
    site = collect_identifiers(fn)[0]
    ex = mask_identifier(fn, site, Placeholder(2))
    assert "<ID_2>" in ex.input_text
    assert unmask(ex, "q") == fn.text


def test_unmask_plain():
    ex = MaskedExample(
        id="x",
        input_text="int <ID_1> = 0;",
        target_text={"<ID_1>": "count"},
        meta=ExampleMeta("f.cc", 0, "local", 1),
    )
    assert unmask(ex, "count") == "int count = 0;"
    ex2 = MaskedExample(
        id="y",
        input_text="<ID_1>+<ID_1>",
        target_text={"<ID_1>": "x"},
        meta=ExampleMeta("f.cc", 0, "local", 2),
    )
    assert unmask(ex2, "x") == "x+x"


def test_meta_fields():
    fn, site, ex = mine_one(b"int f(int count){ return count; }")
    assert ex.meta.file_id == "t.cc"
    assert ex.meta.byte_start == fn.byte_start
    assert ex.meta.kind == "parameter"
    assert ex.meta.occurrence_count == 2
    assert ex.gold == "count"


def test_stable_ids():
    _, _, ex1 = mine_one(b"int f(int count){ return count; }")
    _, _, ex2 = mine_one(b"int f(int count){ return count; }")
    assert ex1.id == ex2.id and len(ex1.id) == 16


def test_every_emitted_gold_is_valid_identifier(fixture_functions):
    # Closed loop: whatever the miner selects as gold must satisfy the
    # identifier rules the rest of the pipeline assumes.
    from namerepair.identifiers import is_valid_identifier

    seen = 0
    for fn in fixture_functions:
        sites = collect_identifiers(fn)
        if not sites:
            continue
        ex = mask_identifier(fn, select_mask_target(sites))
        assert is_valid_identifier(ex.gold)
        seen += 1
    assert seen >= 40
