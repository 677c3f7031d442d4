from __future__ import annotations

from pathlib import Path

import pytest

FIXTURE_CPP = Path(__file__).parent / "fixtures" / "cpp"

# Hand-counted function-definition totals per fixture file; the extraction
# tests treat these as the oracle.
FIXTURE_FUNCTION_COUNTS = {
    "basics.cc": 6,
    "broken.cc": 0,
    "classes.cc": 8,
    "control.cc": 6,
    "header_only.h": 3,
    "lookaround.cc": 4,
    "members.cc": 2,
    "misc.cc": 5,
    "not_utf8.cc": 0,
    "pointers.cc": 6,
    "strings.cc": 4,
    "templates.cc": 7,
}


@pytest.fixture(scope="session")
def fixture_corpus_dir() -> Path:
    return FIXTURE_CPP


@pytest.fixture(scope="session")
def fixture_functions():
    from namerepair.mining import discover_files, extract_functions

    functions = []
    for file_id, path in discover_files(FIXTURE_CPP):
        functions.extend(extract_functions(path.read_bytes(), file_id))
    return functions
