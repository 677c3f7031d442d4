"""Corpus mining: C++ parsing, identifier collection, masking, splits."""

from .extract import FunctionShape, SourceFunction, extract_functions, find_function_shape
from .lexer import LexError, Token, tokenize
from .masking import (
    ExampleMeta,
    MaskedExample,
    PlaceholderCollisionError,
    mask_identifier,
    unmask,
)
from .pipeline import CPP_SUFFIXES, MiningStats, discover_files, mine_files
from .records import parse_record, read_examples, to_json_line, write_examples
from .sites import IdentifierSite, collect_identifiers, select_mask_target, standalone_occurrences
from .splits import SplitResult, SplitSpec, make_splits

__all__ = [
    "CPP_SUFFIXES",
    "ExampleMeta",
    "FunctionShape",
    "IdentifierSite",
    "LexError",
    "MaskedExample",
    "MiningStats",
    "PlaceholderCollisionError",
    "SourceFunction",
    "SplitResult",
    "SplitSpec",
    "Token",
    "collect_identifiers",
    "discover_files",
    "extract_functions",
    "find_function_shape",
    "make_splits",
    "mask_identifier",
    "mine_files",
    "parse_record",
    "read_examples",
    "select_mask_target",
    "standalone_occurrences",
    "to_json_line",
    "tokenize",
    "unmask",
    "write_examples",
]
