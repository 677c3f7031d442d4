"""Variable-name-repair toolkit for C++.

Mines masked-identifier datasets from C++ source, obtains candidate
replacement names from pluggable generators, reranks candidates with a
trainable dual encoder, and scores systems with exact-match, top-5, and
embedding-based partial-credit metrics.
"""

from .identifiers import (
    CPP_KEYWORDS,
    Candidate,
    InvalidIdentifierError,
    Placeholder,
    is_valid_identifier,
    join_camel,
    split_subtokens,
)

__version__ = "0.1.0"

__all__ = [
    "CPP_KEYWORDS",
    "Candidate",
    "InvalidIdentifierError",
    "Placeholder",
    "is_valid_identifier",
    "join_camel",
    "split_subtokens",
    "__version__",
]
