"""Topic clustering over deterministically pseudonymized keyword indexes."""

from cluspr.corpus import (
    CentralIndex,
    Document,
    Keyword,
    build_index,
    extract_keywords,
    merge_batch,
    pseudonymize,
)
from cluspr.errors import DataError

__version__ = "0.1.0"

__all__ = [
    "CentralIndex",
    "DataError",
    "Document",
    "Keyword",
    "build_index",
    "extract_keywords",
    "merge_batch",
    "pseudonymize",
]
