"""Plaintext cluster abstracts, word-vector similarity and query pruning.

Everything here runs on the trusted side: abstracts and the
``token -> term`` keymap hold plaintext and never go into cloud-side files.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from cluspr.errors import DataError

DEFAULT_ABSTRACT_TERMS = 25
DEFAULT_TOP_C = 3
EMBEDDINGS_ENV = "CLUSPR_EMBEDDINGS"


class SimilarityProvider:
    """Cosine similarity over a fixed vocabulary of word vectors.

    Out-of-vocabulary terms have similarity 0 with everything.
    """

    def __init__(self, vectors: Mapping[str, Sequence[float]] | None = None):
        vectors = dict(vectors or {})
        self.dim = 0
        self._unit: dict[str, np.ndarray] = {}
        for term, vec in vectors.items():
            arr = np.asarray(vec, dtype=float)
            if not self.dim:
                self.dim = arr.shape[0]
            elif arr.shape != (self.dim,):
                raise DataError(f"vector for {term!r} has dimension {arr.size}, expected {self.dim}")
            norm = np.linalg.norm(arr)
            self._unit[term] = arr / norm if norm else arr
        self._cache: dict[tuple[str, str], float] = {}

    def __len__(self):
        return len(self._unit)

    def __contains__(self, term):
        return term in self._unit

    def sim(self, a: str, b: str) -> float:
        if a not in self._unit or b not in self._unit:
            return 0.0
        key = (a, b) if a <= b else (b, a)
        hit = self._cache.get(key)
        if hit is None:
            hit = float(np.clip(self._unit[a] @ self._unit[b], -1.0, 1.0))
            self._cache[key] = hit
        return hit

    __call__ = sim


def load_embeddings(path: str | Path) -> SimilarityProvider:
    """Read word vectors in the text format ``term v1 ... vD`` per line,
    with an optional leading ``count dim`` header."""
    vectors: dict[str, list[float]] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty embeddings file")
    first = lines[0].split()
    if len(first) == 2 and all(p.isdigit() for p in first):
        lines = lines[1:]
    for lineno, line in enumerate(lines, 1):
        term, *values = line.split()
        try:
            vec = [float(v) for v in values]
        except ValueError as exc:
            raise DataError(f"{path}: bad float for {term!r}: {exc}") from exc
        if dim is None:
            dim = len(vec)
            if not dim:
                raise DataError(f"{path}: {term!r} has no vector components")
        elif len(vec) != dim:
            raise DataError(f"{path}: {term!r} has dimension {len(vec)}, expected {dim}")
        vectors[term] = vec
    return SimilarityProvider(vectors)


def resolve_embeddings(path: str | Path | None) -> SimilarityProvider:
    """Load from ``path`` or the environment; an empty provider otherwise."""
    path = path or os.environ.get(EMBEDDINGS_ENV)
    return load_embeddings(path) if path else SimilarityProvider()


@dataclass(frozen=True)
class Abstract:
    cluster_id: int
    terms: tuple[str, ...]


def build_abstracts(clusters, keymap: Mapping[str, str], n: int = DEFAULT_ABSTRACT_TERMS) -> list[Abstract]:
    """Top-``n`` member terms per cluster by total frequency (ties by term)."""
    out = []
    for c in sorted(clusters, key=lambda c: c.id):
        ranked = []
        for token in c.members:
            if token not in keymap:
                raise DataError(f"keymap has no entry for token {token}")
            ranked.append((-c.total_freq(token), keymap[token]))
        ranked.sort()
        out.append(Abstract(c.id, tuple(term for _, term in ranked[:n])))
    return out


def abstract_coherency(terms: Sequence[str], sim) -> float:
    """Mean similarity over the unordered pairs of distinct terms."""
    if len(terms) < 2:
        raise ValueError("coherency needs at least two terms")
    pairs = list(itertools.combinations(terms, 2))
    return sum(sim(a, b) for a, b in pairs) / len(pairs)


def score_abstract(query_terms: Sequence[str], abstract: Abstract, sim) -> float:
    if not query_terms or not abstract.terms:
        return 0.0
    total = sum(sim(q, a) for q in query_terms for a in abstract.terms)
    return total / (len(query_terms) * len(abstract.terms))


def prune(query_terms: Sequence[str], abstracts: Sequence[Abstract], sim, top_c: int = DEFAULT_TOP_C) -> list[int]:
    """Ids of the ``top_c`` abstracts most similar to the query."""
    if top_c < 1:
        raise ValueError("top_c must be >= 1")
    scored = sorted(
        ((-score_abstract(query_terms, a, sim), a.cluster_id) for a in abstracts),
    )
    return [cid for _, cid in scored[:top_c]]


def abstracts_to_json(abstracts: Sequence[Abstract], n: int) -> dict:
    return {
        "n": n,
        "abstracts": [{"cluster_id": a.cluster_id, "terms": list(a.terms)} for a in abstracts],
    }


def abstracts_from_json(payload: Mapping) -> tuple[list[Abstract], int]:
    try:
        items = [Abstract(int(a["cluster_id"]), tuple(a["terms"])) for a in payload["abstracts"]]
        return items, int(payload["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed abstracts payload: {exc}") from exc
