"""Pruned search over clustered postings with TF-IDF ranking."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from cluspr.abstracts import DEFAULT_TOP_C, Abstract, prune
from cluspr.corpus import STOPWORDS, CentralIndex, Document, extract_keywords, pseudonymize

log = logging.getLogger(__name__)

DEFAULT_LIMIT = 10
# queries are short; keep every distinct keyword
_QUERY_TERMS = 64


@dataclass
class SearchResult:
    results: list[tuple[str, float]] = field(default_factory=list)
    clusters_searched: list[int] = field(default_factory=list)

    @property
    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.results]

    def to_json(self) -> dict:
        return {
            "results": [{"doc_id": d, "score": s} for d, s in self.results],
            "clusters_searched": list(self.clusters_searched),
        }


def tfidf(token: str, doc_id: str, candidates: Iterable[str], postings: Mapping[str, Mapping[str, int]]) -> float:
    """Raw term frequency times ln(|candidates| / df), df scoped to candidates."""
    cand = set(candidates)
    if not cand:
        raise ValueError("candidate document set is empty")
    plist = postings.get(token, {})
    tf = plist.get(doc_id, 0)
    if not tf or doc_id not in cand:
        return 0.0
    df = sum(1 for d in plist if d in cand)
    return tf * math.log(len(cand) / df)


def rank(tokens: Sequence[str], postings: Mapping[str, Mapping[str, int]], limit: int | None = DEFAULT_LIMIT) -> list[tuple[str, float]]:
    """Rank every document holding any of ``tokens`` by summed TF-IDF
    (uniform weight 1.0 per query token)."""
    matched = [t for t in dict.fromkeys(tokens) if t in postings]
    candidates = {d for t in matched for d in postings[t]}
    if not candidates:
        return []
    scores = {d: sum(tfidf(t, d, candidates, postings) for t in matched) for d in candidates}
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ordered if limit is None else ordered[:limit]


def query_terms(query: str, stopwords=STOPWORDS) -> list[str]:
    if not query.strip():
        return []
    return [kw.term for kw in extract_keywords(Document("query", query), _QUERY_TERMS, stopwords)]


def search(
    query: str,
    index: CentralIndex,
    clusters,
    abstracts: Sequence[Abstract],
    sim,
    key: bytes,
    top_c: int = DEFAULT_TOP_C,
    limit: int | None = DEFAULT_LIMIT,
) -> SearchResult:
    terms = query_terms(query)
    if not terms:
        return SearchResult()
    tokens = [pseudonymize(t, key) for t in terms]
    if not any(t in index for t in tokens):
        log.warning("no query token occurs in the index; wrong key or unknown terms")
    searched = prune(terms, abstracts, sim, top_c)
    wanted = set(searched)
    postings: dict[str, dict[str, int]] = {}
    for c in clusters:
        if c.id in wanted:
            for t in tokens:
                if t in c.members:
                    postings[t] = c.members[t]
    return SearchResult(rank(tokens, postings, limit), searched)


def search_index(query: str, index: CentralIndex, key: bytes, limit: int | None = DEFAULT_LIMIT) -> SearchResult:
    """Exhaustive, un-pruned search over the whole central index."""
    tokens = [pseudonymize(t, key) for t in query_terms(query)]
    return SearchResult(rank(tokens, index.postings, limit), [])
