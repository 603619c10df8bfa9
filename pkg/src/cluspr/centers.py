"""Center selection by uniqueness and centrality."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Mapping, Sequence

from cluspr.corpus import CentralIndex
from cluspr.errors import DataError


@dataclass(frozen=True)
class CenterCandidate:
    token: str
    uniqueness: float
    centrality: float


def uniqueness(token: str, covered: set[str] | frozenset[str], index: CentralIndex) -> float:
    """|A_i - U| / max(1, |A_i & U|) where A_i is the token's document set.

    The max(1, .) guard makes the first scanned token's uniqueness equal to
    its document count instead of dividing by zero.
    """
    docs = index.docs_of(token)
    return len(docs - covered) / max(1, len(docs & covered))


def centrality(omega: float, q: float) -> float:
    if not 0.0 <= q <= 1.0 + 1e-12:
        raise ValueError(f"separation factor {q} outside [0, 1]")
    return omega * q * (1.0 - q)


def scan_candidates(
    tokens: Sequence[str],
    separation: Mapping[str, float],
    index: CentralIndex,
) -> list[CenterCandidate]:
    """Walk ``tokens`` in order, accumulating covered documents; return the
    tokens whose uniqueness exceeded 1 at scan time."""
    covered: set[str] = set()
    out = []
    for token in tokens:
        omega = uniqueness(token, covered, index)
        if omega > 1:
            covered |= index.docs_of(token)
            out.append(CenterCandidate(token, omega, centrality(omega, separation[token])))
    return out


def choose_centers(
    k: int,
    separation: Mapping[str, float],
    index: CentralIndex,
    tokens: Sequence[str],
) -> list[str]:
    """Up to ``k`` centers with the largest centrality.

    ``tokens`` must already be in scan order (doc count descending, token
    ascending); ``separation`` maps each of them to its Q diagonal entry.
    Ties on centrality go to the lexicographically smaller token. If no
    token passes the uniqueness filter, the first scanned token is the
    only center.
    """
    if not len(index) or not tokens:
        raise DataError("cannot choose centers from an empty index")
    if k < 1:
        raise ValueError("k must be >= 1")
    heap = [(-c.centrality, c.token) for c in scan_candidates(tokens, separation, index)]
    if not heap:
        return [tokens[0]]
    heapq.heapify(heap)
    return [heapq.heappop(heap)[1] for _ in range(min(k, len(heap)))]
