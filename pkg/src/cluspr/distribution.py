"""Distribute non-center tokens to the most related center.

Two relatedness measures are supported:

``clustcrypt``
    sum over the token's documents of contribution * ln(pair co-occurrence).
``cluspr``
    relative co-occurrence (shared-document agreement minus disparity over
    the symmetric difference), weighted by the token's frequency ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from cluspr.centers import choose_centers
from cluspr.corpus import CentralIndex
from cluspr.errors import DataError
from cluspr.matrices import KEstimate, MatrixBundle, build_bundle, estimate_k

STRATEGIES = ("clustcrypt", "cluspr")


@dataclass
class Cluster:
    id: int
    center: str
    members: dict[str, dict[str, int]] = field(default_factory=dict)

    def total_freq(self, token: str) -> int:
        return sum(self.members[token].values())


@dataclass
class ClusterSet:
    clusters: list[Cluster]
    strategy: str

    def __iter__(self):
        return iter(self.clusters)

    def __len__(self):
        return len(self.clusters)

    def by_id(self, cluster_id: int) -> Cluster:
        for c in self.clusters:
            if c.id == cluster_id:
                return c
        raise KeyError(cluster_id)

    def labels(self) -> dict[str, int]:
        return {t: c.id for c in self.clusters for t in c.members}

    def tokens(self) -> set[str]:
        return set(self.labels())

    def next_id(self) -> int:
        return max((c.id for c in self.clusters), default=-1) + 1

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy,
            "clusters": [
                {
                    "id": c.id,
                    "center": c.center,
                    "members": {
                        t: [[d, f] for d, f in c.members[t].items()] for t in sorted(c.members)
                    },
                }
                for c in sorted(self.clusters, key=lambda c: c.id)
            ],
        }

    @classmethod
    def from_json(cls, payload: Mapping) -> ClusterSet:
        try:
            clusters = [
                Cluster(
                    int(c["id"]),
                    str(c["center"]),
                    {t: {str(d): int(f) for d, f in plist} for t, plist in c["members"].items()},
                )
                for c in payload["clusters"]
            ]
            return cls(clusters, str(payload["strategy"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed clusters payload: {exc}") from exc


def check_partition(clusters: ClusterSet, tokens: Iterable[str]) -> None:
    """Raise unless every token sits in exactly one cluster."""
    seen: dict[str, int] = {}
    for c in clusters:
        if c.center not in c.members:
            raise AssertionError(f"cluster {c.id} does not contain its center")
        for t in c.members:
            if t in seen:
                raise AssertionError(f"token {t} in clusters {seen[t]} and {c.id}")
            seen[t] = c.id
    expected = set(tokens)
    if set(seen) != expected:
        missing = expected - set(seen)
        extra = set(seen) - expected
        raise AssertionError(f"partition mismatch: {len(missing)} missing, {len(extra)} extra")


# -- ClustCrypt ------------------------------------------------------------


def contribution(doc_id: str, token: str, index: CentralIndex) -> float:
    if token not in index:
        raise KeyError(token)
    return index.freq(token, doc_id) / index.total_freq(token)


def pair_cooccurrence_clustcrypt(token: str, doc_id: str, center: str, index: CentralIndex) -> float:
    total = index.total_freq(token) + index.total_freq(center)
    if total == 0:
        raise DataError("co-occurrence undefined for two empty tokens")
    return (index.freq(token, doc_id) + index.freq(center, doc_id)) / total


def relatedness_clustcrypt(center: str, token: str, index: CentralIndex) -> float:
    plist = index.postings[token]
    t_total = sum(plist.values())
    pair_total = t_total + index.total_freq(center)
    cpost = index.postings.get(center, {})
    r = 0.0
    for doc_id, f in plist.items():
        rho = (f + cpost.get(doc_id, 0)) / pair_total
        r += (f / t_total) * math.log(rho)
    return r


# -- ClusPr ----------------------------------------------------------------


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def relative_cooccurrence(t_i: str, t_j: str, doc_id: str, index: CentralIndex) -> float:
    """Co-occurrence minus disparity of two tokens in one document."""
    fi, fj = index.postings.get(t_i, {}), index.postings.get(t_j, {})
    Fi, Fj = set(fi), set(fj)
    if doc_id in Fi & Fj:
        co = Fi & Fj
        return _ratio(fi[doc_id], sum(fi[m] for m in co)) * _ratio(
            fj[doc_id], sum(fj[m] for m in co)
        )
    if doc_id in Fi ^ Fj:
        dis = Fi ^ Fj
        return -(
            _ratio(fi.get(doc_id, 0), sum(fi.get(m, 0) for m in dis))
            + _ratio(fj.get(doc_id, 0), sum(fj.get(m, 0) for m in dis))
        )
    return 0.0


def relatedness_cluspr(center: str, token: str, index: CentralIndex) -> float:
    ft = index.postings[token]
    fc = index.postings.get(center, {})
    t_total = sum(ft.values())
    if not t_total:
        raise DataError(f"token {token!r} has no postings")
    # Only the token's own documents carry weight, so the disparity terms
    # from the center's side never contribute and are skipped.
    co_t = co_c = dis_t = 0
    for d, f in ft.items():
        if d in fc:
            co_t += f
            co_c += fc[d]
        else:
            dis_t += f
    r = 0.0
    for d, f in ft.items():
        if d in fc:
            rho = _ratio(f, co_t) * _ratio(fc[d], co_c)
        else:
            rho = -_ratio(f, dis_t)
        r += rho * f / t_total
    return r


RELATEDNESS = {
    "clustcrypt": relatedness_clustcrypt,
    "cluspr": relatedness_cluspr,
}


def best_center(token: str, centers: Sequence[str], index: CentralIndex, strategy: str) -> int:
    """Position of the most related center; ties go to the earliest."""
    relate = RELATEDNESS[strategy]
    best, best_r = 0, -math.inf
    for pos, center in enumerate(centers):
        r = relate(center, token, index)
        if r > best_r:
            best, best_r = pos, r
    return best


def assign_tokens(centers: Sequence[str], index: CentralIndex, strategy: str = "cluspr") -> ClusterSet:
    if strategy not in RELATEDNESS:
        raise ValueError(f"unknown strategy {strategy!r}")
    if not centers:
        raise ValueError("at least one center is required")
    if len(set(centers)) != len(centers):
        raise ValueError("duplicate centers")
    clusters = [Cluster(i, c, {c: dict(index.postings[c])}) for i, c in enumerate(centers)]
    center_set = set(centers)
    for token in sorted(index.postings):
        if token in center_set:
            continue
        pos = best_center(token, centers, index, strategy)
        clusters[pos].members[token] = dict(index.postings[token])
    return ClusterSet(clusters, strategy)


@dataclass(frozen=True)
class ClusteringRun:
    clusters: ClusterSet
    bundle: MatrixBundle
    estimate: KEstimate
    centers: list[str]


def cluster_index(
    index: CentralIndex,
    strategy: str = "cluspr",
    k_override: int | None = None,
    trim: bool = True,
) -> ClusteringRun:
    """Full static pipeline: trim, estimate K, choose centers, distribute."""
    bundle = build_bundle(index, trim=trim)
    est = estimate_k(bundle.Q)
    k = est.k if k_override is None else k_override
    centers = choose_centers(k, bundle.separation(), index, bundle.tokens)
    clusters = assign_tokens(centers, index, strategy)
    check_partition(clusters, index.postings)
    return ClusteringRun(clusters, bundle, est, centers)
