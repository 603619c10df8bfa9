"""Batch (semi-dynamic) and per-document (fully dynamic) cluster maintenance.

Each update first asks the chi-square rule whether the accumulated new
tokens warrant a full re-cluster. If not, new tokens are admitted into
existing clusters through the plaintext abstracts: a token joins the
abstract holding its most similar term when that similarity exceeds
``theta``, otherwise it founds a singleton cluster.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from cluspr.abstracts import DEFAULT_ABSTRACT_TERMS, Abstract, abstract_coherency, build_abstracts
from cluspr.corpus import CentralIndex, merge_batch
from cluspr.distribution import Cluster, ClusterSet, check_partition, cluster_index
from cluspr.errors import DataError

log = logging.getLogger(__name__)

# chi-square critical value, one degree of freedom, 95% confidence
CHI2_CRITICAL = 3.841
BOOTSTRAP_THETA = 0.1


@dataclass(frozen=True)
class ReclusterDecision:
    chi2: float
    recluster: bool
    threshold: float = CHI2_CRITICAL


def recluster_decision(n_new: int, n_existing: int) -> ReclusterDecision:
    """Single-category goodness of fit with observed ``n_new`` against
    expected ``n_existing``. A small statistic keeps the null hypothesis,
    which here means: re-cluster."""
    if n_existing < 1:
        raise ValueError("n_existing must be >= 1; use the bootstrap path for empty state")
    chi2 = (n_new - n_existing) ** 2 / n_existing
    return ReclusterDecision(chi2, chi2 <= CHI2_CRITICAL)


def compute_theta(abstracts: Sequence[Abstract], sim) -> float:
    scores = [abstract_coherency(a.terms, sim) for a in abstracts if len(a.terms) >= 2]
    return min(scores) if scores else BOOTSTRAP_THETA


@dataclass
class Admission:
    """Outcome of admitting new tokens against a set of abstracts."""

    assignments: dict[str, int] = field(default_factory=dict)
    new_clusters: list[int] = field(default_factory=list)
    abstracts: list[Abstract] = field(default_factory=list)


def admit_tokens(
    tokens: Sequence[str],
    abstracts: Sequence[Abstract],
    theta: float,
    sim,
    keymap: Mapping[str, str],
    next_id: int,
) -> Admission:
    """Route each token (in the given order) to the abstract with the most
    similar element above ``theta``, or found a new singleton abstract."""
    live = list(abstracts)
    result = Admission()
    for token in tokens:
        term = keymap[token]
        best = None
        for ab in live:
            for element in ab.terms:
                s = sim(element, term)
                # strict '>' on theta; ties on s go to the lower cluster id
                if s > theta and (best is None or s > best[0] or (s == best[0] and ab.cluster_id < best[1])):
                    best = (s, ab.cluster_id)
        if best is not None:
            result.assignments[token] = best[1]
        else:
            live.append(Abstract(next_id, (term,)))
            result.assignments[token] = next_id
            result.new_clusters.append(next_id)
            next_id += 1
    result.abstracts = live
    return result


def sd_update(
    abstracts: Sequence[Abstract],
    batch: CentralIndex,
    theta: float,
    sim,
    existing: set[str] | frozenset[str],
    keymap: Mapping[str, str],
) -> Admission:
    new_tokens = sorted(set(batch.postings) - set(existing))
    next_id = max((a.cluster_id for a in abstracts), default=-1) + 1
    return admit_tokens(new_tokens, abstracts, theta, sim, keymap, next_id)


def fd_bootstrap(
    batch: CentralIndex,
    sim,
    keymap: Mapping[str, str],
    abstract_n: int = DEFAULT_ABSTRACT_TERMS,
) -> tuple[ClusterSet, list[Abstract]]:
    """Form clusters from scratch: the most frequent token founds the first
    cluster, the rest follow in descending frequency through admission at
    ``theta = 0.1``."""
    if not len(batch):
        raise DataError("cannot bootstrap clusters from an empty batch")
    ordered = sorted(batch.postings, key=lambda t: (-batch.total_freq(t), t))
    first, rest = ordered[0], ordered[1:]
    seed = [Abstract(0, (keymap[first],))]
    adm = admit_tokens(rest, seed, BOOTSTRAP_THETA, sim, keymap, 1)
    clusters = {0: Cluster(0, first, {first: dict(batch.postings[first])})}
    for token in rest:
        cid = adm.assignments[token]
        if cid not in clusters:
            clusters[cid] = Cluster(cid, token, {})
        clusters[cid].members[token] = dict(batch.postings[token])
    cset = ClusterSet([clusters[i] for i in sorted(clusters)], "cluspr")
    check_partition(cset, batch.postings)
    return cset, build_abstracts(cset, keymap, abstract_n)


@dataclass(frozen=True)
class DynamicState:
    index: CentralIndex
    keymap: dict[str, str]
    clusters: ClusterSet | None = None
    abstracts: tuple[Abstract, ...] = ()
    # tokens clustered at the last full (re)clustering, and new tokens since
    base_tokens: int = 0
    pending: int = 0
    strategy: str = "cluspr"
    abstract_n: int = DEFAULT_ABSTRACT_TERMS

    @property
    def empty(self) -> bool:
        return self.clusters is None or not len(self.clusters)


def apply_batch(
    state: DynamicState,
    batch: CentralIndex,
    batch_keymap: Mapping[str, str],
    sim,
) -> tuple[DynamicState, dict]:
    """One update step. Returns the new state and a JSON-ready record."""
    keymap = {**state.keymap, **batch_keymap}
    new_tokens = sorted(set(batch.postings) - set(state.index.postings))
    merged = merge_batch(state.index, batch)
    record = {
        "docs": len(batch.doc_ids),
        "new_tokens": new_tokens,
        "bootstrap": False,
        "chi2": None,
        "recluster": False,
        "theta": None,
        "new_clusters": [],
        "assignments": {},
    }

    if state.empty:
        if not len(merged):
            log.warning("batch has no tokens; nothing to cluster yet")
            return replace(state, index=merged, keymap=keymap), record
        clusters, abstracts = fd_bootstrap(merged, sim, keymap, state.abstract_n)
        record.update(bootstrap=True, new_clusters=[c.id for c in clusters])
        return (
            replace(
                state,
                index=merged,
                keymap=keymap,
                clusters=clusters,
                abstracts=tuple(abstracts),
                base_tokens=len(merged),
                pending=0,
            ),
            record,
        )

    pending = state.pending + len(new_tokens)
    decision = recluster_decision(pending, state.base_tokens)
    record.update(chi2=decision.chi2, recluster=decision.recluster)

    if decision.recluster:
        run = cluster_index(merged, state.strategy)
        clusters = run.clusters
        abstracts = build_abstracts(clusters, keymap, state.abstract_n)
        new_state = replace(
            state,
            index=merged,
            keymap=keymap,
            clusters=clusters,
            abstracts=tuple(abstracts),
            base_tokens=len(merged),
            pending=0,
        )
        return new_state, record

    theta = compute_theta(state.abstracts, sim)
    adm = sd_update(state.abstracts, batch, theta, sim, set(state.index.postings), keymap)
    clusters = _apply_assignments(state.clusters, adm, merged)
    check_partition(clusters, merged.postings)
    abstracts = build_abstracts(clusters, keymap, state.abstract_n)
    record.update(theta=theta, new_clusters=adm.new_clusters, assignments=adm.assignments)
    new_state = replace(
        state,
        index=merged,
        keymap=keymap,
        clusters=clusters,
        abstracts=tuple(abstracts),
        pending=pending,
    )
    return new_state, record


def _apply_assignments(clusters: ClusterSet, adm: Admission, index: CentralIndex) -> ClusterSet:
    out = {
        c.id: Cluster(c.id, c.center, {t: dict(index.postings[t]) for t in c.members})
        for c in clusters
    }
    for token, cid in adm.assignments.items():
        if cid not in out:
            out[cid] = Cluster(cid, token, {})
        out[cid].members[token] = dict(index.postings[token])
    return ClusterSet([out[i] for i in sorted(out)], clusters.strategy)


def fd_step(
    state: DynamicState,
    doc: CentralIndex,
    doc_keymap: Mapping[str, str],
    sim,
) -> tuple[DynamicState, dict]:
    """Handle the arrival of a single document."""
    if len(doc.doc_ids) != 1:
        raise ValueError("fd_step takes exactly one document")
    return apply_batch(state, doc, doc_keymap, sim)
