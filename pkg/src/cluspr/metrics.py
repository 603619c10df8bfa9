"""Cluster validity indices over statistical token features, plus
embedding-based coherency.

A token's feature vector is its row of the column-max normalized
frequency matrix over all clustered tokens, so the indices are computable
from the encrypted index alone. Distances are Euclidean.
"""

from __future__ import annotations

import itertools
import math
from typing import Mapping, Sequence

import numpy as np

from cluspr.corpus import CentralIndex
from cluspr.errors import DataError
from cluspr.matrices import build_A, normalize


def _groups(labels: Sequence) -> tuple[np.ndarray, int]:
    _, inverse = np.unique(np.asarray(labels), return_inverse=True)
    return inverse, int(inverse.max()) + 1 if inverse.size else 0


def silhouette(labels: Sequence, X: np.ndarray) -> float:
    X = np.asarray(X, dtype=float)
    lab, k = _groups(labels)
    if k < 2:
        raise ValueError("silhouette needs at least two clusters")
    D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
    sizes = np.bincount(lab, minlength=k)
    # per-point summed distance to each cluster
    sums = np.zeros((len(X), k))
    for c in range(k):
        sums[:, c] = D[:, lab == c].sum(axis=1)
    total = 0.0
    for i, c in enumerate(lab):
        if sizes[c] == 1:
            continue
        a = sums[i, c] / (sizes[c] - 1)
        b = min(sums[i, o] / sizes[o] for o in range(k) if o != c)
        m = max(a, b)
        total += (b - a) / m if m > 0 else 0.0
    return total / len(X)


def calinski_harabasz(labels: Sequence, X: np.ndarray) -> float:
    """Between/within dispersion ratio; ``inf`` when clusters are perfectly tight."""
    X = np.asarray(X, dtype=float)
    lab, k = _groups(labels)
    m = len(X)
    if k < 2:
        raise ValueError("Calinski-Harabasz needs at least two clusters")
    if m <= k:
        raise ValueError("Calinski-Harabasz needs more points than clusters")
    mean = X.mean(axis=0)
    between = within = 0.0
    for c in range(k):
        pts = X[lab == c]
        centroid = pts.mean(axis=0)
        between += len(pts) * float(((centroid - mean) ** 2).sum())
        within += float(((pts - centroid) ** 2).sum())
    if within == 0:
        return math.inf
    return (between / (k - 1)) / (within / (m - k))


def davies_bouldin(labels: Sequence, X: np.ndarray) -> float:
    X = np.asarray(X, dtype=float)
    lab, k = _groups(labels)
    if k < 2:
        raise ValueError("Davies-Bouldin needs at least two clusters")
    centroids = np.array([X[lab == c].mean(axis=0) for c in range(k)])
    spread = np.array(
        [np.linalg.norm(X[lab == c] - centroids[c], axis=1).mean() for c in range(k)]
    )
    worst = []
    for i in range(k):
        ratios = []
        for j in range(k):
            if i == j:
                continue
            dist = float(np.linalg.norm(centroids[i] - centroids[j]))
            if dist > 0:
                ratios.append((spread[i] + spread[j]) / dist)
        if ratios:
            worst.append(max(ratios))
    if not worst:
        raise ValueError("Davies-Bouldin undefined: all centroids coincide")
    return float(np.mean(worst))


def token_features(clusters, index: CentralIndex) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Tokens (sorted), their normalized frequency rows and cluster labels."""
    labels = {t: c.id for c in clusters for t in c.members}
    tokens = sorted(labels)
    X = normalize(build_A(index, tokens))
    return tokens, X, np.array([labels[t] for t in tokens])


def coherency(cluster, keymap: Mapping[str, str], sim) -> float | None:
    """Mean pairwise similarity of a cluster's terms; ``None`` for singletons."""
    terms = []
    for token in sorted(cluster.members):
        if token not in keymap:
            raise DataError(f"keymap has no entry for token {token}")
        terms.append(keymap[token])
    if len(terms) < 2:
        return None
    pairs = list(itertools.combinations(terms, 2))
    return sum(sim(a, b) for a, b in pairs) / len(pairs)


def mean_coherency(clusters, keymap: Mapping[str, str], sim) -> float:
    scores = [s for s in (coherency(c, keymap, sim) for c in clusters) if s is not None]
    return sum(scores) / len(scores) if scores else 0.0


def evaluate(clusters, index: CentralIndex, keymap: Mapping[str, str] | None = None, sim=None) -> dict:
    """All four metrics; indices that are undefined for the input are ``None``."""
    _, X, labels = token_features(clusters, index)
    out: dict[str, float | None] = {}
    for name, fn in (
        ("silhouette", silhouette),
        ("calinski_harabasz", calinski_harabasz),
        ("davies_bouldin", davies_bouldin),
    ):
        try:
            out[name] = float(fn(labels, X))
        except ValueError:
            out[name] = None
    out["coherency"] = mean_coherency(clusters, keymap, sim) if keymap is not None and sim is not None else None
    return out
