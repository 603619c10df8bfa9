"""Token/document matrices and the trace-based cluster-count estimate.

Pipeline: frequency matrix ``A`` -> column-max normalized ``N`` ->
row-stochastic token->doc ``R`` and doc->token ``S`` -> ``Q = R @ S``.
``Q`` is the two-step token->doc->token walk; its diagonal holds each
token's separation factor, and the ceiling of the trace estimates K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cluspr.corpus import CentralIndex
from cluspr.errors import DataError

# Absorbs float noise when a trace lands on an integer (e.g. 2.0000000000000004).
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class MatrixBundle:
    tokens: tuple[str, ...]
    docs: tuple[str, ...]
    A: np.ndarray
    N: np.ndarray
    R: np.ndarray
    S: np.ndarray
    Q: np.ndarray

    def token_row(self, token: str) -> int:
        return self.tokens.index(token)

    def separation(self) -> dict[str, float]:
        return {t: float(self.Q[i, i]) for i, t in enumerate(self.tokens)}


@dataclass(frozen=True)
class KEstimate:
    trace: float
    k: int


def order_tokens(index: CentralIndex, tokens=None) -> list[str]:
    """Sort by document co-occurrence descending, then token ascending."""
    pool = index.postings if tokens is None else tokens
    return sorted(pool, key=lambda t: (-index.doc_count(t), t))


def trim_tokens(index: CentralIndex) -> list[str]:
    """Keep tokens whose document count is at least the mean document count."""
    if not len(index):
        raise DataError("cannot trim an empty index")
    counts = {t: index.doc_count(t) for t in index.postings}
    mean = sum(counts.values()) / len(counts)
    return order_tokens(index, [t for t, c in counts.items() if c >= mean])


def build_A(index: CentralIndex, tokens, docs=None) -> np.ndarray:
    docs = index.doc_ids if docs is None else docs
    col = {d: j for j, d in enumerate(docs)}
    A = np.zeros((len(tokens), len(docs)), dtype=np.int64)
    for i, token in enumerate(tokens):
        if token not in index:
            raise DataError(f"token {token!r} not in index")
        for doc_id, freq in index.postings[token].items():
            j = col.get(doc_id)
            if j is not None:
                A[i, j] = freq
    return A


def _safe_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # 0/0 -> 0 for empty rows/columns
    out = np.zeros(np.broadcast_shapes(num.shape, den.shape), dtype=float)
    np.divide(num, den, out=out, where=den != 0)
    return out


def normalize(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if (A < 0).any():
        raise ValueError("frequency matrix must be non-negative")
    return _safe_divide(A, A.max(axis=0, keepdims=True) if A.size else A)


def build_R(N: np.ndarray) -> np.ndarray:
    """Row-normalize ``N``: importance of each token to each document."""
    sums = N.sum(axis=1, keepdims=True)
    if (sums <= 0).any():
        raise DataError("R is undefined for a token with an all-zero row")
    return N / sums


def build_S(N: np.ndarray) -> np.ndarray:
    """Column-normalize ``N`` and transpose: rows are documents."""
    return _safe_divide(N, N.sum(axis=0, keepdims=True)).T


def build_Q(R: np.ndarray, S: np.ndarray) -> np.ndarray:
    if R.shape[1] != S.shape[0]:
        raise ValueError(f"cannot multiply R{R.shape} by S{S.shape}")
    return R @ S


def estimate_k(Q: np.ndarray) -> KEstimate:
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError("Q must be square")
    m = Q.shape[0]
    trace = float(np.trace(Q))
    k = math.ceil(trace - _CEIL_SLACK)
    return KEstimate(trace, max(1, min(k, m)) if m else 1)


def build_bundle(index: CentralIndex, trim: bool = True) -> MatrixBundle:
    tokens = trim_tokens(index) if trim else order_tokens(index)
    if not tokens:
        raise DataError("index has no tokens")
    A = build_A(index, tokens)
    N = normalize(A)
    R = build_R(N)
    S = build_S(N)
    return MatrixBundle(tuple(tokens), tuple(index.doc_ids), A, N, R, S, build_Q(R, S))


def dump_csv(bundle: MatrixBundle, outdir: str | Path) -> list[Path]:
    """Write A, N, R, S, Q as CSV files with token/doc headers."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    layout = {
        "A": (bundle.A, bundle.tokens, bundle.docs),
        "N": (bundle.N, bundle.tokens, bundle.docs),
        "R": (bundle.R, bundle.tokens, bundle.docs),
        "S": (bundle.S, bundle.docs, bundle.tokens),
        "Q": (bundle.Q, bundle.tokens, bundle.tokens),
    }
    written = []
    for name, (M, rows, cols) in layout.items():
        path = outdir / f"{name}.csv"
        lines = [",".join(["", *cols])]
        for label, row in zip(rows, M):
            lines.append(",".join([label, *(repr(v.item()) for v in row)]))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)
    return written
