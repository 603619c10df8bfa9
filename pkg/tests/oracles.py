"""Naive reference implementations, written straight from the formulas.

They work on dense per-document frequency vectors over every document and
share no code with the package.
"""

import math
from fractions import Fraction


def dense(index, token):
    return [index.freq(token, d) for d in index.doc_ids]


def clustcrypt_relatedness(index, center, token):
    ft, fc = dense(index, token), dense(index, center)
    total_t = sum(ft)
    total_pair = sum(a + b for a, b in zip(ft, fc))
    r = 0.0
    for j in range(len(ft)):
        kappa = ft[j] / total_t
        if kappa > 0:
            rho = (ft[j] + fc[j]) / total_pair
            r += kappa * math.log(rho)
    return r


def relative_cooccurrence(index, ti, tj, doc_id):
    fi, fj = dense(index, ti), dense(index, tj)
    docs = list(index.doc_ids)
    co = [k for k in range(len(docs)) if fi[k] > 0 and fj[k] > 0]
    dis = [k for k in range(len(docs)) if (fi[k] > 0) != (fj[k] > 0)]
    d = docs.index(doc_id)

    def part(f, group):
        s = sum(f[k] for k in group)
        return f[d] / s if s > 0 else 0.0

    upsilon = part(fi, co) * part(fj, co) if d in co else 0.0
    phi = part(fi, dis) + part(fj, dis) if d in dis else 0.0
    return upsilon - phi


def cluspr_relatedness(index, center, token):
    ft = dense(index, token)
    total_t = sum(ft)
    r = 0.0
    for k, doc_id in enumerate(index.doc_ids):
        if index.freq(token, doc_id) or index.freq(center, doc_id):
            r += relative_cooccurrence(index, token, center, doc_id) * ft[k] / total_t
    return r


def assign(index, centers, strategy):
    relate = clustcrypt_relatedness if strategy == "clustcrypt" else cluspr_relatedness
    labels = {c: i for i, c in enumerate(centers)}
    for token in index.postings:
        if token in labels:
            continue
        scores = [relate(index, c, token) for c in centers]
        labels[token] = scores.index(max(scores))
    return labels


def exact_pipeline(A):
    """Rational-arithmetic reference for N, R, S, Q (plain loops, no numpy)."""
    m, n = len(A), len(A[0])
    colmax = [max(A[i][j] for i in range(m)) for j in range(n)]
    N = [[Fraction(A[i][j], colmax[j]) if colmax[j] else Fraction(0) for j in range(n)] for i in range(m)]
    R = [[N[i][j] / sum(N[i]) for j in range(n)] for i in range(m)]
    colsum = [sum(N[i][j] for i in range(m)) for j in range(n)]
    S = [[N[i][j] / colsum[j] if colsum[j] else Fraction(0) for i in range(m)] for j in range(n)]
    Q = [[sum(R[i][d] * S[d][j] for d in range(n)) for j in range(m)] for i in range(m)]
    return N, R, S, Q
