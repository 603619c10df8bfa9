"""Keyword extraction, pseudonymization and the encrypted central index.

The central index maps opaque tokens to per-document frequencies. Plain
terms only ever leave this module through the keymap returned alongside
an index, which belongs to the trusted side.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from cluspr.errors import DataError

_WORD_RE = re.compile(r"[^\W_]+")

DEFAULT_KEYWORDS_PER_DOC = 20

STOPWORDS = frozenset(
    """
    about above after again against all also am an and any are as at be because
    been before being below between both but by can could did do does doing down
    during each few for from further had has have having he her here hers herself
    him himself his how if in into is it its itself just me more most my myself no
    nor not now of off on once only or other our ours ourselves out over own same
    she should so some such than that the their theirs them themselves then there
    these they this those through to too under until up very was we were what when
    where which while who whom why will with would you your yours yourself
    yourselves
    """.split()
)


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str


@dataclass(frozen=True)
class Keyword:
    term: str
    freq: int


@dataclass(frozen=True)
class CentralIndex:
    """Inverted index ``token -> {doc_id: freq}`` over an ordered doc set.

    Instances are treated as immutable: every operation in this package
    returns a new index instead of editing ``postings`` in place.
    """

    postings: dict[str, dict[str, int]] = field(default_factory=dict)
    doc_ids: tuple[str, ...] = ()

    def __post_init__(self):
        known = set(self.doc_ids)
        if len(known) != len(self.doc_ids):
            raise DataError("duplicate doc_id in index")
        for token, plist in self.postings.items():
            for doc_id, freq in plist.items():
                if doc_id not in known:
                    raise DataError(f"posting for {token!r} names unknown doc {doc_id!r}")
                if freq < 1:
                    raise DataError(f"posting ({token!r}, {doc_id!r}) has freq {freq}")

    @property
    def tokens(self) -> list[str]:
        return sorted(self.postings)

    def __len__(self):
        return len(self.postings)

    def __contains__(self, token):
        return token in self.postings

    def docs_of(self, token: str) -> frozenset[str]:
        return frozenset(self.postings.get(token, ()))

    def freq(self, token: str, doc_id: str) -> int:
        return self.postings.get(token, {}).get(doc_id, 0)

    def total_freq(self, token: str) -> int:
        return sum(self.postings.get(token, {}).values())

    def doc_count(self, token: str) -> int:
        return len(self.postings.get(token, ()))

    def to_json(self) -> dict:
        order = {d: i for i, d in enumerate(self.doc_ids)}
        return {
            "doc_ids": list(self.doc_ids),
            "postings": {
                token: [[d, f] for d, f in sorted(plist.items(), key=lambda kv: order[kv[0]])]
                for token, plist in sorted(self.postings.items())
            },
        }

    @classmethod
    def from_json(cls, payload: Mapping) -> CentralIndex:
        try:
            doc_ids = tuple(str(d) for d in payload["doc_ids"])
            postings = {}
            for token, plist in payload["postings"].items():
                entry: dict[str, int] = {}
                for doc_id, freq in plist:
                    if doc_id in entry:
                        raise DataError(f"duplicate posting ({token!r}, {doc_id!r})")
                    entry[str(doc_id)] = int(freq)
                postings[str(token)] = entry
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed index payload: {exc}") from exc
        return cls(postings, doc_ids)


# Batches share the central index's shape.
TempIndex = CentralIndex


def tokenize(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def extract_keywords(
    doc: Document,
    n: int = DEFAULT_KEYWORDS_PER_DOC,
    stopwords: Iterable[str] = STOPWORDS,
    min_length: int = 2,
) -> list[Keyword]:
    """Top-``n`` terms of ``doc`` by raw count, ties broken alphabetically."""
    if n < 1:
        raise ValueError("n must be >= 1")
    stop = set(stopwords)
    counts = Counter(t for t in tokenize(doc.text) if len(t) >= min_length and t not in stop)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [Keyword(term, freq) for term, freq in ranked[:n]]


def pseudonymize(term: str, key: bytes) -> str:
    """Deterministic keyed pseudonym (HMAC-SHA256, hex) standing in for
    deterministic encryption of a term."""
    if not key:
        raise ValueError("pseudonymization key must be non-empty")
    return hmac.new(key, term.encode("utf-8"), hashlib.sha256).hexdigest()


def index_keywords(
    keywords: Iterable[tuple[str, Iterable[Keyword]]],
    key: bytes,
) -> tuple[CentralIndex, dict[str, str]]:
    """Build an index from already-extracted ``(doc_id, keywords)`` pairs.

    Returns the index and the trusted-side keymap ``token -> term``.
    """
    postings: dict[str, dict[str, int]] = {}
    keymap: dict[str, str] = {}
    doc_ids: list[str] = []
    seen: set[str] = set()
    for doc_id, kws in keywords:
        if not doc_id:
            raise DataError("empty doc_id")
        if doc_id in seen:
            raise DataError(f"duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        doc_ids.append(doc_id)
        for kw in kws:
            if kw.freq < 1:
                raise DataError(f"non-positive frequency for {kw.term!r} in {doc_id!r}")
            token = pseudonymize(kw.term, key)
            keymap[token] = kw.term
            plist = postings.setdefault(token, {})
            plist[doc_id] = plist.get(doc_id, 0) + kw.freq
    return CentralIndex(postings, tuple(doc_ids)), keymap


def build_index(
    docs: Iterable[Document],
    key: bytes,
    n: int = DEFAULT_KEYWORDS_PER_DOC,
    stopwords: Iterable[str] = STOPWORDS,
) -> tuple[CentralIndex, dict[str, str]]:
    stop = frozenset(stopwords)
    return index_keywords(((d.doc_id, extract_keywords(d, n, stop)) for d in docs), key)


def merge_batch(index: CentralIndex, batch: CentralIndex) -> CentralIndex:
    """Sum colliding postings and union doc ids; neither input is modified."""
    postings = {t: dict(p) for t, p in index.postings.items()}
    for token, plist in batch.postings.items():
        target = postings.setdefault(token, {})
        for doc_id, freq in plist.items():
            target[doc_id] = target.get(doc_id, 0) + freq
    known = set(index.doc_ids)
    doc_ids = index.doc_ids + tuple(d for d in batch.doc_ids if d not in known)
    return CentralIndex(postings, doc_ids)


# -- file formats ----------------------------------------------------------


def read_corpus(path: str | Path) -> list[Document]:
    """Load a directory of ``.txt`` files or a JSON-lines file of
    ``{"doc_id", "text"}`` records."""
    path = Path(path)
    if path.is_dir():
        return [
            Document(p.stem, p.read_text(encoding="utf-8"))
            for p in sorted(path.glob("*.txt"))
        ]
    docs = []
    for rec in _read_jsonl(path):
        try:
            docs.append(Document(str(rec["doc_id"]), str(rec["text"])))
        except KeyError as exc:
            raise DataError(f"{path}: record missing {exc}") from exc
    return docs


def read_token_file(path: str | Path) -> list[tuple[str, list[Keyword]]]:
    """Load pre-extracted ``{"doc_id", "tokens": [{"term", "freq"}]}`` lines."""
    out = []
    for rec in _read_jsonl(Path(path)):
        try:
            kws = [Keyword(str(t["term"]), int(t["freq"])) for t in rec["tokens"]]
            out.append((str(rec["doc_id"]), kws))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path}: malformed token record: {exc}") from exc
    return out


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    return records


def load_index(path: str | Path) -> CentralIndex:
    with open(path, encoding="utf-8") as fh:
        return CentralIndex.from_json(json.load(fh))
