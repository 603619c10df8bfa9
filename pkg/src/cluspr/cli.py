"""Command-line entry point.

All command results go to stdout as JSON; logs go to stderr.
Exit codes: 0 ok, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from cluspr.abstracts import (
    DEFAULT_ABSTRACT_TERMS,
    DEFAULT_TOP_C,
    EMBEDDINGS_ENV,
    build_abstracts,
    resolve_embeddings,
)
from cluspr.corpus import (
    DEFAULT_KEYWORDS_PER_DOC,
    STOPWORDS,
    build_index,
    index_keywords,
    read_corpus,
    read_token_file,
)
from cluspr.distribution import STRATEGIES, cluster_index
from cluspr.dynamic import DynamicState, apply_batch
from cluspr.errors import DataError
from cluspr.matrices import build_bundle, dump_csv, estimate_k
from cluspr.metrics import evaluate
from cluspr.search import DEFAULT_LIMIT, search
from cluspr.workspace import Workspace, dumps

log = logging.getLogger("cluspr")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _global_flags(parser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--workdir", type=Path, default=default(Path(".")), help="artifact directory")
    parser.add_argument("--key-file", type=Path, default=default(None), help="pseudonymization key file")
    parser.add_argument("--embeddings", type=Path, default=default(None), help="word vectors (or $CLUSPR_EMBEDDINGS)")
    parser.add_argument("-v", "--verbose", action="store_true", default=default(False))


def _input_flags(parser) -> None:
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", type=Path, help="directory of .txt files or JSON-lines {doc_id, text}")
    src.add_argument("--tokens", type=Path, help="pre-extracted JSON-lines {doc_id, tokens:[{term, freq}]}")
    parser.add_argument("--n", type=int, default=DEFAULT_KEYWORDS_PER_DOC, help="keywords kept per document")
    parser.add_argument("--stopwords", type=Path, help="file of stopwords, one per line")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cluspr", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-index", parents=[common], help="extract, pseudonymize and index a corpus")
    _input_flags(p)

    for name, helptext in (("estimate-k", "estimate the cluster count"), ("dump-matrices", "write A/N/R/S/Q as CSV")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--no-trim", action="store_true", help="keep tokens below the mean document count")
        if name == "estimate-k":
            p.add_argument("--dump-dir", type=Path, help="also write the matrices as CSV here")
        else:
            p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("cluster", parents=[common], help="cluster the central index")
    p.add_argument("--strategy", choices=STRATEGIES, default="cluspr")
    p.add_argument("--k-override", type=int)
    p.add_argument("--no-trim", action="store_true")
    p.add_argument("--abstract-n", type=int, default=DEFAULT_ABSTRACT_TERMS)

    p = sub.add_parser("update", parents=[common], help="apply a batch of new documents")
    _input_flags(p)
    p.add_argument("--stream", action="store_true", help="process documents one at a time")

    p = sub.add_parser("search", parents=[common], help="pruned search")
    p.add_argument("query")
    p.add_argument("--top-c", type=int, default=DEFAULT_TOP_C)
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)

    sub.add_parser("evaluate", parents=[common], help="cluster quality metrics")
    return parser


def _key(args) -> bytes:
    if args.key_file is None:
        raise UsageError("--key-file is required for this command")
    try:
        key = args.key_file.read_bytes().rstrip(b"\r\n")
    except OSError as exc:
        raise DataError(f"cannot read key file: {exc}") from exc
    if not key:
        raise DataError("key file is empty")
    return key


def _stopwords(args):
    if args.stopwords is None:
        return STOPWORDS
    return frozenset(w.strip().lower() for w in args.stopwords.read_text(encoding="utf-8").split())


def _load_batches(args, key: bytes):
    """Yield ``(index, keymap)`` for the input: one batch, or one per document."""
    stop = _stopwords(args)
    if args.corpus is not None:
        docs = read_corpus(args.corpus)
        groups = [[d] for d in docs] if getattr(args, "stream", False) else [docs]
        for group in groups:
            yield build_index(group, key, args.n, stop)
    else:
        records = read_token_file(args.tokens)
        groups = [[r] for r in records] if getattr(args, "stream", False) else [records]
        for group in groups:
            yield index_keywords(group, key)


def cmd_build_index(args, ws: Workspace):
    [(index, keymap)] = list(_load_batches(args, _key(args)))
    ws.clear_clusters()
    ws.save_index(index, keymap)
    return {"docs": len(index.doc_ids), "tokens": len(index)}


def cmd_estimate_k(args, ws: Workspace):
    bundle = build_bundle(ws.load_index(), trim=not args.no_trim)
    est = estimate_k(bundle.Q)
    out = {"trace": est.trace, "k": est.k, "tokens": len(bundle.tokens), "trimmed": not args.no_trim}
    if args.dump_dir is not None:
        out["files"] = [str(p) for p in dump_csv(bundle, args.dump_dir)]
    return out


def cmd_dump_matrices(args, ws: Workspace):
    bundle = build_bundle(ws.load_index(), trim=not args.no_trim)
    return {"files": [str(p) for p in dump_csv(bundle, args.out)]}


def cmd_cluster(args, ws: Workspace):
    if args.k_override is not None and args.k_override < 1:
        raise UsageError("--k-override must be >= 1")
    index = ws.load_index()
    keymap = ws.load_keymap()
    run = cluster_index(index, args.strategy, args.k_override, trim=not args.no_trim)
    log.info("trace %.4f -> k=%d, %d centers", run.estimate.trace, run.estimate.k, len(run.centers))
    abstracts = build_abstracts(run.clusters, keymap, args.abstract_n)
    state = DynamicState(
        index,
        keymap,
        run.clusters,
        tuple(abstracts),
        base_tokens=len(index),
        pending=0,
        strategy=args.strategy,
        abstract_n=args.abstract_n,
    )
    ws.save_state(state)
    return run.clusters.to_json()


def cmd_update(args, ws: Workspace):
    key = _key(args)
    sim = resolve_embeddings(args.embeddings)
    if not len(sim):
        log.warning("no embeddings loaded; every new token will found its own cluster")
    state = ws.load_state()
    records = []
    for batch, keymap in _load_batches(args, key):
        state, record = apply_batch(state, batch, keymap, sim)
        records.append(record)
    ws.save_state(state)
    return records if args.stream else records[0]


def cmd_search(args, ws: Workspace):
    if args.top_c < 1 or args.limit < 1:
        raise UsageError("--top-c and --limit must be >= 1")
    key = _key(args)
    abstracts, _ = ws.load_abstracts()
    result = search(
        args.query,
        ws.load_index(),
        ws.load_clusters(),
        abstracts,
        resolve_embeddings(args.embeddings),
        key,
        args.top_c,
        args.limit,
    )
    return result.to_json()


def cmd_evaluate(args, ws: Workspace):
    # coherency is reported only when vectors are available
    have_vectors = args.embeddings is not None or os.environ.get(EMBEDDINGS_ENV)
    sim = resolve_embeddings(args.embeddings) if have_vectors else None
    return evaluate(ws.load_clusters(), ws.load_index(), ws.load_keymap(), sim)


COMMANDS = {
    "build-index": cmd_build_index,
    "estimate-k": cmd_estimate_k,
    "dump-matrices": cmd_dump_matrices,
    "cluster": cmd_cluster,
    "update": cmd_update,
    "search": cmd_search,
    "evaluate": cmd_evaluate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        payload = COMMANDS[args.command](args, Workspace(args.workdir))
    except UsageError as exc:
        print(f"cluspr: error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"cluspr: data error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(dumps(payload))
    return 0


if __name__ == "__main__":
    sys.exit(main())
