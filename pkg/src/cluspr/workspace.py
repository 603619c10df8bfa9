"""On-disk layout of a working directory.

Cloud-side (opaque tokens only)::

    index.json  clusters.json  dynamic.json

Trusted side (plaintext)::

    trusted/keymap.json  trusted/abstracts.json
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from cluspr.abstracts import DEFAULT_ABSTRACT_TERMS, abstracts_from_json, abstracts_to_json
from cluspr.corpus import CentralIndex
from cluspr.distribution import ClusterSet
from cluspr.dynamic import DynamicState
from cluspr.errors import DataError


def to_json_safe(value):
    """Replace non-finite floats with strings so output stays strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, dict):
        return {k: to_json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_json_safe(v) for v in value]
    return value


def dumps(payload) -> str:
    return json.dumps(to_json_safe(payload), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path: Path, payload) -> None:
    """Atomic replace, so readers never observe a half-written file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(dumps(payload))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path: Path):
    try:
        with path.open(encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise DataError(f"missing {path.name} in workdir; run the earlier step first") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class Workspace:
    root: Path

    @property
    def index_path(self) -> Path:
        return self.root / "index.json"

    @property
    def clusters_path(self) -> Path:
        return self.root / "clusters.json"

    @property
    def dynamic_path(self) -> Path:
        return self.root / "dynamic.json"

    @property
    def keymap_path(self) -> Path:
        return self.root / "trusted" / "keymap.json"

    @property
    def abstracts_path(self) -> Path:
        return self.root / "trusted" / "abstracts.json"

    def load_index(self) -> CentralIndex:
        return CentralIndex.from_json(read_json(self.index_path))

    def load_keymap(self) -> dict[str, str]:
        return {str(k): str(v) for k, v in read_json(self.keymap_path).items()}

    def load_clusters(self) -> ClusterSet:
        return ClusterSet.from_json(read_json(self.clusters_path))

    def load_abstracts(self):
        return abstracts_from_json(read_json(self.abstracts_path))

    def has_clusters(self) -> bool:
        return self.clusters_path.exists()

    def save_index(self, index: CentralIndex, keymap: dict[str, str]) -> None:
        write_json(self.keymap_path, dict(sorted(keymap.items())))
        write_json(self.index_path, index.to_json())

    def clear_clusters(self) -> None:
        for p in (self.clusters_path, self.dynamic_path, self.abstracts_path):
            p.unlink(missing_ok=True)

    def load_state(self) -> DynamicState:
        if not self.index_path.exists():
            # fresh workdir: the first update bootstraps from nothing
            return DynamicState(CentralIndex(), {})
        index = self.load_index()
        keymap = self.load_keymap()
        if not self.has_clusters():
            return DynamicState(index, keymap)
        meta = read_json(self.dynamic_path) if self.dynamic_path.exists() else {}
        abstracts, n = self.load_abstracts()
        clusters = self.load_clusters()
        return DynamicState(
            index,
            keymap,
            clusters,
            tuple(abstracts),
            base_tokens=int(meta.get("base_tokens", len(index))),
            pending=int(meta.get("pending", 0)),
            strategy=meta.get("strategy", clusters.strategy),
            abstract_n=int(meta.get("abstract_n", n)),
        )

    def save_state(self, state: DynamicState) -> None:
        # trusted side first, then cloud side; the clusters file commits last
        write_json(self.keymap_path, dict(sorted(state.keymap.items())))
        if state.clusters is not None:
            write_json(
                self.abstracts_path,
                abstracts_to_json(state.abstracts, state.abstract_n or DEFAULT_ABSTRACT_TERMS),
            )
            write_json(
                self.dynamic_path,
                {
                    "base_tokens": state.base_tokens,
                    "pending": state.pending,
                    "strategy": state.strategy,
                    "abstract_n": state.abstract_n,
                },
            )
        write_json(self.index_path, state.index.to_json())
        if state.clusters is not None:
            write_json(self.clusters_path, state.clusters.to_json())
