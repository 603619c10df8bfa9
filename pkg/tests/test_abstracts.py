import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cluspr.abstracts import (
    Abstract,
    SimilarityProvider,
    abstract_coherency,
    abstracts_from_json,
    abstracts_to_json,
    build_abstracts,
    load_embeddings,
    prune,
    resolve_embeddings,
)
from cluspr.distribution import Cluster
from cluspr.errors import DataError
from cluspr.workspace import dumps


def test_load_embeddings_with_and_without_header(tmp_path):
    body = "cat 1 0 0\ndog 0.5 0.5 0\n"
    plain = tmp_path / "plain.txt"
    plain.write_text(body)
    headed = tmp_path / "headed.txt"
    headed.write_text("2 3\n" + body)
    a, b = load_embeddings(plain), load_embeddings(headed)
    assert len(a) == len(b) == 2 and a.dim == b.dim == 3
    assert a.sim("cat", "dog") == b.sim("cat", "dog")


@pytest.mark.parametrize(
    "content",
    ["", "cat 1 0 0\ndog 1 0\n", "cat 1 x 0\n"],
    ids=["empty", "mixed-dims", "bad-float"],
)
def test_load_embeddings_errors(tmp_path, content):
    p = tmp_path / "v.txt"
    p.write_text(content)
    with pytest.raises(DataError):
        load_embeddings(p)


def test_resolve_embeddings_env(tmp_path, monkeypatch):
    p = tmp_path / "v.txt"
    p.write_text("cat 1 0\n")
    monkeypatch.setenv("CLUSPR_EMBEDDINGS", str(p))
    assert "cat" in resolve_embeddings(None)
    monkeypatch.delenv("CLUSPR_EMBEDDINGS")
    assert len(resolve_embeddings(None)) == 0


def test_sim_values():
    sp = SimilarityProvider({"a": [1, 0], "b": [0, 1], "c": [-2, 0], "z": [0, 0]})
    assert sp.sim("a", "a") == 1
    assert sp.sim("a", "b") == 0
    assert sp.sim("a", "c") == -1
    assert sp.sim("a", "oov") == 0 and sp.sim("oov", "oov") == 0
    assert sp.sim("z", "a") == 0


vec = st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3)


@settings(max_examples=100, deadline=None)
@given(vec, vec)
def test_sim_symmetric_and_bounded(u, v):
    sp = SimilarityProvider({"u": u, "v": v})
    s = sp.sim("u", "v")
    assert s == sp.sim("v", "u")
    assert abs(s) <= 1 + 1e-12


def test_abstract_coherency():
    sims = {("a", "b"): 0.5, ("a", "c"): 0.3, ("b", "c"): 0.4}
    assert abstract_coherency(["a", "b", "c"], lambda x, y: sims[(x, y)]) == pytest.approx(0.4)
    assert abstract_coherency(["a", "b", "c"], lambda x, y: 1.0) == 1
    assert abstract_coherency(["a", "b"], lambda x, y: -0.2) == pytest.approx(-0.2)
    with pytest.raises(ValueError):
        abstract_coherency(["a"], lambda x, y: 1.0)


def _cluster(cid, freqs):
    return Cluster(cid, next(iter(freqs)), {t: {"d": f} for t, f in freqs.items()})


def test_build_abstracts():
    keymap = {"t1": "alpha", "t2": "beta", "t3": "gamma", "t4": "delta"}
    clusters = [_cluster(0, {"t1": 1, "t2": 5, "t3": 3}), _cluster(1, {"t4": 2})]
    got = build_abstracts(clusters, keymap, n=2)
    assert got == [Abstract(0, ("beta", "gamma")), Abstract(1, ("delta",))]
    assert build_abstracts(clusters, keymap, n=10)[0].terms == ("beta", "gamma", "alpha")
    ties = build_abstracts([_cluster(0, {"t3": 1, "t1": 1, "t2": 1})], keymap, n=3)
    assert ties[0].terms == ("alpha", "beta", "gamma")
    with pytest.raises(DataError):
        build_abstracts(clusters, {"t1": "alpha"}, n=2)


def test_prune():
    sp = SimilarityProvider({"ball": [1, 0.1], "goal": [0.9, 0.2], "stock": [0, 1], "bond": [0.1, 1]})
    abstracts = [Abstract(1, ("stock", "bond")), Abstract(3, ("ball", "goal")), Abstract(2, ("bond",))]
    assert prune(["ball"], abstracts, sp, top_c=1) == [3]
    assert sorted(prune(["ball"], abstracts, sp, top_c=5)) == [1, 2, 3]
    assert prune(["unknown"], abstracts, sp, top_c=3) == [1, 2, 3]
    with pytest.raises(ValueError):
        prune(["ball"], abstracts, sp, top_c=0)


def test_prune_returns_valid_ids():
    rng = np.random.default_rng(0)
    words = [f"w{i}" for i in range(12)]
    sp = SimilarityProvider({w: rng.normal(size=4) for w in words})
    for _ in range(50):
        abstracts = [Abstract(i, tuple(rng.choice(words, 3, replace=False))) for i in range(5)]
        top_c = int(rng.integers(1, 8))
        ids = prune(list(rng.choice(words, 2)), abstracts, sp, top_c)
        assert 1 <= len(ids) <= top_c and set(ids) <= set(range(5))


def test_abstracts_json_round_trip_and_no_tokens():
    abstracts = [Abstract(0, ("alpha", "beta")), Abstract(4, ("gamma",))]
    payload = abstracts_to_json(abstracts, 25)
    assert abstracts_from_json(payload) == (abstracts, 25)
    assert not re.search(r"[0-9a-f]{64}", dumps(payload))
