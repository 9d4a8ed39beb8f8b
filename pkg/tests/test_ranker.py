import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decayrank import DecayParams, DecayRankTable, ParameterError, SnapshotFormatError
from decayrank.ranker import DenseRanker, alpha_to_half_life, half_life_to_alpha


def table(alpha, items=(), **kw):
    return DecayRankTable(DecayParams.from_alpha(alpha), items=items, **kw)


def test_hand_worked_stream():
    # a: 1/2 -> 3/4 -> 7/8 -> 15/16, then b pulls half: a = 15/32
    t = table(0.5, items=["a", "b"])
    t.observe_many("aaab")
    assert t.probability("a") == pytest.approx(0.46875, abs=1e-15)
    assert t.probability("b") == pytest.approx(0.53125, abs=1e-15)
    assert t.global_step == 4


def test_empty_stream_is_uniform():
    t = table(0.5, items=["a", "b"])
    assert t.probabilities() == {"a": 0.5, "b": 0.5}


def test_repeated_item_closed_form():
    t = table(0.9, items=["x", "y"])
    t.observe_many(["x"] * 20)
    assert t.probability("x") == pytest.approx(1 - 0.5 * 0.9**20, abs=1e-14)
    assert t.probability("y") == pytest.approx(0.5 * 0.9**20, abs=1e-14)


def test_new_item_enters_with_zero_prior():
    t = table(0.8)
    t.observe("z")
    assert t.probability("z") == pytest.approx(0.2)
    assert t.probability("never") == 0.0


def test_half_life_round_trip():
    a = half_life_to_alpha(10.0)
    assert a**10 == pytest.approx(0.5, rel=1e-14)
    assert alpha_to_half_life(a) == pytest.approx(10.0, rel=1e-12)
    p = DecayParams.from_half_life(10.0)
    assert p.alpha == a
    with pytest.raises(ParameterError):
        DecayParams(alpha=0.5, half_life=3.0)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, float("nan")])
def test_bad_alpha(alpha):
    with pytest.raises(ParameterError):
        DecayParams.from_alpha(alpha)


def test_idle_item_decays_geometrically():
    t = table(0.95, items=["a", "b", "c"])
    t.observe("a")
    pa = t.probability("a")
    t.observe_many(["b"] * 37)
    assert t.probability("a") == pytest.approx(pa * 0.95**37, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 0.99, 0.999])
def test_lazy_matches_dense(alpha):
    items = [f"i{k}" for k in range(20)]
    rng = random.Random(alpha)
    stream = rng.choices(items, weights=range(1, 21), k=20000)
    lazy = table(alpha, items=items)
    dense = DenseRanker(alpha, items)
    for s in stream:
        lazy.observe(s)
        dense.observe(s)
    a, b = lazy.probabilities(), dense.probabilities()
    assert max(abs(a[k] - b[k]) for k in items) < 1e-9
    assert lazy.total_mass() == pytest.approx(1.0, abs=1e-9)


def test_rescale_keeps_weights_finite():
    # alpha small enough that the lazy scale would underflow without folding
    t = table(0.01, items=["a", "b"])
    t.observe_many(["a"] * 5000 + ["b"])
    assert t.probability("b") == pytest.approx(0.99)
    assert t.probability("a") == pytest.approx(0.01)
    assert math.isfinite(t.total_mass())


def test_set_alpha_matches_dense():
    items = ["a", "b", "c"]
    lazy, dense = table(0.9, items=items), DenseRanker(0.9, items)
    for s in "abcaab":
        lazy.observe(s)
        dense.observe(s)
    lazy.set_alpha(0.6)
    dense.set_alpha(0.6)
    for s in "cccab":
        lazy.observe(s)
        dense.observe(s)
    a, b = lazy.probabilities(), dense.probabilities()
    assert all(abs(a[k] - b[k]) < 1e-12 for k in items)
    assert lazy.params.half_life == pytest.approx(alpha_to_half_life(0.6))


def test_snapshot_continuation_bit_exact():
    rng = random.Random(5)
    stream = rng.choices("abcdefg", k=3000)
    whole = table(0.97, items="abc")
    whole.observe_many(stream)
    first = table(0.97, items="abc")
    first.observe_many(stream[:1234])
    resumed = DecayRankTable.restore(first.snapshot())
    resumed.observe_many(stream[1234:])
    assert resumed.probabilities() == whole.probabilities()
    assert resumed.snapshot() == whole.snapshot()


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda d: d.pop("alpha"), "alpha"),
        (lambda d: d.update(version=99), "version"),
        (lambda d: d.update(format="other"), "format"),
        (lambda d: d.update(weights={"a": -1.0}), "weights"),
        (lambda d: d.update(global_step="x"), "global_step"),
    ],
)
def test_snapshot_rejects_bad_fields(mutate, field):
    import json

    t = table(0.9, items="ab")
    doc = json.loads(t.snapshot())
    mutate(doc)
    with pytest.raises(SnapshotFormatError) as info:
        DecayRankTable.restore(json.dumps(doc).encode())
    assert info.value.field == field


def test_snapshot_rejects_garbage():
    with pytest.raises(SnapshotFormatError):
        DecayRankTable.restore(b"not json")


def test_top_k_order_and_ties():
    t = DecayRankTable(DecayParams.from_alpha(0.5), initial={"b": 0.25, "a": 0.25, "c": 0.5})
    assert [k for k, _ in t.top_k(3)] == ["c", "a", "b"]
    assert len(t.top_k(10)) == 3


def test_top_k_tracks_dominant_item():
    # over 100 seeded streams the item with the largest arrival rate ranks first
    hits = 0
    for seed in range(100):
        rng = random.Random(seed)
        t = table(0.99, items="abcd")
        t.observe_many(rng.choices("abcd", weights=[0.55, 0.15, 0.15, 0.15], k=2000))
        hits += t.top_k(1)[0][0] == "a"
    assert hits >= 95


def test_eviction_drops_small_items():
    t = table(0.5, items="ab", evict_below=1e-6)
    t.observe_many(["a"] * 2000)
    assert "b" not in t.probabilities()


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0.05, 0.999),
    stream=st.lists(st.sampled_from("abcde"), max_size=300),
)
def test_probabilities_stay_a_distribution(alpha, stream):
    t = table(alpha, items="abcde")
    t.observe_many(stream)
    p = t.probabilities()
    assert all(v >= 0 for v in p.values())
    assert math.fsum(p.values()) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.05, 0.99), stream=st.lists(st.sampled_from("xyz"), min_size=1, max_size=100))
def test_update_rule_property(alpha, stream):
    t = table(alpha, items="xyz")
    t.observe_many(stream[:-1])
    before = t.probabilities()
    t.observe(stream[-1])
    after = t.probabilities()
    for k in "xyz":
        expect = alpha * before[k] + (1 - alpha) * (k == stream[-1])
        assert after[k] == pytest.approx(expect, abs=1e-12)
