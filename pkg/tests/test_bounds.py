import itertools

import numpy as np
import pytest

from decayrank import bounds
from decayrank.errors import ParameterError
from decayrank.walk import INFINITE, VertexSet, WalkConfig, enumerate_exact


def test_example_bound_value():
    rep = bounds.tail_bound(bounds.BoundQuery(0.99, 0.5, 0.1))
    assert rep.item_bounds[0] == pytest.approx(0.25 / 1.99, abs=1e-4)
    assert rep.intervals[0] == pytest.approx([0.4, 0.6])
    assert 0.87 < 1 - rep.item_bounds[0] < 0.88


@pytest.mark.parametrize("a,q,y0,t,eps", list(itertools.product(
    (0.5, 0.9), (0.1, 0.5), (0.0, 1.0), (1, 5, 10), (0.05, 0.1, 0.2))))
def test_bound_dominates_exact_tail(a, q, y0, t, eps):
    cfg = WalkConfig(alpha=a, q=[1 - q, q], vertices=VertexSet.real([[0.0, 1.0]]), y0=[y0], steps=t)
    ex = enumerate_exact(cfg)
    rep = bounds.tail_bound(bounds.BoundQuery(a, q, eps, t, y0=y0))
    assert ex.tail_probability(rep.centers[0], eps) <= rep.item_bounds_raw[0] + 1e-12


def test_finite_bound_below_limit():
    lim = bounds.tail_bound(bounds.BoundQuery(0.9, [0.2, 0.8], 0.1))
    fin = bounds.tail_bound(bounds.BoundQuery(0.9, [0.2, 0.8], 0.1, 7))
    assert all(f <= l for f, l in zip(fin.item_bounds_raw, lim.item_bounds_raw))
    assert fin.vector_bound_raw <= lim.vector_bound_raw


def test_clamping_keeps_raw():
    rep = bounds.tail_bound(bounds.BoundQuery(0.5, 0.5, 0.01))
    assert rep.item_bounds == [1.0]
    assert rep.item_bounds_raw[0] > 1


def test_seven_eighths_flag():
    assert bounds.tail_bound(bounds.BoundQuery(0.99, 0.5, 0.1)).about_seven_eighths
    assert not bounds.tail_bound(bounds.BoundQuery(0.5, 0.5, 0.1)).about_seven_eighths


def test_relative_error_threshold():
    assert bounds.relative_error_threshold(0.999, 0.1) == pytest.approx(1 / 2.999, abs=1e-12)
    assert bounds.relative_error_threshold(0.0, 0.5) == pytest.approx(1 / 1.125)
    with pytest.raises(ParameterError):
        bounds.relative_error_threshold(0.5, 1.0)


def test_regime_switch_reductions():
    X, P1, P2 = np.array([1.0, 0.0]), np.array([0.3, 0.7]), np.array([0.9, 0.1])
    s = bounds.RegimeSwitchSpec(X=X, P1=P1, P2=P2, t1=0, t2=20, alpha=0.9)
    np.testing.assert_allclose(bounds.regime_switch_mean(s), 0.9**20 * X + (1 - 0.9**20) * P2, atol=1e-15)
    same = bounds.RegimeSwitchSpec(X=X, P1=X, P2=X, t1=5, t2=5, alpha=0.9)
    np.testing.assert_allclose(bounds.regime_switch_mean(same), X, atol=1e-15)
    assert sum(bounds.regime_switch_coefficients(s)) == pytest.approx(1.0, abs=1e-12)


def test_regime_switch_matches_enumeration():
    X, P1, P2 = [0.5, 0.5], [0.8, 0.2], [0.1, 0.9]
    s = bounds.RegimeSwitchSpec(X=X, P1=P1, P2=P2, t1=3, t2=4, alpha=0.7)
    # linearity: run phase one exactly, then phase two from its mean
    m1 = enumerate_exact(WalkConfig(alpha=0.7, q=P1, vertices=VertexSet.simplex(2), y0=X, steps=3)).mean
    m2 = enumerate_exact(WalkConfig(alpha=0.7, q=P2, vertices=VertexSet.simplex(2), y0=m1, steps=4)).mean
    np.testing.assert_allclose(bounds.regime_switch_mean(s), m2, atol=1e-15)


def test_boost_examples():
    r = bounds.boost_ratio(0.99, 100, 100)
    assert r.exact == pytest.approx(0.99**-100, rel=1e-12)
    assert r.approximate == pytest.approx(r.exact, rel=1e-12)
    assert bounds.boost_ratio(1 - 1e-9, 100, 50).exact == pytest.approx(0.5, abs=1e-6)


def test_boost_gap_shrinks_as_alpha_to_one():
    gaps = [bounds.boost_ratio(1 - b, 10, 300).relative_gap for b in (1e-2, 1e-3, 1e-4, 1e-5)]
    assert all(x > y for x, y in zip(gaps, gaps[1:]))


@pytest.mark.parametrize("bad", [dict(alpha=1.0), dict(epsilon=0.0), dict(q=1.2), dict(t=-1)])
def test_query_validation(bad):
    args = dict(alpha=0.9, q=0.5, epsilon=0.1) | bad
    with pytest.raises(ParameterError):
        bounds.BoundQuery(**args)


def test_render_mentions_items():
    text = bounds.tail_bound(bounds.BoundQuery(0.9, [0.25, 0.75], 0.1, INFINITE)).render()
    assert "q=0.25" in text and "vector" in text
