from fractions import Fraction
from itertools import count

import pytest
from hypothesis import given, strategies as st

from convenient.bornology import (
    Ball, FiniteSample, Hull, Negate, Scale, Union, cbs_axioms_check, norm_upper, parse_samples_csv,
    product_bounded, radius_of, scalarly_bounded, sqrt_upper,
)
from convenient.exponential.elements import Pair
from convenient.poly import linear_map, variable
from convenient.spaces import Vector

from conftest import rationals, vectors

V = Vector.of
F = Fraction
coords2 = [linear_map([[1, 0]]), linear_map([[0, 1]])]


def test_radius_examples():
    assert radius_of(Ball(2, F(3))) == 3
    assert radius_of(Union((Ball(2, F(1)), Ball(2, F(2))))) == 2
    assert radius_of(Scale(F(-2), Ball(2, F(5, 7)))) == F(10, 7)
    assert radius_of(FiniteSample.of([V(3, 4), V(0, 1)])) == 5
    assert radius_of(FiniteSample(2)) == 0


def test_sqrt_upper_bounds():
    assert sqrt_upper(F(9, 4)) == F(3, 2)
    r = sqrt_upper(F(2))
    assert r * r > 2
    assert r - F(2**0.5) < F(1, 2**30)
    with pytest.raises(ValueError):
        sqrt_upper(F(-1))


def test_malformed_certificates():
    with pytest.raises(ValueError):
        Ball(1, F(-1))
    with pytest.raises(ValueError):
        Union((Ball(1, F(1)), Ball(2, F(1))))
    with pytest.raises(ValueError):
        FiniteSample(2, (V(1),))


def test_cbs_axioms_examples():
    rep = cbs_axioms_check([FiniteSample.of([V(1, 0), V(0, 1)])])
    assert rep["ok"]
    hull = next(c for c in rep["checks"] if c["check"] == "hull")
    assert hull["radius"] == "1"
    assert {c["check"] for c in rep["checks"]} >= {"hull", "negation", "doubling", "singleton", "subset", "union"}
    singletons = [c for c in rep["checks"] if c["check"] == "singleton"]
    assert [c["radius"] for c in singletons] == ["1", "1"]


def test_cbs_mixed_spaces():
    with pytest.raises(ValueError, match="different spaces"):
        cbs_axioms_check([Ball(1, F(1)), Ball(2, F(1))])
    with pytest.raises(ValueError):
        cbs_axioms_check([])


def test_scalarly_bounded_examples():
    circle = [V(1, 0), V(0, 1), V(-1, 0), V(F(3, 5), F(-4, 5))]
    rep = scalarly_bounded(circle, coords2)
    assert rep.verdict == "bounded" and rep.suprema == [1, 1] and rep.spans_dual

    stream = (V(k, 2 * k) for k in count())
    rep = scalarly_bounded(stream, [linear_map([[1, 1]])], limit=256)
    assert rep.verdict == "unbounded"
    assert rep.witness["growth"] == ["381", "765"]

    rep = scalarly_bounded(circle, [])
    assert rep.verdict == "vacuous" and rep.bounded and rep.witness


def test_streamed_bounded_sample():
    stream = (V(F(1, k + 1), F(-1)) for k in count())
    rep = scalarly_bounded(stream, coords2, limit=128)
    assert rep.verdict == "bounded" and rep.suprema == [1, 1]


def test_stream_needs_limit_and_linear_family():
    with pytest.raises(ValueError, match="limit"):
        scalarly_bounded(iter([V(1, 1)]), coords2)
    x = variable(2, 0)
    with pytest.raises(ValueError, match="not a linear functional"):
        scalarly_bounded([V(1, 1)], [x * x])


def test_null_direction_stays_bounded():
    # a functional vanishing on v does not see the growth of k*v
    stream = (V(k, -k) for k in count())
    rep = scalarly_bounded(stream, [linear_map([[1, 1]])], limit=64)
    assert rep.verdict == "bounded" and not rep.spans_dual


def test_product_examples():
    sample = [Pair(V(1, 0), V(0, 2)), Pair(V(0, F(1, 2)), V(F(-6, 5), F(8, 5)))]
    rep = product_bounded(sample)
    assert rep.bounded and rep.radii == (1, 2)

    diverging = (Pair(V(k), V(0, 1)) for k in count())
    rep = product_bounded(diverging, limit=64)
    assert not rep.bounded and rep.witness["projection"] == "left"

    rep = product_bounded([])
    assert rep.bounded and rep.radii == (0, 0)


def test_product_mixed_spaces():
    with pytest.raises(ValueError):
        product_bounded([Pair(V(1), V(1)), Pair(V(1, 2), V(1))])


def test_samples_csv():
    assert parse_samples_csv("x,y\n1,2\n1/2,-3\n") == [V(1, 2), V(F(1, 2), -3)]
    with pytest.raises(ValueError):
        parse_samples_csv("1,2\n3\n")


points = st.lists(vectors(2), min_size=1, max_size=6)


def certs():
    leaf = st.one_of(
        rationals().map(lambda r: Ball(2, abs(r))),
        points.map(FiniteSample.of),
    )
    return st.recursive(leaf, lambda inner: st.one_of(
        inner.map(Hull),
        inner.map(Negate),
        st.tuples(rationals(), inner).map(lambda p: Scale(*p)),
        st.lists(inner, min_size=1, max_size=3).map(lambda ps: Union(tuple(ps))),
    ), max_leaves=6)


@given(certs(), certs())
def test_union_monotone(a, b):
    u = radius_of(Union((a, b)))
    assert u >= radius_of(a) and u >= radius_of(b)
    assert u == max(radius_of(a), radius_of(b))


@given(rationals(), certs())
def test_scale_multiplicative(lam, c):
    assert radius_of(Scale(lam, c)) == abs(lam) * radius_of(c)


@given(points)
def test_sample_radius_covers_points(ps):
    r = radius_of(FiniteSample.of(ps))
    assert all(sum(x * x for x in p) <= r * r for p in ps)


@given(certs())
def test_cbs_closure_always_certified(c):
    assert cbs_axioms_check([c])["ok"]


@given(points)
def test_coordinate_family_matches_max_norm(ps):
    rep = scalarly_bounded(ps, coords2)
    assert max(rep.suprema) == max(max(abs(x) for x in p) for p in ps)
    assert max(rep.suprema) <= max(norm_upper(p) for p in ps)


@given(st.lists(st.tuples(vectors(1), vectors(2)), max_size=6))
def test_product_agrees_with_projections(pairs):
    rep = product_bounded([Pair(a, b) for a, b in pairs])
    left = scalarly_bounded([a for a, _ in pairs], [linear_map([[1]])])
    right = scalarly_bounded([b for _, b in pairs], coords2)
    assert rep.bounded == (left.bounded and right.bounded)
    assert rep.radii[0] == max(left.suprema)
