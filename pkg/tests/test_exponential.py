import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from convenient.exponential import (
    Distribution, Pair, Tensor, TestFunctional, coder, comul_delta, comultiplication_rho, conv_nabla,
    counit_e, derive_dA, dirac, eps, lift, lower, pair, pair_tensor, pushforward, seely_merge,
    seely_split, unit_nu,
)
from convenient.exponential.laws import LAWS, check_differential_axioms, coderelict_limit, full_report
from convenient.exponential.serial import decode, distribution_from_json, distribution_to_json, encode
from convenient.poly import PolyMap, constant_map, identity_map, linear_map, poly_compose, poly_diff, poly_eval, variable
from convenient.sampling import (
    rand_distribution, rand_element, rand_poly, rand_testfunctional, rand_vector, rng_for,
)
from convenient.spaces import Dist, DimensionError, Prod, RealN, UnitSp, Vector

from conftest import distributions, polys, rationals, vectors

V = Vector.of
F = Fraction
R1, R2 = RealN(1), RealN(2)
t = variable(1, 0)


def tf(p, space=None):
    return TestFunctional.from_poly(space or RealN(p.nvars), p)


def directional(f: PolyMap, x: Vector, dirs) -> Fraction:
    """d^k f(x)(v_1..v_k) as the coefficient of s_1...s_k in f(x + sum s_i v_i)."""
    k, n = len(dirs), f.nvars
    shift = {(i, (0,) * k): x[i] for i in range(n)}
    for j, v in enumerate(dirs):
        e = tuple(1 if m == j else 0 for m in range(k))
        for i in range(n):
            shift[(i, e)] = shift.get((i, e), 0) + v[i]
    g = poly_compose(f, PolyMap.build(k, n, shift))
    return dict(g.terms).get((0, (1,) * k), F(0))


def d(x, *dirs, c=1):
    return Distribution.build(RealN(len(x)), [(F(c), x, list(dirs))])


# -- pairing ------------------------------------------------------------------------


def test_pair_examples():
    assert pair(dirac(V(2)), tf(t * t * t)) == 8
    assert pair(dirac(V(F(-7, 3))), TestFunctional.constant(R1, 1)) == 1
    assert pair(coder(V(1)), tf(t * t * t)) == 0
    assert pair(coder(V(1)), tf(t.scale(3))) == 3


def test_pair_space_mismatch():
    with pytest.raises(DimensionError):
        pair(dirac(V(1, 2)), tf(t))


@given(polys(2), vectors(2), st.lists(vectors(2), max_size=3), rationals())
def test_pair_matches_directional_oracle(f, x, dirs, c):
    assert pair(d(x, *dirs, c=c), tf(f)) == c * directional(f, x, dirs)


# -- units and derivations ------------------------------------------------------------


def test_dirac_examples():
    assert dirac(V(0, 0)) == unit_nu(R2)
    assert dirac(V(1, 2)) != dirac(V(1, 3))
    assert dirac(V(1, 2)) == dirac(V(1, 2))


@given(polys(2), vectors(2))
def test_dirac_evaluates(f, x):
    assert pair(dirac(x), tf(f)) == poly_eval(f, x)[0]


def test_coder_examples():
    v = V(3, -1)
    assert eps(coder(v)) == v
    assert pair(coder(V(1)), tf(t * t)) == 0
    assert counit_e(coder(v)) == 0


@given(vectors(3), vectors(3), rationals(), rationals())
def test_coder_linear(v, w, a, b):
    assert coder(v.scale(a) + w.scale(b)) == coder(v).scale(a) + coder(w).scale(b)


def test_comul_examples():
    x, v, w = V(1, 2), V(1, 0), V(0, 1)
    D = Dist(R2)
    assert comul_delta(dirac(x)) == Tensor.pure((D, D), (dirac(x), dirac(x)))
    nu = unit_nu(R2)
    assert comul_delta(coder(v)) == Tensor.pure((D, D), (coder(v), nu)) + Tensor.pure((D, D), (nu, coder(v)))
    expected = (
        Tensor.pure((D, D), (d(x, v, w), d(x)))
        + Tensor.pure((D, D), (d(x, v), d(x, w)))
        + Tensor.pure((D, D), (d(x, w), d(x, v)))
        + Tensor.pure((D, D), (d(x), d(x, v, w)))
    )
    assert comul_delta(d(x, v, w)) == expected


@given(distributions(2, max_order=3), polys(2, max_degree=3), polys(2, max_degree=3))
def test_comul_pairing(u, f, g):
    assert pair_tensor(comul_delta(u), [tf(f), tf(g)]) == pair(u, tf(f * g))


def test_counit_examples():
    x, y = V(1), V(4)
    assert counit_e(dirac(x)) == 1
    assert counit_e(coder(V(5))) == 0
    assert counit_e(dirac(x).scale(3) - dirac(y)) == 2


def test_nabla_examples():
    D = Dist(R2)
    x, y, v, w = V(1, 2), V(-3, 1), V(1, 1), V(2, 0)
    assert conv_nabla(Tensor.pure((D, D), (dirac(x), dirac(y)))) == dirac(x + y)
    u = d(x, v, w, c=F(2, 3)) + d(y)
    assert conv_nabla(Tensor.pure((D, D), (unit_nu(R2), u))) == u
    assert conv_nabla(Tensor.pure((D, D), (coder(v), coder(w)))) == d(V(0, 0), v, w)
    nu = unit_nu(R2)
    assert conv_nabla(Tensor.pure((D, D), (nu, nu))) == nu
    assert counit_e(nu) == 1


def test_nabla_space_mismatch():
    with pytest.raises(DimensionError):
        conv_nabla(Tensor.pure((Dist(R1), Dist(R2)), (dirac(V(1)), dirac(V(1, 1)))))


@given(distributions(1), distributions(1), polys(1, max_degree=4))
def test_nabla_pairing(u, w, f):
    # <nabla(u (x) w), f> = <u (x) w, (a, b) -> f(a + b)>
    D = Dist(R1)
    lhs = pair(conv_nabla(Tensor.pure((D, D), (u, w))), tf(f))
    g = poly_compose(f, linear_map([[1, 1]]))
    rhs = sum(
        cu * cw * directional(g, V(a[0][0], b[0][0]), [V(x[0], 0) for x in a[1]] + [V(0, y[0]) for y in b[1]])
        for a, cu in [(k, c) for k, c in _terms(u)]
        for b, cw in [(k, c) for k, c in _terms(w)]
    )
    assert lhs == rhs


def _terms(u):
    # (base, [direction vectors]) per atom of a distribution on R^1
    return [((b, [Vector.unit(1, i) for i in dirs]), c) for (b, dirs), c in u.terms]


def test_eps_examples():
    x, v, w = V(2, 5), V(1, 0), V(0, 1)
    assert eps(dirac(x)) == x
    assert eps(coder(v)) == v
    assert eps(d(x, v, w)) == V(0, 0)


@given(distributions(2, max_order=3), vectors(2))
def test_eps_dual_to_linear_probes(u, a):
    ell = linear_map([list(a)])
    assert a.dot(eps(u)) == pair(u, tf(ell))


# -- functorial action -------------------------------------------------------------------


def test_pushforward_examples():
    f = PolyMap.build(2, 2, {(0, (1, 1)): 1, (1, (2, 0)): 1, (1, (0, 0)): -1})
    x = V(2, 3)
    assert pushforward(f, dirac(x)) == dirac(poly_eval(f, x))
    u = d(x, V(1, 1), c=3)
    assert pushforward(identity_map(2), u) == u
    v = V(1, -2)
    origin = V(0, 0)
    assert pushforward(f, coder(v)) == d(poly_eval(f, origin), poly_diff(f, origin, v))


def test_pushforward_domain_mismatch():
    with pytest.raises(DimensionError):
        pushforward(identity_map(1), dirac(V(1, 2)))


@given(polys(2, 2, max_degree=3), distributions(2, max_order=4, max_terms=2), polys(2, max_degree=3))
def test_pairing_duality(f, u, g):
    assert pair(pushforward(f, u), tf(g)) == pair(u, tf(poly_compose(g, f)))


def test_rho_examples():
    x, v = V(1, 2), V(0, 1)
    D = Dist(R2)
    assert comultiplication_rho(dirac(x)) == dirac(dirac(x), D)
    rho_coder = comultiplication_rho(coder(v))
    assert rho_coder == Distribution.build(D, [(F(1), unit_nu(R2), [coder(v)])])
    g = tf(PolyMap.build(2, 1, {(0, (1, 2)): 1, (0, (0, 1)): 4}))
    probe = TestFunctional.cylinder(R2, variable(1, 0), [g])
    assert pair(rho_coder, probe) == poly_diff(g.poly, V(0, 0), v)[0]


@given(distributions(2, max_order=2))
def test_eps_after_rho(u):
    assert eps(comultiplication_rho(u)) == u


def test_rho_pairing_random():
    rng = rng_for(0, "rho pairing test")
    for _ in range(40):
        u = rand_distribution(rng, R2, max_order=2)
        F_ = rand_testfunctional(rng, Dist(R2))
        assert pair(comultiplication_rho(u), F_) == pair(u, F_.after_dirac())


# -- adjunction ------------------------------------------------------------------------


def test_lift_examples():
    f = PolyMap.build(2, 2, {(0, (2, 1)): 1, (1, (0, 1)): -3})
    x, v = V(1, 2), V(1, -1)
    assert lift(f)(dirac(x)) == poly_eval(f, x)
    assert lift(f)(coder(v)) == poly_diff(f, V(0, 0), v)
    assert lift(f)(derive_dA(v, dirac(x))) == poly_diff(f, x, v)
    ell = linear_map([[2, 7], [0, 1]])
    u = d(x, v, c=2) + d(V(3, 3)) + d(x, v, v)
    assert lift(ell)(u) == poly_eval(ell, eps(u))


def test_lift_space_mismatch():
    with pytest.raises(DimensionError):
        lift(identity_map(2))(dirac(V(1)))


def test_lower_examples():
    rng = rng_for(0, "lower lift test")
    f = rand_poly(rng, 2, 2, 4, 4)
    g = lower(lift(f), R2, R2)
    for _ in range(100):
        x = rand_vector(rng, 2)
        assert g(x) == poly_eval(f, x)
    ident = lower(eps, R2, R2)
    one = lower(counit_e, R2, UnitSp())
    for x in (V(0, 0), V(F(1, 2), -3)):
        assert ident(x) == x
        assert one(x) == 1


@given(distributions(2, max_order=3), polys(2, 1, max_degree=3))
def test_lift_lower_round_trip(u, f):
    phi = lift(f)
    assert lift(lower(phi, R2, R1))(u) == phi(u)


def test_derive_examples():
    x, v = V(1, 2), V(1, 0)
    assert derive_dA(v, dirac(x)) == d(x, v)
    assert derive_dA(v, unit_nu(R2)) == coder(v)


@given(polys(2), vectors(2), vectors(2))
def test_derive_pairing(f, x, v):
    assert pair(derive_dA(v, dirac(x)), tf(f)) == poly_diff(f, x, v)[0]


# -- Seely ---------------------------------------------------------------------------------


def test_seely_examples():
    P = Prod(R1, R2)
    x, y = V(2), V(1, -1)
    assert seely_split(dirac(Pair(x, y), P)) == Tensor.pure((Dist(R1), Dist(R2)), (dirac(x), dirac(y)))
    v, w = V(3), V(0, 5)
    split = seely_split(coder(Pair(v, w), P))
    expected = (
        Tensor.pure((Dist(R1), Dist(R2)), (coder(v), unit_nu(R2)))
        + Tensor.pure((Dist(R1), Dist(R2)), (unit_nu(R1), coder(w)))
    )
    assert split == expected


def test_seely_needs_product():
    with pytest.raises(DimensionError):
        seely_split(dirac(V(1)))


def test_seely_round_trips():
    rng = rng_for(0, "seely round trip test")
    P = Prod(R2, R2)
    for _ in range(50):
        u = rand_distribution(rng, P, max_order=3)
        assert seely_merge(seely_split(u)) == u
        a, b = rand_distribution(rng, R2, max_order=3), rand_distribution(rng, R2, max_order=3)
        tns = Tensor.pure((Dist(R2), Dist(R2)), (a, b))
        assert seely_split(seely_merge(tns)) == tns


# -- serialization ---------------------------------------------------------------------------


@given(distributions(2, max_order=3))
def test_json_round_trip(u):
    text = json.dumps(distribution_to_json(u))
    assert distribution_from_json(text) == u


def test_json_canonicalizes_on_load():
    doc = {"space": "R^1", "terms": [
        {"coeff": "1", "base": ["0"], "dirs": [["2"]]},
        {"coeff": "-2", "base": ["0"], "dirs": [["1"]]},
    ]}
    assert distribution_from_json(doc) == Distribution.from_atoms(R1, {})


def test_nested_encodings_round_trip():
    rng = rng_for(0, "nested encodings")
    for space in (Dist(Dist(R1)), Prod(R1, Dist(R2))):
        for _ in range(10):
            x = rand_element(rng, space)
            assert decode(space, json.loads(json.dumps(encode(space, x)))) == x


# -- law runner -------------------------------------------------------------------------------


def test_every_law_registered_once():
    names = [lw.name for lw in LAWS]
    assert len(names) == len(set(names))
    assert {"[dC.1]", "[dC.2]", "[dC.3]", "[dC.4]"} <= set(names)


def test_differential_axioms_small_run():
    results = check_differential_axioms(3, 30, seed=1)
    assert results and all(r.passed and r.max_residual == 0 for r in results)


def test_report_json_shape():
    rep = full_report(1, 5, seed=0, order=2).to_json()
    assert rep["schema"] == "convenient.lawreport/1"
    assert rep["summary"]["passed"] and rep["summary"]["laws"] == len(LAWS)
    assert all(law["cases"] == 5 and law["max_residual"] == "0" for law in rep["laws"])
    dc4 = next(law for law in rep["laws"] if law["name"] == "[dC.4]")
    assert dc4["note"]


def test_report_no_cases():
    rep = full_report(2, 0, seed=0, order=2).to_json()
    assert rep["summary"]["no_cases"]


def test_report_rejects_large_space():
    with pytest.raises(ValueError):
        full_report(7, 1, seed=0, order=1)


def test_parallel_report_matches_serial():
    a = full_report(2, 6, seed=3, order=2).to_json()
    b = full_report(2, 6, seed=3, order=2, jobs=2).to_json()
    assert a == b


def test_codereliction_limit_for_a_cubic():
    # <(delta_tv - delta_0)/t, f> - <coder v, f> = a t + b t^2 exactly
    f = PolyMap.build(1, 1, {(0, (3,)): 1, (0, (2,)): 1, (0, (1,)): 2})
    out = coderelict_limit(f, V(1))
    assert out["order"] == pytest.approx(1, abs=0.05)
    assert all(e <= out["C"] * s for e, s in zip(out["errors"], [F(1, 2**k) for k in range(3, 13)]))


def test_codereliction_limit_exact_for_linear():
    out = coderelict_limit(linear_map([[1, 2]]) + constant_map(2, [5]), V(1, 1))
    assert out["order"] is None and out["C"] == 0
