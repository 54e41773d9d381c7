import sys
from fractions import Fraction

from hypothesis import settings, strategies as st

from convenient.exponential.elements import Distribution
from convenient.poly import PolyMap
from convenient.spaces import RealN, Vector

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def rationals(bound=10, max_den=8):
    return st.builds(
        lambda d, k: Fraction(k, d),
        st.integers(1, max_den),
        st.integers(-bound * 8, bound * 8),
    )


def vectors(n):
    return st.lists(rationals(), min_size=n, max_size=n).map(lambda xs: Vector(tuple(xs)))


@st.composite
def polys(draw, nvars, nout=1, max_degree=4, max_terms=4):
    mapping = {}
    for out in range(nout):
        for _ in range(draw(st.integers(0, max_terms))):
            d = draw(st.integers(0, max_degree))
            exps = [0] * nvars
            if nvars:
                for _ in range(d):
                    exps[draw(st.integers(0, nvars - 1))] += 1
            mapping[(out, tuple(exps))] = draw(rationals())
    return PolyMap.build(nvars, nout, mapping)


@st.composite
def distributions(draw, n, max_order=2, max_terms=3):
    raw = []
    for _ in range(draw(st.integers(1, max_terms))):
        k = draw(st.integers(0, max_order))
        raw.append((draw(rationals()), draw(vectors(n)), [draw(vectors(n)) for _ in range(k)]))
    return Distribution.build(RealN(n), raw)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
