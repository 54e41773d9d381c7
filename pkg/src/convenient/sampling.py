"""Seeded generators of small exact test data.

Coefficients are rationals in ``[-10, 10]`` with denominator at most 8, which
keeps canonical forms small and failure diffs readable.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .exponential.elements import Distribution, Pair
from .exponential.testfunctional import TestFunctional
from .poly import PolyMap
from .spaces import Dist, Prod, RealN, Space, UnitSp, Vector

BOUND = 10
MAX_DEN = 8


def rng_for(seed, label: str) -> random.Random:
    """Independent, reproducible stream per (seed, label)."""
    return random.Random(f"{seed}/{label}")


def rand_scalar(rng: random.Random, nonzero: bool = False) -> Fraction:
    while True:
        den = rng.randint(1, MAX_DEN)
        q = Fraction(rng.randint(-BOUND * den, BOUND * den), den)
        if q or not nonzero:
            return q


def rand_vector(rng: random.Random, n: int, nonzero: bool = False) -> Vector:
    while True:
        v = Vector(tuple(rand_scalar(rng) for _ in range(n)))
        if n == 0 or not nonzero or not v.is_zero():
            return v


def rand_element(rng: random.Random, space: Space, depth: int = 0):
    if isinstance(space, RealN):
        return rand_vector(rng, space.dim)
    if isinstance(space, UnitSp):
        return rand_scalar(rng)
    if isinstance(space, Prod):
        return Pair(rand_element(rng, space.left, depth), rand_element(rng, space.right, depth))
    if isinstance(space, Dist):
        return rand_distribution(rng, space.inner, max_order=1, max_terms=2)
    raise TypeError(f"no generator for {space}")


def rand_poly(
    rng: random.Random, nvars: int, nout: int, max_degree: int = 4, max_terms: int = 4
) -> PolyMap:
    mapping = {}
    for out in range(nout):
        for _ in range(rng.randint(1, max_terms)):
            d = rng.randint(0, max_degree)
            exps = [0] * nvars
            if nvars:
                for _ in range(d):
                    exps[rng.randrange(nvars)] += 1
            mapping[(out, tuple(exps))] = rand_scalar(rng)
    return PolyMap.build(nvars, nout, mapping)


def rand_distribution(
    rng: random.Random, space: Space, max_order: int = 2, max_terms: int = 3
) -> Distribution:
    raw = []
    for _ in range(rng.randint(1, max_terms)):
        k = rng.randint(0, max_order)
        base = rand_element(rng, space)
        dirs = [rand_element(rng, space) for _ in range(k)]
        raw.append((rand_scalar(rng, nonzero=True), base, dirs))
    return Distribution.build(space, raw)


def rand_testfunctional(rng: random.Random, space: Space, degree: int = 3) -> TestFunctional:
    """Random probe: a polynomial on ``R^n``-like spaces, a cylinder on ``!S``."""
    if isinstance(space, Dist):
        m = rng.randint(1, 2)
        probes = [rand_testfunctional(rng, space.inner, 2) for _ in range(m)]
        return TestFunctional.cylinder(space.inner, rand_poly(rng, m, 1, min(degree, 3)), probes)
    n = _flat(space)
    return TestFunctional.from_poly(space, rand_poly(rng, n, 1, degree))


def _flat(space: Space) -> int:
    if isinstance(space, RealN):
        return space.dim
    if isinstance(space, UnitSp):
        return 1
    if isinstance(space, Prod):
        return _flat(space.left) + _flat(space.right)
    raise TypeError(f"no polynomial probes on {space}")
