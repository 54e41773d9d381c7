"""Bialgebra, comonad and differential structure on finite-order distributions."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import factorial
from typing import Callable

from ..poly import PolyMap, jet_at, set_partitions
from ..spaces import DimensionError, Dist, Prod, RealN, Space, Vector
from .elements import (
    Distribution,
    Pair,
    Tensor,
    add,
    as_tensor,
    atoms,
    element_of_atom,
    linear_combination,
    space_of,
    zero,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


# -- unit terms ---------------------------------------------------------------


def dirac(x, space: Space | None = None) -> Distribution:
    """``delta_x``."""
    space = space or space_of(x)
    atoms(space, x)
    return Distribution.from_atoms(space, {(x, ()): _ONE})


def unit_nu(space: Space) -> Distribution:
    """``delta_0``, the unit of convolution."""
    return dirac(zero(space), space)


def coder(v, space: Space | None = None) -> Distribution:
    """Codereliction ``D_v delta_0``."""
    space = space or space_of(v)
    origin = zero(space)
    return Distribution.from_atoms(
        space, {(origin, (a,)): c for a, c in atoms(space, v).items()}
    )


def derive_dA(v, u: Distribution) -> Distribution:
    """Deriving transformation: add the direction ``v`` to every term of ``u``."""
    space = u.space
    acc: dict = defaultdict(Fraction)
    for a, cv in atoms(space, v).items():
        for (base, dirs), c in u.terms:
            acc[(base, tuple(sorted(dirs + (a,))))] += cv * c
    return Distribution.from_atoms(space, acc)


# -- bialgebra ----------------------------------------------------------------


def counit_e(u: Distribution) -> Fraction:
    """``e``: total mass of the order-zero terms."""
    return sum((c for (_, dirs), c in u.terms if not dirs), _ZERO)


def _splits(dirs: tuple):
    k = len(dirs)
    for mask in range(1 << k):
        left = tuple(dirs[i] for i in range(k) if mask >> i & 1)
        right = tuple(dirs[i] for i in range(k) if not mask >> i & 1)
        yield left, right


def comul_delta(u: Distribution) -> Tensor:
    """``Delta``: Leibniz splitting of the direction multiset of each term."""
    acc: dict = defaultdict(Fraction)
    for (base, dirs), c in u.terms:
        for left, right in _splits(dirs):
            acc[((base, left), (base, right))] += c
    d = Dist(u.space)
    return Tensor.from_atoms((d, d), acc)


def _nabla_atoms(space: Space, a, b):
    (x, v), (y, w) = a, b
    return (add(space, x, y), tuple(sorted(v + w)))


def conv_nabla(t: Tensor) -> Distribution:
    """``nabla``: convolution ``D_V delta_x (x) D_W delta_y -> D_{V+W} delta_{x+y}``."""
    if t.arity != 2 or t.factors[0] != t.factors[1] or not isinstance(t.factors[0], Dist):
        raise DimensionError("nabla needs a tensor in !E (x) !E")
    space = t.factors[0].inner
    acc: dict = defaultdict(Fraction)
    for (a, b), c in t.terms:
        acc[_nabla_atoms(space, a, b)] += c
    return Distribution.from_atoms(space, acc)


def eps(u: Distribution):
    """Dereliction ``epsilon``: order 0 gives the base, order 1 the direction."""
    space = u.space
    parts = []
    for (base, dirs), c in u.terms:
        if not dirs:
            parts.append((c, base))
        elif len(dirs) == 1:
            parts.append((c, element_of_atom(space, dirs[0])))
    return linear_combination(space, parts)


# -- functorial action ----------------------------------------------------------


@dataclass(frozen=True)
class SmoothMap:
    """A smooth map known through its derivatives.

    ``derivative(x, dirs)`` returns the ``len(dirs)``-th derivative at ``x``
    along the atoms ``dirs`` of the domain; ``dirs == ()`` is the value.
    """

    domain: Space
    codomain: Space
    derivative: Callable

    def __call__(self, x):
        return self.derivative(x, ())

    @classmethod
    def of_poly(cls, f: PolyMap) -> SmoothMap:
        jets: dict = {}

        def derivative(x, dirs):
            k = len(dirs)
            key = x
            if key not in jets or jets[key].order < k:
                jets[key] = jet_at(f, x, max(k, 1))
            return jets[key].deriv(dirs)

        return cls(f.domain, f.codomain, derivative)

    @classmethod
    def linear(cls, domain: Space, codomain: Space, fn: Callable) -> SmoothMap:
        origin = zero(codomain)

        def derivative(x, dirs):
            if not dirs:
                return fn(x)
            if len(dirs) == 1:
                return fn(element_of_atom(domain, dirs[0]))
            return origin

        return cls(domain, codomain, derivative)

    def to_poly(self, degree: int) -> PolyMap:
        """Rebuild a polynomial of degree ``<= degree`` from its Taylor data at 0.

        Only for maps ``R^n -> R^m`` that really are polynomials of that degree.
        """
        if not isinstance(self.domain, RealN) or not isinstance(self.codomain, RealN):
            raise DimensionError("to_poly needs a map R^n -> R^m")
        n, m = self.domain.dim, self.codomain.dim
        origin = Vector.zeros(n)
        mapping: dict = {}
        for j in range(degree + 1):
            for idx in combinations_with_replacement(range(n), j):
                d = self.derivative(origin, idx)
                exps = tuple(idx.count(i) for i in range(n))
                denom = 1
                for k in exps:
                    denom *= factorial(k)
                for o in range(m):
                    if d[o]:
                        mapping[(o, exps)] = d[o] / denom
        return PolyMap.build(n, m, mapping)


_PARTITIONS: dict = {}


def _partitions(k: int):
    if k not in _PARTITIONS:
        _PARTITIONS[k] = list(set_partitions(range(k)))
    return _PARTITIONS[k]


def push(f: SmoothMap, u: Distribution) -> Distribution:
    """``!f`` on a distribution, by the higher-order chain rule.

    ``c D_{a_1..a_k} delta_x`` goes to the sum over set partitions of the
    slots of ``c D_{f^(B)(x)(a_B) : B} delta_{f(x)}``.
    """
    if u.space != f.domain:
        raise DimensionError(f"map on {f.domain} pushed along a distribution on {u.space}")
    target = f.codomain
    acc: dict = defaultdict(Fraction)
    for (x, dirs), c in u.terms:
        y = f.derivative(x, ())
        memo: dict = {}
        for blocks in _partitions(len(dirs)):
            expansions = []
            for block in blocks:
                sub = tuple(sorted(dirs[i] for i in block))
                if sub not in memo:
                    memo[sub] = atoms(target, f.derivative(x, sub))
                expansions.append(memo[sub].items())
            for combo in product(*expansions):
                w = c
                for _, cw in combo:
                    w *= cw
                acc[(y, tuple(sorted(a for a, _ in combo)))] += w
    return Distribution.from_atoms(target, acc)


def pushforward(f: PolyMap, u: Distribution) -> Distribution:
    """``!f`` for a polynomial map."""
    return push(SmoothMap.of_poly(f), u)


def dirac_map(space: Space) -> SmoothMap:
    """``dirac : E -> !E`` whose ``k``-th derivative along ``V`` is ``D_V delta_x``."""

    def derivative(x, dirs):
        return Distribution.from_atoms(space, {(x, tuple(sorted(dirs))): _ONE})

    return SmoothMap(space, Dist(space), derivative)


def comultiplication_rho(u: Distribution) -> Distribution:
    """``rho = !dirac``, landing in distributions on ``!E``."""
    return push(dirac_map(u.space), u)


def eps_map(space: Space) -> SmoothMap:
    """Dereliction ``!E -> E`` as a linear smooth map."""
    return SmoothMap.linear(Dist(space), space, eps)


# -- adjunction C^inf(E, F) = L(!E, F) --------------------------------------------


def lift(f) -> Callable:
    """The linear map ``!E -> F`` with ``c D_V delta_x -> c d^k f(x)(V)``."""
    g = f if isinstance(f, SmoothMap) else SmoothMap.of_poly(f)

    def lifted(u: Distribution):
        if u.space != g.domain:
            raise DimensionError(f"lift of a map on {g.domain} applied on {u.space}")
        return linear_combination(
            g.codomain, ((c, g.derivative(x, dirs)) for (x, dirs), c in u.terms)
        )

    lifted.smooth = g
    return lifted


def lower(phi: Callable, domain: Space, codomain: Space) -> SmoothMap:
    """The smooth map ``x -> phi(delta_x)`` of a linear ``phi : !E -> F``.

    Derivatives come from linearity: ``d^k(phi o dirac)(x)(V) = phi(D_V delta_x)``.
    """

    def derivative(x, dirs):
        return phi(Distribution.from_atoms(domain, {(x, tuple(sorted(dirs))): _ONE}))

    return SmoothMap(domain, codomain, derivative)


# -- Seely isomorphism -----------------------------------------------------------


def seely_split(u: Distribution) -> Tensor:
    """``!(A & B) -> !A (x) !B``; directions split by the factor they live in."""
    space = u.space
    if not isinstance(space, Prod):
        raise DimensionError(f"seely_split needs a product space, got {space}")
    acc: dict = defaultdict(Fraction)
    for (p, dirs), c in u.terms:
        left = tuple(a for s, a in dirs if s == 0)
        right = tuple(a for s, a in dirs if s == 1)
        acc[((p.left, left), (p.right, right))] += c
    return Tensor.from_atoms((Dist(space.left), Dist(space.right)), acc)


def seely_merge(t: Tensor) -> Distribution:
    """``!A (x) !B -> !(A & B)``, inverse of :func:`seely_split`."""
    if t.arity != 2 or not all(isinstance(f, Dist) for f in t.factors):
        raise DimensionError("seely_merge needs a tensor !A (x) !B")
    space = Prod(t.factors[0].inner, t.factors[1].inner)
    acc: dict = defaultdict(Fraction)
    for ((x, v), (y, w)), c in t.terms:
        dirs = tuple(sorted([(0, a) for a in v] + [(1, b) for b in w]))
        acc[(Pair(x, y), dirs)] += c
    return Distribution.from_atoms(space, acc)


# -- tensor-level helpers for the laws ------------------------------------------


def delta_block(space: Space):
    return lambda key: comul_delta(Distribution.from_atoms(space, {key[0]: _ONE}))


def nabla_block(space: Space):
    d = Dist(space)
    return lambda key: as_tensor(d, Distribution.from_atoms(space, {_nabla_atoms(space, *key): _ONE}))


def identity_block(space: Space):
    d = Dist(space)
    return lambda key: Tensor.from_atoms((d,), {key: _ONE})


def counit_block(space: Space):
    return lambda key: Tensor.scalar(_ONE if not key[0][1] else _ZERO)
