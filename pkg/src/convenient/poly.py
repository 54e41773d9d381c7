"""Exact multivariate polynomial maps ``R^n -> R^m`` and their jets.

Polynomials stand in for smooth maps: they are closed under composition,
differentiation and partial evaluation, and every identity can be checked
without rounding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations_with_replacement, product
from typing import Iterable, Iterator, Mapping, Sequence

from .spaces import DimensionError, RealN, Vector, format_scalar, scalar

Exps = tuple  # exponent multi-index, one entry per variable
SPoly = dict  # scalar polynomial: {Exps: Fraction}

_ZERO = Fraction(0)
_ONE = Fraction(1)


# -- scalar polynomial kernels (plain dicts, used internally) ---------------


def _sp_add_into(acc: SPoly, other: SPoly, c: Fraction = _ONE) -> None:
    for e, v in other.items():
        w = acc.get(e, _ZERO) + c * v
        if w:
            acc[e] = w
        else:
            acc.pop(e, None)


def _sp_mul(a: SPoly, b: SPoly) -> SPoly:
    out: SPoly = {}
    for ea, va in a.items():
        for eb, vb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            w = out.get(e, _ZERO) + va * vb
            if w:
                out[e] = w
            else:
                del out[e]
    return out


def _sp_partial(a: SPoly, i: int) -> SPoly:
    out: SPoly = {}
    for e, v in a.items():
        k = e[i]
        if k:
            out[e[:i] + (k - 1,) + e[i + 1:]] = v * k
    return out


def _sp_eval(a: SPoly, x: Sequence) -> Fraction:
    total = _ZERO
    for e, v in a.items():
        term = v
        for xi, k in zip(x, e):
            if k:
                term *= xi**k
        total += term
    return total


# -- PolyMap -----------------------------------------------------------------


@dataclass(frozen=True)
class PolyMap:
    """Polynomial map with ``nvars`` inputs and ``nout`` outputs.

    ``terms`` holds ``((out, exps), coeff)`` pairs with no zero coefficient,
    sorted lexicographically so that equal maps have equal ``terms``.
    """

    nvars: int
    nout: int
    terms: tuple

    @classmethod
    def build(cls, nvars: int, nout: int, mapping: Mapping) -> PolyMap:
        items = []
        for (out, exps), c in mapping.items():
            exps = tuple(int(k) for k in exps)
            if not 0 <= out < nout:
                raise DimensionError(f"output index {out} outside 0..{nout - 1}")
            if len(exps) != nvars or any(k < 0 for k in exps):
                raise DimensionError(f"bad exponent vector {exps} for {nvars} variables")
            c = scalar(c)
            if c:
                items.append(((out, exps), c))
        items.sort()
        return cls(nvars, nout, tuple(items))

    @classmethod
    def _from_rows(cls, nvars: int, rows: Sequence[SPoly]) -> PolyMap:
        items = [((i, e), c) for i, row in enumerate(rows) for e, c in row.items() if c]
        items.sort()
        return cls(nvars, len(rows), tuple(items))

    @cached_property
    def rows(self) -> tuple:
        rows = [dict() for _ in range(self.nout)]
        for (out, e), c in self.terms:
            rows[out][e] = c
        return tuple(rows)

    @property
    def domain(self) -> RealN:
        return RealN(self.nvars)

    @property
    def codomain(self) -> RealN:
        return RealN(self.nout)

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero map."""
        return max((sum(e) for (_, e), _ in self.terms), default=-1)

    def is_linear(self) -> bool:
        return all(sum(e) == 1 for (_, e), _ in self.terms)

    def component(self, i: int) -> PolyMap:
        return PolyMap._from_rows(self.nvars, [self.rows[i]])

    def __call__(self, x) -> Vector:
        return poly_eval(self, x)

    def __add__(self, other: PolyMap) -> PolyMap:
        _same_shape(self, other)
        rows = [dict(r) for r in self.rows]
        for acc, r in zip(rows, other.rows):
            _sp_add_into(acc, r)
        return PolyMap._from_rows(self.nvars, rows)

    def __sub__(self, other: PolyMap) -> PolyMap:
        return self + other.scale(-1)

    def scale(self, c) -> PolyMap:
        c = scalar(c)
        return PolyMap._from_rows(
            self.nvars, [{e: c * v for e, v in r.items()} if c else {} for r in self.rows]
        )

    def __mul__(self, other: PolyMap) -> PolyMap:
        """Pointwise product of a scalar-valued map with another map."""
        if self.nvars != other.nvars:
            raise DimensionError("product of maps on different domains")
        if self.nout == 1:
            (s,) = self.rows
            return PolyMap._from_rows(self.nvars, [_sp_mul(s, r) for r in other.rows])
        if other.nout == 1:
            return other * self
        raise DimensionError("pointwise product needs a scalar-valued factor")

    def __str__(self) -> str:
        names = [f"x{i}" for i in range(self.nvars)] if self.nvars > 1 else ["t"]
        outs = []
        for row in self.rows:
            parts = []
            for e in sorted(row):
                mono = "*".join(
                    n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k
                )
                c = format_scalar(row[e])
                parts.append(f"{c}*{mono}" if mono else c)
            outs.append(" + ".join(parts) or "0")
        return "(" + ", ".join(outs) + ")" if self.nout != 1 else outs[0]


def _same_shape(p: PolyMap, q: PolyMap) -> None:
    if (p.nvars, p.nout) != (q.nvars, q.nout):
        raise DimensionError(f"R^{p.nvars}->R^{p.nout} vs R^{q.nvars}->R^{q.nout}")


def _as_vector(x) -> Vector:
    return x if isinstance(x, Vector) else Vector.from_iter(x)


# -- constructors -----------------------------------------------------------


def zero_map(nvars: int, nout: int) -> PolyMap:
    return PolyMap(nvars, nout, ())


def constant_map(nvars: int, value) -> PolyMap:
    value = _as_vector(value)
    zero = (0,) * nvars
    return PolyMap._from_rows(nvars, [{zero: c} if c else {} for c in value])


def variable(nvars: int, i: int) -> PolyMap:
    e = tuple(int(j == i) for j in range(nvars))
    return PolyMap(nvars, 1, (((0, e), _ONE),))


def linear_map(matrix: Sequence[Sequence], nvars: int | None = None) -> PolyMap:
    """Linear map given by the rows of ``matrix`` (one row per output)."""
    if nvars is None:
        nvars = len(matrix[0]) if matrix else 0
    mapping = {}
    for i, row in enumerate(matrix):
        if len(row) != nvars:
            raise DimensionError("ragged matrix")
        for j, c in enumerate(row):
            mapping[(i, tuple(int(k == j) for k in range(nvars)))] = c
    return PolyMap.build(nvars, len(matrix), mapping)


def identity_map(n: int) -> PolyMap:
    return linear_map([[int(i == j) for j in range(n)] for i in range(n)], n)


def stack(maps: Sequence[PolyMap], nvars: int | None = None) -> PolyMap:
    """Concatenate the outputs of maps sharing one domain."""
    if nvars is None:
        if not maps:
            raise ValueError("cannot infer domain of an empty stack")
        nvars = maps[0].nvars
    rows: list = []
    for m in maps:
        if m.nvars != nvars:
            raise DimensionError("stacked maps must share a domain")
        rows.extend(dict(r) for r in m.rows)
    return PolyMap._from_rows(nvars, rows)


def partial(p: PolyMap, i: int) -> PolyMap:
    if not 0 <= i < p.nvars:
        raise DimensionError(f"no variable {i} in R^{p.nvars}")
    return PolyMap._from_rows(p.nvars, [_sp_partial(r, i) for r in p.rows])


def directional(p: PolyMap, v) -> PolyMap:
    """The polynomial ``x -> dp(x)(v)``."""
    v = _as_vector(v)
    if len(v) != p.nvars:
        raise DimensionError(f"direction in R^{len(v)} for map on R^{p.nvars}")
    rows = [dict() for _ in range(p.nout)]
    for i, vi in enumerate(v):
        if vi:
            for acc, r in zip(rows, p.rows):
                _sp_add_into(acc, _sp_partial(r, i), vi)
    return PolyMap._from_rows(p.nvars, rows)


# -- the four core operations ------------------------------------------------


def matrix_rank(rows: Sequence[Sequence]) -> int:
    """Rank of a rational matrix by Gaussian elimination."""
    m = [[Fraction(a) for a in r] for r in rows]
    rank = 0
    for col in range(len(m[0]) if m else 0):
        piv = next((r for r in range(rank, len(m)) if m[r][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col]:
                f = m[r][col] / m[rank][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def poly_eval(p: PolyMap, x) -> Vector:
    x = _as_vector(x)
    if len(x) != p.nvars:
        raise DimensionError(f"point in R^{len(x)} for map on R^{p.nvars}")
    return Vector(tuple(_sp_eval(r, x.coords) for r in p.rows))


def poly_compose(g: PolyMap, f: PolyMap) -> PolyMap:
    """The composite ``g o f``."""
    if f.nout != g.nvars:
        raise DimensionError(f"cannot compose R^{g.nvars}->.. after ..->R^{f.nout}")
    n = f.nvars
    one = {(0,) * n: _ONE}
    powers: dict = {}

    def power(j: int, k: int) -> SPoly:
        if k == 0:
            return one
        key = (j, k)
        if key not in powers:
            powers[key] = _sp_mul(power(j, k - 1), f.rows[j])
        return powers[key]

    rows = []
    for grow in g.rows:
        acc: SPoly = {}
        for e, c in grow.items():
            term = one
            for j, k in enumerate(e):
                if k:
                    term = _sp_mul(term, power(j, k))
            _sp_add_into(acc, term, c)
        rows.append(acc)
    return PolyMap._from_rows(n, rows)


def poly_diff(p: PolyMap, x, v) -> Vector:
    """Directional derivative ``dp(x)(v)``, exactly."""
    x, v = _as_vector(x), _as_vector(v)
    if len(x) != p.nvars or len(v) != p.nvars:
        raise DimensionError(f"point/direction do not live in R^{p.nvars}")
    out = []
    for row in p.rows:
        total = _ZERO
        for e, c in row.items():
            for i, k in enumerate(e):
                if k and v[i]:
                    term = c * k * v[i]
                    for j, kj in enumerate(e):
                        m = kj - 1 if j == i else kj
                        if m:
                            term *= x[j] ** m
                    total += term
        out.append(total)
    return Vector(tuple(out))


def poly_curry(p: PolyMap, x1) -> PolyMap:
    """Fix the leading ``len(x1)`` variables of ``p`` to ``x1``.

    A map on ``R^a & R^b`` is a map on ``R^(a+b)`` whose first ``a``
    variables are the left factor; the result is a map on ``R^b``.
    """
    x1 = _as_vector(x1)
    a = len(x1)
    if a > p.nvars:
        raise DimensionError(f"cannot fix {a} of {p.nvars} variables")
    rows = []
    for row in p.rows:
        acc: SPoly = {}
        for e, c in row.items():
            w = c
            for xi, k in zip(x1, e[:a]):
                if k:
                    w *= xi**k
            if w:
                rest = e[a:]
                s = acc.get(rest, _ZERO) + w
                if s:
                    acc[rest] = s
                else:
                    del acc[rest]
        rows.append(acc)
    return PolyMap._from_rows(p.nvars - a, rows)


# -- jets ----------------------------------------------------------------------


@dataclass(frozen=True)
class Jet:
    """Raw derivative tensors of a map at ``basepoint`` up to ``order``.

    ``derivatives[j]`` maps each sorted index tuple of length ``j`` to the
    vector ``d^j f(x)(e_{i1}, ..., e_{ij})``; no factorials are divided out.
    """

    basepoint: Vector
    order: int
    nout: int
    derivatives: tuple

    @property
    def value(self) -> Vector:
        return self.derivatives[0][()]

    def tensor(self, j: int) -> dict:
        return self.derivatives[j]

    def deriv(self, idx: Iterable[int]) -> Vector:
        idx = tuple(sorted(idx))
        return self.derivatives[len(idx)][idx]

    def apply(self, directions: Sequence[Vector]) -> Vector:
        """``d^k f(x)(v1, ..., vk)`` by multilinear expansion."""
        k = len(directions)
        if k > self.order:
            raise ValueError(f"jet of order {self.order} cannot take {k} directions")
        n = len(self.basepoint)
        acc = [_ZERO] * self.nout
        for idx in product(range(n), repeat=k):
            w = _ONE
            for v, i in zip(directions, idx):
                w *= v[i]
                if not w:
                    break
            if w:
                d = self.deriv(idx)
                for o in range(self.nout):
                    acc[o] += w * d[o]
        return Vector(tuple(acc))


def jet_at(p: PolyMap, x, k: int) -> Jet:
    x = _as_vector(x)
    if k < 0:
        raise ValueError("jet order must be non-negative")
    if len(x) != p.nvars:
        raise DimensionError(f"point in R^{len(x)} for map on R^{p.nvars}")
    memo: dict = {(): p}

    def dp(idx: tuple) -> PolyMap:
        if idx not in memo:
            memo[idx] = partial(dp(idx[:-1]), idx[-1])
        return memo[idx]

    derivs = []
    for j in range(k + 1):
        layer = {}
        for idx in combinations_with_replacement(range(p.nvars), j):
            layer[idx] = poly_eval(dp(idx), x)
        derivs.append(layer)
    return Jet(x, k, p.nout, tuple(derivs))


def set_partitions(items: Sequence) -> Iterator[list]:
    """All partitions of ``items`` into non-empty blocks (order-preserving)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def jet_compose(gj: Jet, fj: Jet) -> Jet:
    """Jet of ``g o f`` at ``x`` from the jet of ``f`` at ``x`` and of ``g`` at ``f(x)``.

    Higher-order chain rule: sum over set partitions of the direction slots.
    """
    if gj.order != fj.order:
        raise ValueError(f"jet orders differ: {gj.order} vs {fj.order}")
    if len(gj.basepoint) != fj.nout:
        raise DimensionError("inner jet lands outside the outer jet's domain")
    if gj.basepoint != fj.value:
        raise ValueError("outer jet is not based at the value of the inner jet")
    n = len(fj.basepoint)
    derivs = [{(): gj.value}]
    for j in range(1, fj.order + 1):
        layer = {}
        for idx in combinations_with_replacement(range(n), j):
            acc = Vector.zeros(gj.nout)
            for blocks in set_partitions(range(j)):
                dirs = [fj.deriv(idx[s] for s in block) for block in blocks]
                acc = acc + gj.apply(dirs)
            layer[idx] = acc
        derivs.append(layer)
    return Jet(fj.basepoint, fj.order, gj.nout, tuple(derivs))


# -- interchange format -------------------------------------------------------


def poly_to_json(p: PolyMap) -> dict:
    return {
        "vars": p.nvars,
        "outputs": p.nout,
        "terms": [
            {"out": out, "exps": list(e), "coeff": format_scalar(c)}
            for (out, e), c in p.terms
        ],
    }


def poly_from_json(data) -> PolyMap:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        nvars, nout = int(data["vars"]), int(data["outputs"])
        raw = data["terms"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed polynomial: {exc}") from None
    mapping = {}
    for t in raw:
        key = (int(t["out"]), tuple(int(k) for k in t["exps"]))
        if key in mapping:
            raise ValueError(f"duplicate polynomial term {key}")
        mapping[key] = scalar(str(t["coeff"]))
    return PolyMap.build(nvars, nout, mapping)
