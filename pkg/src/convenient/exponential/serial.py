"""JSON encodings of points, distributions and tensors.

* ``R^n``: a list of rational strings, ``["1", "-2/3"]``;
* ``I``: a rational string;
* ``A & B``: a two-element list ``[a, b]``;
* ``!S``: ``{"terms": [{"coeff": "p/q", "base": <S>, "dirs": [<S>, ...]}]}``;
* ``A (x) B``: ``{"terms": [{"coeff": "p/q", "factors": [<A>, <B>]}]}``.

Top-level distribution documents also carry ``"space"``.  Loading always
re-canonicalizes, so equal inputs give equal values.
"""

from __future__ import annotations

import json

from ..spaces import Dist, Prod, RealN, Space, TensorSp, UnitSp, Vector, format_scalar, parse_space, scalar
from .elements import Distribution, Pair, Tensor, element_of_atom


def encode(space: Space, x):
    if isinstance(space, RealN):
        if not isinstance(x, Vector) or len(x) != space.dim:
            raise ValueError(f"{x!r} is not a point of {space}")
        return [format_scalar(c) for c in x]
    if isinstance(space, UnitSp):
        return format_scalar(scalar(x))
    if isinstance(space, Prod):
        return [encode(space.left, x.left), encode(space.right, x.right)]
    if isinstance(space, Dist):
        inner = space.inner
        return {
            "terms": [
                {
                    "coeff": format_scalar(c),
                    "base": encode(inner, base),
                    "dirs": [encode(inner, element_of_atom(inner, a)) for a in dirs],
                }
                for (base, dirs), c in x.terms
            ]
        }
    if isinstance(space, TensorSp):
        parts = (space.left, space.right)
        return {
            "terms": [
                {
                    "coeff": format_scalar(c),
                    "factors": [encode(s, element_of_atom(s, a)) for s, a in zip(parts, key)],
                }
                for key, c in x.terms
            ]
        }
    raise TypeError(f"no encoding for {space}")


def decode(space: Space, data):
    if isinstance(space, RealN):
        if not isinstance(data, list) or len(data) != space.dim:
            raise ValueError(f"expected {space.dim} coordinates for {space}, got {data!r}")
        return Vector(tuple(scalar(str(c)) for c in data))
    if isinstance(space, UnitSp):
        return scalar(str(data))
    if isinstance(space, Prod):
        if not isinstance(data, list) or len(data) != 2:
            raise ValueError(f"expected a pair for {space}")
        return Pair(decode(space.left, data[0]), decode(space.right, data[1]))
    if isinstance(space, Dist):
        inner = space.inner
        raw = [
            (
                scalar(str(t["coeff"])),
                decode(inner, t["base"]),
                [decode(inner, d) for d in t.get("dirs", [])],
            )
            for t in _terms(data)
        ]
        return Distribution.build(inner, raw)
    if isinstance(space, TensorSp):
        out = Tensor.from_atoms((space.left, space.right), {})
        for t in _terms(data):
            a, b = t["factors"]
            pure = Tensor.pure(
                (space.left, space.right), [decode(space.left, a), decode(space.right, b)]
            )
            out = out + pure.scale(scalar(str(t["coeff"])))
        return out
    raise TypeError(f"no encoding for {space}")


def _terms(data) -> list:
    if not isinstance(data, dict) or not isinstance(data.get("terms"), list):
        raise ValueError("expected an object with a 'terms' list")
    return data["terms"]


def distribution_to_json(u: Distribution) -> dict:
    return {"space": str(u.space), **encode(Dist(u.space), u)}


def distribution_from_json(data) -> Distribution:
    if isinstance(data, str):
        data = json.loads(data)
    return decode(Dist(parse_space(data["space"])), data)
