"""Bounded sets of ``R^n`` as radius certificates.

A certificate describes a set built from balls and finite samples by convex
hull, finite union, scaling and negation.  :func:`radius_of` computes a
radius ``r`` with the set inside the closed euclidean ball of radius ``r``.
Norms are exact when the squared norm is a square of a rational and are
otherwise rounded *up* to a rational with a ``2^-32`` relative margin.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import islice
import typing
from pathlib import Path
from typing import Iterable, Sequence

from .exponential.elements import Pair
from .poly import PolyMap, matrix_rank, poly_eval
from .spaces import Vector, format_scalar, scalar

_SQRT_BITS = 32


def sqrt_upper(q: Fraction) -> Fraction:
    """``sqrt(q)`` exactly when it is rational, else a tight upper bound."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("square root of a negative number")
    p, d = q.numerator, q.denominator
    rp, rd = math.isqrt(p), math.isqrt(d)
    if rp * rp == p and rd * rd == d:
        return Fraction(rp, rd)
    scale = 1 << _SQRT_BITS
    return Fraction(math.isqrt(p * d * scale * scale) + 1, d * scale)


def norm_upper(v: Vector) -> Fraction:
    return sqrt_upper(sum((Fraction(x) * Fraction(x) for x in v), Fraction(0)))


# -- certificates ---------------------------------------------------------------------


@dataclass(frozen=True)
class Ball:
    dim: int
    radius: Fraction

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("negative radius")


@dataclass(frozen=True)
class FiniteSample:
    dim: int
    points: tuple = ()

    def __post_init__(self):
        for p in self.points:
            if len(p) != self.dim:
                raise ValueError(f"point {p} is not in R^{self.dim}")

    @classmethod
    def of(cls, points: Sequence[Vector]) -> FiniteSample:
        if not points:
            raise ValueError("empty sample: give the dimension explicitly")
        return cls(len(points[0]), tuple(points))


@dataclass(frozen=True)
class Hull:
    inner: "Cert"

    @property
    def dim(self) -> int:
        return self.inner.dim


@dataclass(frozen=True)
class Union:
    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise ValueError("union of no sets")
        if len({p.dim for p in self.parts}) != 1:
            raise ValueError("union of sets in different spaces")

    @property
    def dim(self) -> int:
        return self.parts[0].dim


@dataclass(frozen=True)
class Scale:
    factor: Fraction
    inner: "Cert"

    @property
    def dim(self) -> int:
        return self.inner.dim


@dataclass(frozen=True)
class Negate:
    inner: "Cert"

    @property
    def dim(self) -> int:
        return self.inner.dim


Cert = typing.Union[Ball, FiniteSample, Hull, Union, Scale, Negate]


def radius_of(cert: Cert) -> Fraction:
    if isinstance(cert, Ball):
        return Fraction(cert.radius)
    if isinstance(cert, FiniteSample):
        return max((norm_upper(p) for p in cert.points), default=Fraction(0))
    if isinstance(cert, (Hull, Negate)):
        # balls are convex and symmetric
        return radius_of(cert.inner)
    if isinstance(cert, Union):
        return max(radius_of(p) for p in cert.parts)
    if isinstance(cert, Scale):
        return abs(Fraction(cert.factor)) * radius_of(cert.inner)
    raise TypeError(f"not a certificate: {cert!r}")


def describe(cert: Cert) -> str:
    if isinstance(cert, Ball):
        return f"Ball({format_scalar(Fraction(cert.radius))})"
    if isinstance(cert, FiniteSample):
        return "FiniteSample(" + ", ".join(str(p) for p in cert.points) + ")"
    if isinstance(cert, Hull):
        return f"Hull({describe(cert.inner)})"
    if isinstance(cert, Negate):
        return f"Negate({describe(cert.inner)})"
    if isinstance(cert, Scale):
        return f"Scale({format_scalar(Fraction(cert.factor))}, {describe(cert.inner)})"
    return "Union(" + ", ".join(describe(p) for p in cert.parts) + ")"


def cbs_axioms_check(certs: Sequence[Cert]) -> dict:
    """Build the closure certificates of each input and check their radii."""
    if not certs:
        raise ValueError("no certificates")
    dims = {c.dim for c in certs}
    if len(dims) != 1:
        raise ValueError(f"certificates in different spaces: {sorted(dims)}")
    checks = []

    def check(name, cert, expected, rule):
        r = radius_of(cert)
        ok = rule(r, expected)
        checks.append({
            "check": name,
            "cert": describe(cert),
            "radius": format_scalar(r),
            "expected": format_scalar(expected),
            "ok": ok,
        })

    eq = lambda r, e: r == e  # noqa: E731
    le = lambda r, e: r <= e  # noqa: E731
    radii = [radius_of(c) for c in certs]
    for c, r in zip(certs, radii):
        check("hull", Hull(c), r, eq)
        check("negation", Negate(c), r, eq)
        check("doubling", Scale(Fraction(2), c), 2 * r, eq)
        if isinstance(c, FiniteSample):
            for p in c.points:
                check("singleton", FiniteSample(c.dim, (p,)), r, le)
            for k in range(len(c.points)):
                check("subset", FiniteSample(c.dim, c.points[:k]), r, le)
    check("union", Union(tuple(certs)), max(radii), eq)
    return {
        "space": f"R^{dims.pop()}",
        "radii": [format_scalar(r) for r in radii],
        "checks": checks,
        "ok": all(c["ok"] for c in checks),
    }


# -- scalar boundedness ----------------------------------------------------------------


@dataclass
class BoundednessVerdict:
    verdict: str  # "bounded" | "unbounded" | "vacuous"
    suprema: list
    checkpoints: list = field(default_factory=list)
    witness: dict | None = None
    spans_dual: bool = False

    @property
    def bounded(self) -> bool:
        return self.verdict != "unbounded"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "suprema": [format_scalar(s) for s in self.suprema],
            "checkpoints": [
                {"count": n, "suprema": [format_scalar(s) for s in sups]} for n, sups in self.checkpoints
            ],
            "witness": self.witness,
            "spans_dual": self.spans_dual,
        }


def _check_family(fam: Sequence[PolyMap], dim: int) -> list:
    rows = []
    for ell in fam:
        if ell.nout != 1 or not ell.is_linear():
            raise ValueError(f"{ell} is not a linear functional")
        if ell.nvars != dim:
            raise ValueError(f"functional on R^{ell.nvars} applied in R^{dim}")
        row = [Fraction(0)] * ell.nvars
        for (_, e), c in ell.terms:
            row[e.index(1)] = c
        rows.append(row)
    return rows


def _checkpoints(limit: int) -> list:
    out, n = [], 1
    while n < limit:
        out.append(n)
        n *= 2
    out.append(limit)
    return out


def _stream_sups(points: Iterable, measures: list, limit: int | None):
    """Running suprema of each measure, recorded at doubling sample counts."""
    finite = isinstance(points, (list, tuple))
    if not finite and limit is None:
        raise ValueError("a streamed sample needs a limit")
    pts = list(points) if finite else list(islice(points, limit))
    marks = set(_checkpoints(len(pts))) if pts else set()
    sups = [Fraction(0)] * len(measures)
    argmax = [None] * len(measures)
    history = []
    for k, x in enumerate(pts, start=1):
        for j, m in enumerate(measures):
            v = abs(m(x))
            if v > sups[j]:
                sups[j], argmax[j] = v, k - 1
        if k in marks:
            history.append((k, list(sups)))
    return finite, sups, argmax, history


def _diverging(history: list, tol: float) -> int | None:
    if len(history) < 2:
        return None
    (_, prev), (_, last) = history[-2], history[-1]
    for j, (a, b) in enumerate(zip(prev, last)):
        if b > a * (1 + Fraction(tol)):
            return j
    return None


def scalarly_bounded(
    sample: Iterable[Vector], fam: Sequence[PolyMap], tol: float = 0.05, limit: int | None = None
) -> BoundednessVerdict:
    """Suprema of ``|ell(x)|`` over the sample, one per functional.

    A list is a finite sample and is always bounded.  Any other iterable is a
    stream read up to ``limit`` points; it counts as bounded when the suprema
    grow by at most ``tol`` (relative) over the last doubling of the sample.
    """
    if not fam:
        return BoundednessVerdict("vacuous", [], witness={"reason": "empty functional family"})
    dim = fam[0].nvars
    rows = _check_family(fam, dim)
    measures = [lambda x, ell=ell: poly_eval(ell, _vec(x, dim))[0] for ell in fam]
    finite, sups, argmax, history = _stream_sups(sample, measures, limit)
    spans = matrix_rank(rows) == dim
    if finite:
        return BoundednessVerdict("bounded", sups, history, None, spans)
    j = _diverging(history, tol)
    if j is None:
        return BoundednessVerdict("bounded", sups, history, None, spans)
    witness = {
        "functional": str(fam[j]),
        "index": argmax[j],
        "growth": [format_scalar(s[j]) for _, s in history[-2:]],
    }
    return BoundednessVerdict("unbounded", sups, history, witness, spans)


def _vec(x, dim: int) -> Vector:
    v = x if isinstance(x, Vector) else Vector(tuple(scalar(c) for c in x))
    if len(v) != dim:
        raise ValueError(f"sample point {v} is not in R^{dim}")
    return v


@dataclass
class ProductVerdict:
    bounded: bool
    radii: tuple
    witness: dict | None = None

    def to_json(self) -> dict:
        return {
            "verdict": "bounded" if self.bounded else "unbounded",
            "radii": [format_scalar(r) for r in self.radii],
            "witness": self.witness,
        }


def product_bounded(sample: Iterable[Pair], tol: float = 0.05, limit: int | None = None) -> ProductVerdict:
    """Bounded iff both projections are; radii are those of the projections."""
    dims: dict = {}

    def proj(side):
        def measure(p):
            if not isinstance(p, Pair):
                raise ValueError(f"{p!r} is not a pair")
            x = p.left if side == 0 else p.right
            if dims.setdefault(side, len(x)) != len(x):
                raise ValueError("sample mixes spaces")
            return norm_upper(x)

        return measure

    finite, sups, argmax, history = _stream_sups(sample, [proj(0), proj(1)], limit)
    j = None if finite else _diverging(history, tol)
    if j is None:
        return ProductVerdict(True, tuple(sups))
    witness = {
        "projection": "left" if j == 0 else "right",
        "index": argmax[j],
        "growth": [format_scalar(s[j]) for _, s in history[-2:]],
    }
    return ProductVerdict(False, tuple(sups), witness)


def load_samples_csv(path) -> list:
    return parse_samples_csv(Path(path).read_text())


def parse_samples_csv(text: str) -> list:
    """One vector per row; a non-numeric first row is taken as a header."""
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    out = []
    for k, row in enumerate(rows):
        try:
            out.append(Vector(tuple(Fraction(c.strip()) for c in row)))
        except ValueError:
            if k == 0:
                continue
            raise ValueError(f"row {k + 1}: not a number") from None
    if len({len(v) for v in out}) > 1:
        raise ValueError("rows of different lengths")
    return out
