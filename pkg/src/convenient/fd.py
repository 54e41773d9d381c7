"""Difference quotients of curves ``R -> R^n`` and smoothness diagnostics.

The order-``i`` quotient over distinct times ``t_0..t_i`` is

    d^i(t_0..t_i) = i/(t_0 - t_i) * (d^(i-1)(t_0..t_(i-1)) - d^(i-1)(t_1..t_i))

with ``d^0 = c``.  It equals ``i!`` times the Newton divided difference, so on
a polynomial of degree ``d`` the order-``d`` quotient is ``d! * leading
coefficient`` and every higher order vanishes.

Curves with rational values at rational times run in exact arithmetic; any
float input switches the whole computation to floats.  A finite grid can only
ever falsify smoothness, so reports say "no counterexample found" rather than
claiming a proof.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Callable, Sequence

from .poly import PolyMap, matrix_rank, poly_eval
from .spaces import Vector, format_scalar

BOUNDED_EXPONENT = -0.1  # level maxima ~ h^e; e >= this counts as bounded


class OracleError(RuntimeError):
    """The curve could not be evaluated at ``time``."""

    def __init__(self, time, reason: str):
        super().__init__(f"curve evaluation failed at t={time}: {reason}")
        self.time = time
        self.reason = reason


class InsufficientSamples(ValueError):
    def __init__(self, required: int, available: int):
        super().__init__(f"need at least {required} samples, got {available}")
        self.required = required
        self.available = available


# -- curves ----------------------------------------------------------------------


@dataclass(frozen=True)
class CurveOracle:
    """A curve ``R -> R^dimension`` given by a deterministic evaluator."""

    dimension: int
    evaluator: Callable
    exact: bool = True

    def __call__(self, t) -> Vector:
        try:
            raw = self.evaluator(t)
        except OracleError:
            raise
        except Exception as exc:  # propagate with the offending time attached
            raise OracleError(t, f"{type(exc).__name__}: {exc}") from exc
        v = raw if isinstance(raw, Vector) else Vector(tuple(raw) if _iterable(raw) else (raw,))
        if len(v) != self.dimension:
            raise OracleError(t, f"expected {self.dimension} coordinates, got {len(v)}")
        return v

    @classmethod
    def from_poly(cls, p: PolyMap) -> CurveOracle:
        if p.nvars != 1:
            raise ValueError("a curve polynomial has exactly one variable")
        return cls(p.nout, lambda t: poly_eval(p, Vector((t,))), exact=True)

    @classmethod
    def scalar(cls, fn: Callable, exact: bool = True) -> CurveOracle:
        return cls(1, lambda t: Vector((fn(t),)), exact=exact)

    def compose(self, ell: PolyMap) -> CurveOracle:
        """``ell o c`` for a polynomial map ``ell`` on ``R^dimension``."""
        if ell.nvars != self.dimension:
            raise ValueError(f"map on R^{ell.nvars} composed with a curve in R^{self.dimension}")
        return CurveOracle(ell.nout, lambda t: poly_eval(ell, self(t)), self.exact)


def _iterable(x) -> bool:
    return isinstance(x, (list, tuple))


def curve_from_poly(p: PolyMap) -> CurveOracle:
    return CurveOracle.from_poly(p)


@dataclass(frozen=True)
class SampledCurve:
    """A curve known only at finitely many strictly increasing times."""

    times: tuple
    values: tuple

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("one value per time expected")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("sample times must be strictly increasing")
        dims = {len(v) for v in self.values}
        if len(dims) > 1:
            raise ValueError("samples of different dimensions")

    @property
    def dimension(self) -> int:
        return len(self.values[0]) if self.values else 0

    def __len__(self) -> int:
        return len(self.times)

    def oracle(self) -> CurveOracle:
        table = dict(zip(self.times, self.values))

        def lookup(t):
            key = Fraction(t) if not isinstance(t, Fraction) else t
            if key not in table:
                raise OracleError(t, "not a sampled time")
            return table[key]

        return CurveOracle(self.dimension, lookup, exact=True)

    @classmethod
    def from_csv(cls, path) -> SampledCurve:
        return cls.from_csv_text(Path(path).read_text())

    @classmethod
    def from_csv_text(cls, text: str) -> SampledCurve:
        """Read ``t,x1,...,xn`` rows; decimals are read exactly."""
        rows = [r for r in csv.reader(io.StringIO(text)) if any(cell.strip() for cell in r)]
        if not rows:
            raise ValueError("empty CSV")
        header = [h.strip() for h in rows[0]]
        if not header or header[0] != "t" or header[1:] != [f"x{i}" for i in range(1, len(header))]:
            raise ValueError(f"CSV header must be t,x1,...,xn; got {','.join(header)}")
        times, values = [], []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != len(header):
                raise ValueError(f"line {lineno}: expected {len(header)} fields")
            try:
                nums = [Fraction(cell.strip()) for cell in row]
            except ValueError:
                raise ValueError(f"line {lineno}: not a number") from None
            times.append(nums[0])
            values.append(Vector(tuple(nums[1:])))
        return cls(tuple(times), tuple(values))


# -- the quotient recursion --------------------------------------------------------


def _exact(c: CurveOracle, points: Sequence) -> bool:
    return c.exact and all(isinstance(t, (int, Fraction)) for t in points)


def delta_quotient(c: CurveOracle, points: Sequence, i: int) -> Vector:
    if i < 0:
        raise ValueError("order must be non-negative")
    if len(points) != i + 1:
        raise ValueError(f"order {i} needs {i + 1} points, got {len(points)}")
    if len(set(points)) != len(points):
        raise ValueError(f"repeated points in {list(points)}")
    exact = _exact(c, points)
    ts = [Fraction(t) for t in points] if exact else [float(t) for t in points]
    level = [c(t) for t in ts]
    if not exact:
        level = [Vector(tuple(float(x) for x in v)) for v in level]
    for k in range(1, i + 1):
        level = [
            (level[j] - level[j + 1]).scale(k / (ts[j] - ts[j + k]))
            for j in range(len(level) - 1)
        ]
    return level[0]


def norm(v: Vector) -> float:
    """Euclidean norm as a float, summed with ``math.fsum``."""
    return math.sqrt(math.fsum(float(x) * float(x) for x in v))


# -- grids -----------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Shrinking grids ``center + offset * h * shrink**level``."""

    center: object
    h: object
    shrink: object
    levels: int
    offsets: tuple

    def __post_init__(self):
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if self.h <= 0:
            raise ValueError("base spacing must be positive")
        if self.levels < 1:
            raise ValueError("at least one level")
        if len(set(self.offsets)) != len(self.offsets):
            raise ValueError("offsets must be distinct")

    @classmethod
    def symmetric(cls, center=0, h=Fraction(1, 2), shrink=Fraction(1, 2), levels=8, width=2) -> GridSpec:
        return cls(center, h, shrink, levels, tuple(range(-width, width + 1)))

    def spacing(self, level: int):
        return self.h * self.shrink**level

    def tuples(self, order: int, level: int) -> list:
        if order + 1 > len(self.offsets):
            raise ValueError(f"order {order} needs {order + 1} offsets, grid has {len(self.offsets)}")
        s = self.spacing(level)
        return [tuple(self.center + o * s for o in combo) for combo in combinations(self.offsets, order + 1)]


# -- smoothness certificate -----------------------------------------------------------


@dataclass
class OrderReport:
    order: int
    spacings: list
    level_max: list
    exponent: float | None
    verdict: str  # "bounded" | "unbounded" | "inconclusive"
    identically_zero: bool = False
    stable_from: int | None = None
    witness: dict | None = None

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "spacings": [_num(h) for h in self.spacings],
            "level_max": [_round(m) for m in self.level_max],
            "exponent": None if self.exponent is None else _round(self.exponent),
            "verdict": self.verdict,
            "identically_zero": self.identically_zero,
            "stable_from": self.stable_from,
            "witness": self.witness,
        }


@dataclass
class SmoothnessReport:
    orders: list
    note: str = ""
    flags: list = field(default_factory=list)

    @property
    def first_failure(self) -> int | None:
        for o in self.orders:
            if o.verdict == "unbounded":
                return o.order
        return None

    @property
    def verdict(self) -> str:
        bad = self.first_failure
        if bad is not None:
            return f"non-smooth at order {bad}"
        if any(o.verdict == "inconclusive" for o in self.orders):
            return "inconclusive"
        return "no counterexample found"

    @property
    def smooth(self) -> bool:
        return self.first_failure is None

    def order(self, i: int) -> OrderReport:
        return next(o for o in self.orders if o.order == i)

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "first_failure": self.first_failure,
            "orders": [o.to_json() for o in self.orders],
        }
        if self.note:
            out["note"] = self.note
        if self.flags:
            out["flags"] = list(self.flags)
        return out


def _num(x):
    return format_scalar(x) if isinstance(x, Fraction) else x


def _round(x: float) -> float:
    return float(f"{x:.12g}")


def growth_exponent(spacings: Sequence, maxima: Sequence[float]) -> float | None:
    """Least-squares slope of ``log max`` against ``log h`` over nonzero maxima."""
    pts = [(math.log(float(h)), math.log(m)) for h, m in zip(spacings, maxima) if m > 0]
    if len(pts) < 2:
        return None
    return statistics.linear_regression([p[0] for p in pts], [p[1] for p in pts]).slope


def stable_level(maxima: Sequence[float], tol: float) -> int | None:
    """First level from which the maxima never grow by more than ``tol`` (relative)."""
    start = len(maxima) - 1
    for j in range(len(maxima) - 2, -1, -1):
        if maxima[j + 1] <= maxima[j] * (1 + tol) + 1e-300:
            start = j
        else:
            break
    return start if maxima else None


def _classify(order: int, spacings, maxima, tuples_at, values_at, tol: float) -> OrderReport:
    if all(m == 0 for m in maxima):
        return OrderReport(order, list(spacings), maxima, None, "bounded", True, 0)
    exponent = growth_exponent(spacings, maxima)
    stable = stable_level(maxima, tol)
    if exponent is None:
        verdict = "inconclusive"
    elif exponent < BOUNDED_EXPONENT:
        verdict = "unbounded"
    else:
        verdict = "bounded" if stable is not None else "inconclusive"
    witness = None
    if verdict == "unbounded":
        last = len(maxima) - 1
        k = max(range(len(values_at[last])), key=lambda j: norm(values_at[last][j]))
        witness = {
            "level": last,
            "points": [_num(t) for t in tuples_at[last][k]],
            "value": [_num(x) for x in values_at[last][k]],
            "norm": _round(norm(values_at[last][k])),
        }
    return OrderReport(order, list(spacings), maxima, exponent, verdict, False, stable, witness)


def smooth_certificate(c: CurveOracle, max_order: int, grids: GridSpec, tol: float = 0.05) -> SmoothnessReport:
    """Look for growth of ``d^i c`` on shrinking grids, ``i = 1..max_order``."""
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    orders = []
    spacings = [grids.spacing(lv) for lv in range(grids.levels)]
    for i in range(1, max_order + 1):
        tuples_at, values_at, maxima = [], [], []
        for lv in range(grids.levels):
            tuples = grids.tuples(i, lv)
            values = [delta_quotient(c, pts, i) for pts in tuples]
            tuples_at.append(tuples)
            values_at.append(values)
            maxima.append(max(norm(v) for v in values))
        orders.append(_classify(i, spacings, maxima, tuples_at, values_at, tol))
    return SmoothnessReport(orders)


# -- scalar probes ---------------------------------------------------------------------


@dataclass
class BomanReport:
    probes: list  # (functional, SmoothnessReport)
    spans_dual: bool
    flags: list = field(default_factory=list)

    @property
    def smooth(self) -> bool:
        return all(r.smooth for _, r in self.probes)

    @property
    def verdict(self) -> str:
        if not self.probes:
            return "vacuously smooth (no probes)"
        for _, r in self.probes:
            if not r.smooth:
                return r.verdict
        return "no counterexample found"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "smooth": self.smooth,
            "spans_dual": self.spans_dual,
            "flags": list(self.flags),
            "probes": [{"functional": str(ell), "report": r.to_json()} for ell, r in self.probes],
        }


def boman_scalar_test(
    c: CurveOracle, functionals: Sequence[PolyMap], max_order: int, grids: GridSpec, tol: float = 0.05
) -> BomanReport:
    """Test every scalar curve ``ell o c``; ``c`` passes iff all of them do."""
    rows = []
    for ell in functionals:
        if ell.nout != 1 or ell.nvars != c.dimension:
            raise ValueError(f"functional must map R^{c.dimension} to R")
        if not ell.is_linear():
            raise ValueError(f"functional {ell} is not linear")
        row = [Fraction(0)] * c.dimension
        for (_, e), coeff in ell.terms:
            row[e.index(1)] = coeff
        rows.append(row)
    probes = [(ell, smooth_certificate(c.compose(ell), max_order, grids, tol)) for ell in functionals]
    spans = bool(rows) and matrix_rank(rows) == c.dimension
    flags = []
    if not functionals:
        flags.append("no probes")
    if spans:
        flags.append("probes span the dual of R^n; coordinate functionals suffice there")
    return BomanReport(probes, spans, flags)


# -- Mackey-Cauchy sequences ------------------------------------------------------------


@dataclass
class MackeyReport:
    mu: list  # mu[n][m] = |x_n - x_m| / radius
    tail_sup: list  # tail_sup[N] = max over n, m >= N
    cauchy: bool
    tol: float

    def to_json(self) -> dict:
        return {
            "verdict": "Mackey-Cauchy" if self.cauchy else "not Mackey-Cauchy",
            "cauchy": self.cauchy,
            "tolerance": self.tol,
            "tail_sup": [_round(x) for x in self.tail_sup],
            "mu": [[_round(x) for x in row] for row in self.mu],
        }


def mackey_cauchy_test(seq: Sequence[Vector], radius, tol: float = 0.1) -> MackeyReport:
    """Gauge of pairwise differences in the closed ball of ``radius``.

    The verdict compares the tail supremum halfway along the sequence with
    the first one, so it does not depend on ``radius``.
    """
    if not seq:
        raise ValueError("empty sequence")
    if radius <= 0:
        raise ValueError("radius must be positive")
    dims = {len(x) for x in seq}
    if len(dims) != 1:
        raise ValueError("sequence elements of different dimensions")
    n = len(seq)
    r = float(radius)
    mu = [[norm(seq[a] - seq[b]) / r for b in range(n)] for a in range(n)]
    tail = [0.0] * n
    running = 0.0
    for N in range(n - 1, -1, -1):
        running = max(running, max(mu[N][N:]))
        tail[N] = running
    cauchy = tail[0] == 0 or tail[n // 2] <= tol * tail[0]
    return MackeyReport(mu, tail, cauchy, tol)


# -- derivative estimation ----------------------------------------------------------------


def derivative_estimate(c: CurveOracle, t, order: int, hs: Sequence) -> list:
    """``d^order c`` on the forward grids ``t, t+h, ..., t+order*h`` for each ``h``."""
    if any(h <= 0 for h in hs) or any(b >= a for a, b in zip(hs, hs[1:])):
        raise ValueError("step sizes must be positive and strictly decreasing")
    if order == 0:
        return [c(t) for _ in hs]
    return [delta_quotient(c, [t + j * h for j in range(order + 1)], order) for h in hs]


# -- sampled curves ----------------------------------------------------------------------


def analyze_samples(
    curve: SampledCurve, max_order: int, center=None, tol: float = 0.05
) -> dict:
    """Quotient table and growth verdicts for a sampled curve.

    Grids are symmetric in sample index around the center sample with index
    strides ``2^m, ..., 2, 1``, so they shrink towards the center.
    """
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    if len(curve) < max_order + 1:
        raise InsufficientSamples(max_order + 1, len(curve))
    c = curve.oracle()
    ts = curve.times
    table = {
        i: [
            {"points": [_num(t) for t in ts[j:j + i + 1]],
             "value": [_num(x) for x in delta_quotient(c, ts[j:j + i + 1], i)]}
            for j in range(len(ts) - i)
        ]
        for i in range(1, max_order + 1)
    }
    if center is None:
        k = (len(ts) - 1) // 2
    else:
        center = Fraction(center)
        if center not in ts:
            raise ValueError(f"center {center} is not a sampled time")
        k = ts.index(center)
    orders = []
    for i in range(1, max_order + 1):
        reach = min(k, len(ts) - 1 - k)
        strides = []
        s = 1
        while i * s <= 2 * reach and s <= reach:
            strides.append(s)
            s *= 2
        strides.reverse()
        spacings, maxima, tuples_at, values_at = [], [], [], []
        for s in strides:
            idx = [k + j * s for j in range(-i, i + 1) if 0 <= k + j * s < len(ts)]
            tuples = [tuple(ts[q] for q in combo) for combo in combinations(idx, i + 1) if k in combo]
            if not tuples:
                continue
            values = [delta_quotient(c, pts, i) for pts in tuples]
            spacings.append(ts[min(k + s, len(ts) - 1)] - ts[max(k - s, 0)])
            maxima.append(max(norm(v) for v in values))
            tuples_at.append(tuples)
            values_at.append(values)
        if maxima:
            orders.append(_classify(i, spacings, maxima, tuples_at, values_at, tol))
        else:
            orders.append(OrderReport(i, [], [], None, "inconclusive"))
    report = SmoothnessReport(orders, note=f"grids centered at t={_num(ts[k])}")
    return {
        "samples": len(ts),
        "dimension": curve.dimension,
        "center": _num(ts[k]),
        "table": {str(i): rows for i, rows in table.items()},
        "report": report.to_json(),
    }
