"""Seeded law checking for the differential, comonad, bialgebra, Seely and
adjunction structure on ``!R^n``.

Every exact law is evaluated on both sides in rational arithmetic; the
residual is the largest coefficient of the difference and must be 0.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from ..poly import PolyMap, directional, linear_map, poly_compose, poly_eval
from ..sampling import (
    rand_distribution,
    rand_poly,
    rand_scalar,
    rand_testfunctional,
    rand_vector,
    rng_for,
)
from ..spaces import Dist, Prod, RealN, Vector, format_scalar
from .elements import Distribution, Pair, Tensor, as_tensor, residual
from .structure import (
    SmoothMap,
    coder,
    comul_delta,
    comultiplication_rho,
    conv_nabla,
    counit_block,
    counit_e,
    delta_block,
    derive_dA,
    dirac,
    dirac_map,
    eps,
    eps_map,
    identity_block,
    lift,
    lower,
    nabla_block,
    push,
    pushforward,
    seely_merge,
    seely_split,
    unit_nu,
)
from .testfunctional import TestFunctional, pair, pair_tensor, standard_coords

MAX_RECORDED_FAILURES = 5
LIMIT_STEPS = tuple(Fraction(1, 2**k) for k in range(3, 13))
LIMIT_MIN_ORDER = 0.95


@dataclass
class LawResult:
    name: str
    anchor: str
    suite: str
    kind: str = "exact"
    cases: int = 0
    failure_count: int = 0
    failures: list = field(default_factory=list)
    max_residual: Fraction = Fraction(0)
    note: str = ""
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failure_count == 0

    def record(self, inputs: dict, lhs, rhs, res: Fraction | None = None) -> None:
        self.cases += 1
        r = residual(lhs, rhs) if res is None else res
        if r > self.max_residual:
            self.max_residual = r
        if r:
            self.fail(inputs, lhs, rhs, r)

    def fail(self, inputs: dict, lhs, rhs, r) -> None:
        self.failure_count += 1
        if len(self.failures) < MAX_RECORDED_FAILURES:
            self.failures.append(
                {
                    "inputs": {k: str(v) for k, v in inputs.items()},
                    "lhs": str(lhs),
                    "rhs": str(rhs),
                    "residual": _fmt(r),
                }
            )

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "anchor": self.anchor,
            "suite": self.suite,
            "kind": self.kind,
            "cases": self.cases,
            "passed": self.passed,
            "failure_count": self.failure_count,
            "failures": self.failures,
            "max_residual": _fmt(self.max_residual),
        }
        if self.note:
            out["note"] = self.note
        if self.stats:
            out["stats"] = self.stats
        return out


def _fmt(x) -> str:
    return format_scalar(x) if isinstance(x, Fraction) else repr(x)


# -- registry -------------------------------------------------------------------


@dataclass(frozen=True)
class Law:
    name: str
    anchor: str
    suite: str
    case: Callable  # (rng, n, order) -> (inputs, lhs, rhs)
    note: str = ""


LAWS: list[Law] = []


def law(name: str, anchor: str, suite: str, note: str = ""):
    def register(fn):
        LAWS.append(Law(name, anchor, suite, fn, note))
        return fn

    return register


def _E(n):
    return RealN(n)


def _D(n):
    return Dist(RealN(n))


def _pure(n, *xs):
    return Tensor.pure((_D(n),) * len(xs), xs)


# -- differential structure --------------------------------------------------------


@law("[dC.1]", "coder;e = 0", "differential")
def _dc1(rng, n, order):
    v = rand_vector(rng, n)
    return {"v": v}, counit_e(coder(v, _E(n))), Fraction(0)


@law("[dC.2]", "coder;Delta = coder(x)nu + nu(x)coder", "differential")
def _dc2(rng, n, order):
    v = rand_vector(rng, n)
    c, nu = coder(v, _E(n)), unit_nu(_E(n))
    return {"v": v}, comul_delta(c), _pure(n, c, nu) + _pure(n, nu, c)


@law("[dC.3]", "coder;eps = 1", "differential")
def _dc3(rng, n, order):
    v = rand_vector(rng, n)
    return {"v": v}, eps(coder(v, _E(n))), v


@law(
    "[dC.4]",
    "(coder(x)1);nabla;rho = (coder(x)Delta);((nabla;coder)(x)rho);nabla",
    "differential",
    note="evaluated under the balanced bracketing that type-checks; the chain-rule "
    "content is also certified by the pairing laws 'chain rule' and 'rho pairing'",
)
def _dc4(rng, n, order):
    E, D = _E(n), _D(n)
    v = rand_vector(rng, n)
    u = rand_distribution(rng, E, order)
    lhs = comultiplication_rho(conv_nabla(_pure(n, coder(v, E), u)))
    rhs = Distribution(D)
    for (a1, a2), c in comul_delta(u).terms:
        w = conv_nabla(_pure(n, coder(v, E), Distribution.from_atoms(E, {a1: 1})))
        r = comultiplication_rho(Distribution.from_atoms(E, {a2: 1}))
        rhs = rhs + conv_nabla(Tensor.pure((Dist(D), Dist(D)), [coder(w, D), r])).scale(c)
    return {"v": v, "u": u}, lhs, rhs


@law("chain rule", "<!f u, g> = <u, g o f>", "differential")
def _chain(rng, n, order):
    m = rng.randint(1, 3)
    f = rand_poly(rng, n, m, 4)
    g = rand_testfunctional(rng, RealN(m), 4)
    u = rand_distribution(rng, _E(n), order)
    return (
        {"f": f, "g": g.poly, "u": u},
        pair(pushforward(f, u), g),
        pair(u, g.precompose(f)),
    )


@law("coder linear", "coder(a v + b w) = a coder(v) + b coder(w)", "differential")
def _coder_linear(rng, n, order):
    E = _E(n)
    a, b = rand_scalar(rng), rand_scalar(rng)
    v, w = rand_vector(rng, n), rand_vector(rng, n)
    lhs = coder(v.scale(a) + w.scale(b), E)
    return {"a": a, "b": b, "v": v, "w": w}, lhs, coder(v, E).scale(a) + coder(w, E).scale(b)


@law("deriving transformation", "d(v (x) u) = nabla(coder(v) (x) u)", "differential")
def _dA_factor(rng, n, order):
    E = _E(n)
    v = rand_vector(rng, n)
    u = rand_distribution(rng, E, order)
    return {"v": v, "u": u}, derive_dA(v, u), conv_nabla(_pure(n, coder(v, E), u))


@law("deriving pairing", "<d(v (x) u), f> = <u, df(-)(v)>", "differential")
def _dA_pair(rng, n, order):
    E = _E(n)
    v = rand_vector(rng, n)
    u = rand_distribution(rng, E, order)
    f = rand_poly(rng, n, 1, 4)
    lhs = pair(derive_dA(v, u), TestFunctional.from_poly(E, f))
    rhs = pair(u, TestFunctional.from_poly(E, directional(f, v)))
    return {"v": v, "u": u, "f": f}, lhs, rhs


# -- comonad ------------------------------------------------------------------------


@law("rho pairing", "<rho u, F> = <u, F o dirac>", "comonad")
def _rho_pair(rng, n, order):
    u = rand_distribution(rng, _E(n), order)
    F = rand_testfunctional(rng, _D(n), 3)
    return {"u": u, "F": F.poly}, pair(comultiplication_rho(u), F), pair(u, F.after_dirac())


@law("eps o rho = id", "eps(rho(u)) = u", "comonad")
def _counit_left(rng, n, order):
    u = rand_distribution(rng, _E(n), order)
    return {"u": u}, eps(comultiplication_rho(u)), u


@law("!eps o rho = id", "!eps(rho(u)) = u", "comonad")
def _counit_right(rng, n, order):
    u = rand_distribution(rng, _E(n), order)
    return {"u": u}, push(eps_map(_E(n)), comultiplication_rho(u)), u


@law("rho coassociative", "rho(rho(u)) = !rho(rho(u))", "comonad")
def _rho_coassoc(rng, n, order):
    E, D = _E(n), _D(n)
    u = rand_distribution(rng, E, order)
    r = comultiplication_rho(u)
    lhs = push(dirac_map(D), r)
    rhs = push(SmoothMap.linear(D, Dist(D), comultiplication_rho), r)
    return {"u": u}, lhs, rhs


# -- bialgebra ------------------------------------------------------------------------


@law("Delta coassociative", "(Delta(x)1)Delta = (1(x)Delta)Delta", "bialgebra")
def _delta_coassoc(rng, n, order):
    E, D = _E(n), _D(n)
    u = rand_distribution(rng, E, order)
    t = comul_delta(u)
    lhs = t.apply([(1, delta_block(E)), (1, identity_block(E))], (D, D, D))
    rhs = t.apply([(1, identity_block(E)), (1, delta_block(E))], (D, D, D))
    return {"u": u}, lhs, rhs


@law("Delta left counit", "(e(x)1)Delta = id", "bialgebra")
def _delta_counit_l(rng, n, order):
    E, D = _E(n), _D(n)
    u = rand_distribution(rng, E, order)
    lhs = comul_delta(u).apply([(1, counit_block(E)), (1, identity_block(E))], (D,))
    return {"u": u}, lhs, as_tensor(D, u)


@law("Delta right counit", "(1(x)e)Delta = id", "bialgebra")
def _delta_counit_r(rng, n, order):
    E, D = _E(n), _D(n)
    u = rand_distribution(rng, E, order)
    lhs = comul_delta(u).apply([(1, identity_block(E)), (1, counit_block(E))], (D,))
    return {"u": u}, lhs, as_tensor(D, u)


@law("Delta pairing", "<Delta u, f (x) g> = <u, f g>", "bialgebra")
def _delta_pair(rng, n, order):
    E = _E(n)
    u = rand_distribution(rng, E, order)
    f = TestFunctional.from_poly(E, rand_poly(rng, n, 1, 3))
    g = TestFunctional.from_poly(E, rand_poly(rng, n, 1, 3))
    return {"u": u, "f": f.poly, "g": g.poly}, pair_tensor(comul_delta(u), [f, g]), pair(u, f * g)


@law("nabla associative", "nabla(nabla(u(x)w)(x)z) = nabla(u(x)nabla(w(x)z))", "bialgebra")
def _nabla_assoc(rng, n, order):
    E = _E(n)
    u, w, z = (rand_distribution(rng, E, order) for _ in range(3))
    lhs = conv_nabla(_pure(n, conv_nabla(_pure(n, u, w)), z))
    rhs = conv_nabla(_pure(n, u, conv_nabla(_pure(n, w, z))))
    return {"u": u, "w": w, "z": z}, lhs, rhs


@law("nabla commutative", "nabla(u(x)w) = nabla(w(x)u)", "bialgebra")
def _nabla_comm(rng, n, order):
    E = _E(n)
    u, w = rand_distribution(rng, E, order), rand_distribution(rng, E, order)
    return {"u": u, "w": w}, conv_nabla(_pure(n, u, w)), conv_nabla(_pure(n, w, u))


@law("nabla left unit", "nabla(nu(x)u) = u", "bialgebra")
def _nabla_unit_l(rng, n, order):
    u = rand_distribution(rng, _E(n), order)
    return {"u": u}, conv_nabla(_pure(n, unit_nu(_E(n)), u)), u


@law("nabla right unit", "nabla(u(x)nu) = u", "bialgebra")
def _nabla_unit_r(rng, n, order):
    u = rand_distribution(rng, _E(n), order)
    return {"u": u}, conv_nabla(_pure(n, u, unit_nu(_E(n)))), u


@law("nabla pairing", "<nabla(u(x)w), f> = <u(x)w, f(a+b)>", "bialgebra")
def _nabla_pair(rng, n, order):
    E = _E(n)
    u, w = rand_distribution(rng, E, order), rand_distribution(rng, E, order)
    f = rand_poly(rng, n, 1, 4)
    plus = linear_map([[int(j == i or j == i + n) for j in range(2 * n)] for i in range(n)], 2 * n)
    fsum = TestFunctional.from_poly(Prod(E, E), poly_compose(f, plus))
    lhs = pair(conv_nabla(_pure(n, u, w)), TestFunctional.from_poly(E, f))
    rhs = pair(seely_merge(_pure(n, u, w)), fsum)
    return {"u": u, "w": w, "f": f}, lhs, rhs


@law("bimonoid", "Delta nabla = (nabla(x)nabla)(1(x)swap(x)1)(Delta(x)Delta)", "bialgebra")
def _bimonoid(rng, n, order):
    E, D = _E(n), _D(n)
    u, w = rand_distribution(rng, E, order), rand_distribution(rng, E, order)
    lhs = comul_delta(conv_nabla(_pure(n, u, w)))
    t = (comul_delta(u) @ comul_delta(w)).permute((0, 2, 1, 3))
    rhs = t.apply([(2, nabla_block(E)), (2, nabla_block(E))], (D, D))
    return {"u": u, "w": w}, lhs, rhs


@law("bimonoid counit", "e(nabla(u(x)w)) = e(u) e(w)", "bialgebra")
def _bimonoid_counit(rng, n, order):
    E = _E(n)
    u, w = rand_distribution(rng, E, order), rand_distribution(rng, E, order)
    return {"u": u, "w": w}, counit_e(conv_nabla(_pure(n, u, w))), counit_e(u) * counit_e(w)


@law("bimonoid unit", "Delta(nu) = nu (x) nu", "bialgebra")
def _bimonoid_unit(rng, n, order):
    nu = unit_nu(_E(n))
    return {}, comul_delta(nu), _pure(n, nu, nu)


# -- Seely isomorphism on R^n & R^n ---------------------------------------------------


def _P(n):
    return Prod(RealN(n), RealN(n))


@law("seely base case", "split(delta_(x,y)) = delta_x (x) delta_y", "seely")
def _seely_base(rng, n, order):
    x, y = rand_vector(rng, n), rand_vector(rng, n)
    return {"x": x, "y": y}, seely_split(dirac(Pair(x, y))), _pure(n, dirac(x), dirac(y))


@law("seely merge o split", "merge(split(u)) = u", "seely")
def _seely_ms(rng, n, order):
    u = rand_distribution(rng, _P(n), order)
    return {"u": u}, seely_merge(seely_split(u)), u


@law("seely split o merge", "split(merge(t)) = t", "seely")
def _seely_sm(rng, n, order):
    E = _E(n)
    t = _pure(n, rand_distribution(rng, E, order), rand_distribution(rng, E, order))
    t = t + _pure(n, rand_distribution(rng, E, order), rand_distribution(rng, E, order))
    return {"t": t}, seely_split(seely_merge(t)), t


@law("seely pairing", "<split(u), g (x) h> = <u, g(x) h(y)>", "seely")
def _seely_pair(rng, n, order):
    E = _E(n)
    u = rand_distribution(rng, _P(n), order)
    g, h = rand_poly(rng, n, 1, 3), rand_poly(rng, n, 1, 3)
    std = standard_coords(E)
    gx = TestFunctional(_P(n), g, tuple((0, c) for c in std))
    hy = TestFunctional(_P(n), h, tuple((1, c) for c in std))
    lhs = pair_tensor(
        seely_split(u), [TestFunctional.from_poly(E, g), TestFunctional.from_poly(E, h)]
    )
    return {"u": u, "g": g, "h": h}, lhs, pair(u, gx * hy)


# -- adjunction C^inf(E, F) = L(!E, F) ------------------------------------------------

ADJUNCTION_POINTS = 100


@law("lower o lift = id", "lower(lift(f))(x) = f(x)", "adjunction")
def _lower_lift(rng, n, order):
    m = rng.randint(1, 3)
    f = rand_poly(rng, n, m, 4)
    g = lower(lift(f), RealN(n), RealN(m))
    pts = [rand_vector(rng, n) for _ in range(ADJUNCTION_POINTS)]
    lhs = Vector(tuple(c for x in pts for c in g(x)))
    rhs = Vector(tuple(c for x in pts for c in poly_eval(f, x)))
    return {"f": f}, lhs, rhs


@law("lift o lower = id", "lift(lower(phi))(u) = phi(u)", "adjunction",
     note="phi(u) = (<u, g_i>)_i for random probes g_i; lower(phi) is rebuilt as a polynomial")
def _lift_lower(rng, n, order):
    E = RealN(n)
    m = rng.randint(1, 3)
    probes = [TestFunctional.from_poly(E, rand_poly(rng, n, 1, 4)) for _ in range(m)]

    def phi(u):
        return Vector(tuple(pair(u, g) for g in probes))

    rebuilt = lower(phi, E, RealN(m)).to_poly(4)
    u = rand_distribution(rng, E, order)
    return {"u": u, "probes": [g.poly for g in probes]}, lift(rebuilt)(u), phi(u)


# -- codereliction as a limit ----------------------------------------------------------


def coderelict_limit(f: PolyMap, v: Vector, steps=LIMIT_STEPS) -> dict:
    """Compare ``((delta_tv - delta_0)/t, f)`` with ``(coder v, f)`` as ``t -> 0``.

    Returns the exact errors, the constant ``C = max err/t`` and the fitted
    log-log convergence order (``None`` when every error is exactly 0).
    """
    E = RealN(f.nvars)
    probe = TestFunctional.from_poly(E, f)
    target = pair(coder(v, E), probe)
    origin = dirac(Vector.zeros(f.nvars))
    errors = []
    for t in steps:
        quotient = (dirac(v.scale(t)) - origin).scale(1 / t)
        errors.append(abs(pair(quotient, probe) - target))
    bound = max(e / t for e, t in zip(errors, steps))
    pts = [(math.log(t), math.log(e)) for t, e in zip(steps, errors) if e]
    order = None
    if len(pts) >= 2:
        order = statistics.linear_regression([p[0] for p in pts], [p[1] for p in pts]).slope
    return {"errors": errors, "C": bound, "order": order}


def check_codereliction_limit(n: int, cases: int, seed, max_degree: int = 4) -> LawResult:
    res = LawResult(
        "codereliction limit",
        "coder(v) = lim (delta_tv - delta_0)/t",
        "limit",
        kind="numeric",
        note=f"|error| <= C t on t = 2^-3..2^-12 with fitted order >= {LIMIT_MIN_ORDER}",
    )
    rng = rng_for(seed, res.name)
    min_order = None
    for _ in range(cases):
        f = rand_poly(rng, n, 1, max_degree)
        v = rand_vector(rng, n, nonzero=True)
        if n:
            # unit sup-norm so that the t window means the same thing for every v
            v = v.scale(1 / max(abs(c) for c in v))
        out = coderelict_limit(f, v)
        res.cases += 1
        res.max_residual = max(res.max_residual, out["C"])
        order = out["order"]
        if order is not None:
            min_order = order if min_order is None else min(min_order, order)
            if order < LIMIT_MIN_ORDER:
                res.fail({"f": f, "v": v}, f"order {order:.4f}", f">= {LIMIT_MIN_ORDER}", out["C"])
    res.stats = {"min_fitted_order": None if min_order is None else round(min_order, 6)}
    return res


# -- runners ---------------------------------------------------------------------------

SUITES = ("differential", "comonad", "bialgebra", "seely", "adjunction")


def run_law(law_: Law, n: int, cases: int, seed, order: int) -> LawResult:
    res = LawResult(law_.name, law_.anchor, law_.suite, note=law_.note)
    rng = rng_for(seed, f"{law_.suite}:{law_.name}:{n}")
    for _ in range(cases):
        inputs, lhs, rhs = law_.case(rng, n, order)
        res.record(inputs, lhs, rhs)
    return res


def check_laws(n: int, cases: int, seed, order: int, suites=SUITES) -> list[LawResult]:
    return [run_law(lw, n, cases, seed, order) for lw in LAWS if lw.suite in suites]


def check_differential_axioms(n: int, cases: int, seed, order: int = 2) -> list[LawResult]:
    """[dC.1]-[dC.4], the pairing form of the chain rule, and the comonad and
    bialgebra laws on ``!R^n``."""
    if not 0 <= n <= 6:
        raise ValueError("check_differential_axioms supports R^n with 0 <= n <= 6")
    return check_laws(n, cases, seed, order, ("differential", "comonad", "bialgebra"))


@dataclass
class LawReport:
    config: dict
    laws: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.laws)

    def to_json(self) -> dict:
        total = sum(r.cases for r in self.laws)
        return {
            "schema": "convenient.lawreport/1",
            "config": self.config,
            "summary": {
                "laws": len(self.laws),
                "failed": sum(not r.passed for r in self.laws),
                "cases": total,
                "no_cases": total == 0,
                "passed": self.passed,
            },
            "laws": [r.to_json() for r in self.laws],
        }


def _run_indexed(args) -> LawResult:
    i, n, cases, seed, order = args
    return run_law(LAWS[i], n, cases, seed, order)


def full_report(n: int, cases: int, seed, order: int, jobs: int = 1, tol: float | None = None) -> LawReport:
    """Every registered law on ``!R^n``; ``jobs > 1`` spreads the laws over processes.

    Results come back in registry order whatever the schedule, so the report
    only depends on the configuration.
    """
    if not 0 <= n <= 6:
        raise ValueError("laws are checked on R^n with 0 <= n <= 6")
    if order < 0 or cases < 0:
        raise ValueError("order and cases must be non-negative")
    work = [(i, n, cases, seed, order) for i in range(len(LAWS))]
    if jobs > 1 and cases:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            laws = list(pool.map(_run_indexed, work))
    else:
        laws = [_run_indexed(w) for w in work]
    config = {"space": f"R^{n}", "order": order, "cases": cases, "seed": seed, "tol": tol}
    return LawReport(config, laws)
