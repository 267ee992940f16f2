"""Truncated overconvergent Weyl algebras in (x, y): division by D = -dy + pi*x,
the augmentation eps', and the Fourier quotient.

Global elements are DiffOps in (x, y).  Chart elements live in (x', t) with
x' = 1/x and t = y (chart ``u1v0``) or t = 1/y (chart ``u1v1``).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .dwork import Report
from .errors import DomainError
from .linalg import rank_padic
from .operator_algebra import INF, Caps, DiffOp, GaugeReport, LaurentPoly, gauge, op_mul
from .padic_core import PadicRing, PadicScalar, TruncationParams, binom, nu_m

CHARTS = {"global": ("x", "y"), "u1v0": ("x'", "t"), "u1v1": ("x'", "t")}
X, Y = 0, 1


@dataclass
class DaggerElt:
    op: DiffOp
    chart: str = "global"
    _gauges: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise DomainError(f"unknown chart {self.chart!r}")
        if self.op.dim != 2:
            raise DomainError("dagger elements live in two variables")
        if self.chart == "global" and any(min(a) < 0 for a, _ in self.op.terms):
            raise DomainError("global elements have nonnegative exponents")

    @property
    def ring(self) -> PadicRing:
        return self.op.ring

    def in_B2(self) -> bool:
        return all(a[X] == 0 for a, _ in self.op.terms)

    def gauge(self, m: int, algebra: str = "E") -> GaugeReport:
        key = (m, algebra)
        if key not in self._gauges:
            self._gauges[key] = gauge_dagger(self, m, algebra)
        return self._gauges[key]

    def __eq__(self, other):
        return isinstance(other, DaggerElt) and self.chart == other.chart and self.op == other.op

    def to_json(self) -> dict:
        return {"chart": self.chart, "terms": self.op.to_json()}

    def __str__(self):
        return str(self.op)


def default_caps(params: TruncationParams) -> Caps:
    order = max(params.order, params.hi)
    return Caps.uniform(2, params.lo, params.hi, order)


def dagger(op: DiffOp, chart: str = "global") -> DaggerElt:
    return DaggerElt(op.renamed(CHARTS[chart]), chart)


def _gens(ring: PadicRing, caps: Caps, chart: str = "global"):
    names = CHARTS[chart]
    return {
        "x": DiffOp.x(ring, 2, X, 1, caps, names),
        "y": DiffOp.x(ring, 2, Y, 1, caps, names),
        "dx": DiffOp.d(ring, 2, X, 1, caps, names),
        "dy": DiffOp.d(ring, 2, Y, 1, caps, names),
        "one": DiffOp.identity(ring, 2, caps, names),
    }


def dirac(ring: PadicRing, caps: Caps) -> DiffOp:
    """D = -dy + pi*x."""
    g = _gens(ring, caps)
    return g["x"].scale(ring.pi()) - g["dy"]


def gauge_dagger(P: DaggerElt, m: int, algebra: str = "E") -> GaugeReport:
    """``E``: v_p(a) >= nu_m(l) on positive exponents.  ``F``: also no x-term."""
    if algebra not in ("E", "F"):
        raise DomainError("algebra must be E or F")
    return gauge(P.op, m, forbid=(X,) if algebra == "F" else ())


# --------------------------------------------------------------------------
# the explicit decomposition of p^nu x^l


def coeff_c(l: int, r: int, s: int, m: int, ring: PadicRing) -> PadicScalar:
    """c_l(r, s): coefficient of d_y^<l-1-s>_(m+2) x^s in S_l."""
    if not (1 <= r <= l and 0 <= s <= r - 1):
        raise DomainError("need 1 <= r <= l and 0 <= s <= r-1")
    p = ring.p
    k = l - 1 - s
    num = math.comb(l, r) * math.comb(r - 1, s) * math.factorial(k)
    val = ring(Fraction(num, math.factorial(k // p ** (m + 2))))
    val = val * p ** nu_m(l, p, m)
    val = val.mul_pi_power(-(l - s))
    return val if (r - 1 + s) % 2 == 0 else -val


def c_bound(l: int, p: int, m: int) -> float:
    """((p^2-p-1)/(p^(m+2)(p-1))) l - log_p(l+1) - 2."""
    return (p * p - p - 1) / (p ** (m + 2) * (p - 1)) * l - math.log(l + 1, p) - 2


def check_c_bound(lmax: int, p: int, m: int, ring: PadicRing | None = None) -> Report:
    """v_p(c_l(r, s)) >= c_bound(l) over 1 <= l <= lmax and the full (r, s) range."""
    ring = ring or PadicRing(p, 8)
    worst = None
    for l in range(1, lmax + 1):
        bound = c_bound(l, p, m)
        for r in range(1, l + 1):
            for s in range(r):
                c = coeff_c(l, r, s, m, ring)
                if c.is_zero():
                    continue
                v = c.v / (p - 1)
                if v < bound - 1e-12:
                    return Report(False, {"bound": False}, {"l": l, "r": r, "s": s, "v": v, "bound": bound})
                gap = v - bound
                if worst is None or gap < worst[0]:
                    worst = (gap, l, r, s)
    return Report(True, {"bound": True}, {"min_gap": worst[0] if worst else None,
                                          "at": worst[1:] if worst else None})


def c_valuation_grid(lmax: int, p: int, m: int) -> Report:
    """Exact v_p(c_l(r, s)) over the full grid from Legendre tables, against c_bound.

    Valuations: nu_m(l) - (l-s)/(p-1) + v(C(l, r)) + v(C(r-1, s)) + v((l-1-s)!) - v(q!).
    """
    import numpy as np

    n = np.arange(lmax + 1)
    digits = np.zeros_like(n)
    t = n.copy()
    while t.any():
        digits += t % p
        t //= p
    vf = (n - digits) // (p - 1)
    worst = None
    for l in range(1, lmax + 1):
        r = np.arange(1, l + 1)[:, None]
        s = np.arange(l)[None, :]
        mask = s <= r - 1
        rr, ss = np.broadcast_arrays(r, s)
        rr, ss = rr[mask], ss[mask]
        k = l - 1 - ss
        v = (nu_m(l, p, m) - (l - ss) / (p - 1) + (vf[l] - vf[rr] - vf[l - rr])
             + (vf[rr - 1] - vf[ss] - vf[rr - 1 - ss]) + vf[k] - vf[k // p ** (m + 2)])
        gap = v - c_bound(l, p, m)
        i = int(np.argmin(gap))
        if worst is None or gap[i] < worst[0]:
            worst = (float(gap[i]), l, int(rr[i]), int(ss[i]))
    ok = worst is None or worst[0] >= -1e-9
    return Report(ok, {"bound": ok}, {"min_gap": worst[0] if worst else None,
                                      "at": list(worst[1:]) if worst else None})


def _dy_power(ring: PadicRing, caps: Caps, chart: str, k: int) -> DiffOp:
    """d_y^k in the requested chart."""
    names = CHARTS[chart]
    if chart == "u1v1":
        # d_y = -t^2 d_t
        base = op_mul(DiffOp.x(ring, 2, Y, 2, caps, names), DiffOp.d(ring, 2, Y, 1, caps, names)).scale(-1)
        out = DiffOp.identity(ring, 2, caps, names)
        for _ in range(k):
            out = op_mul(out, base)
        return out
    return DiffOp.d(ring, 2, Y, k, caps, names).scale(math.factorial(k))


def _x_power(ring: PadicRing, caps: Caps, chart: str, s: int) -> DiffOp:
    names = CHARTS[chart]
    return DiffOp.x(ring, 2, X, -s if chart != "global" else s, caps, names)


def build_S_R(l: int, m: int, ring: PadicRing, caps: Caps, chart: str = "global") -> tuple:
    """(S_l, R_l) with p^nu_m(l) x^l = S_l D + R_l.

    Coefficients are those of the displayed double sum; d_y^<k>_(m+2) times
    k!/q_k^(m+2)! is the plain power d_y^k, which is how the chart forms are built.
    """
    if l < 1:
        raise DomainError("l must be >= 1")
    p = ring.p
    S = DiffOp(ring, 2, {}, caps, CHARTS[chart])
    for r in range(1, l + 1):
        for s in range(r):
            k = l - 1 - s
            c = coeff_c(l, r, s, m, ring) * math.factorial(k // p ** (m + 2)) / math.factorial(k)
            term = op_mul(_dy_power(ring, caps, chart, k), _x_power(ring, caps, chart, s))
            S = S + term.scale(c)
    lead = ring(p ** nu_m(l, p, m)).mul_pi_power(-l)
    R = _dy_power(ring, caps, chart, l).scale(lead)
    return DaggerElt(S, chart), DaggerElt(R, chart)


def formula_S_identity(l: int, m: int, ring: PadicRing, caps: Caps) -> bool:
    S, R = build_S_R(l, m, ring, caps)
    lhs = DiffOp.x(ring, 2, X, l, caps, CHARTS["global"]).scale(ring.p ** nu_m(l, ring.p, m))
    rhs = op_mul(S.op, dirac(ring, caps)) + R.op
    return lhs == rhs


# --------------------------------------------------------------------------
# division


def _wide(P: DiffOp) -> Caps:
    amax = max((a[X] for a, _ in P.terms), default=0)
    c = P.caps
    return Caps(c.lo, tuple(h + 1 for h in c.hi), tuple(o + amax + 1 for o in c.order))


def divide_iterative(P: DaggerElt) -> tuple:
    """Strip x one power at a time: x^a M = x^(a-1) (M x - [M, x]) and x = (D + d_y)/pi."""
    if P.chart != "global":
        raise DomainError("divide_iterative works on the global chart")
    ring = P.ring
    caps = _wide(P.op)
    names = CHARTS["global"]
    Q: dict = {}
    R: dict = {}
    work = dict(P.op.terms)
    while work:
        amax = max(a[X] for a, _ in work)
        if amax == 0:
            for k, v in work.items():
                R[k] = R[k] + v if k in R else v
            break
        nxt: dict = {}

        def add(dst, key, val):
            if not val.is_exact_zero():
                dst[key] = dst[key] + val if key in dst else val

        for (a, b), c in work.items():
            if a[X] < amax:
                add(nxt, (a, b), c)
                continue
            a1 = (a[X] - 1, a[Y])
            cp = c.mul_pi_power(-1)
            # M x D-part goes to Q; M x d_y-part stays with one less x
            add(Q, (a1, b), cp)
            add(nxt, (a1, (b[X], b[Y] + 1)), cp * (b[Y] + 1))
            if b[X] > 0:
                # [M, x] = d_x^[i-1] ... since d_x^[i] x = x d_x^[i] + d_x^[i-1]
                add(nxt, (a1, (b[X] - 1, b[Y])), -c)
        work = {k: v for k, v in nxt.items() if not v.is_zero()}
    Qop = DiffOp(ring, 2, Q, caps, names)
    Rop = DiffOp(ring, 2, R, caps, names)
    return DaggerElt(Qop), DaggerElt(Rop)


def right_x_form(P: DiffOp, var: int = X) -> dict:
    """{l: T_l} with P = sum_l T_l x^l and T_l free of x (x-exponent 0).

    Uses x^a d^[i] = sum_j (-1)^j C(a, j) d^[i-j] x^(a-j), valid for a in Z.
    """
    out: dict = {}
    zero = [0, 0]
    for (a, b), c in P.terms.items():
        for j in range(b[var] + 1):
            if a[var] >= 0 and j > a[var]:
                break
            n = binom(a[var], j)
            if not n:
                continue
            ka = list(a)
            ka[var] = 0
            kb = list(b)
            kb[var] -= j
            l = a[var] - j
            coef = c * (n if j % 2 == 0 else -n)
            d = out.setdefault(l, {})
            key = (tuple(ka), tuple(kb))
            d[key] = d[key] + coef if key in d else coef
    return {l: DiffOp(P.ring, P.dim, t, P.caps, P.names) for l, t in out.items()}


def divide_closed(P: DaggerElt, m: int = 0) -> tuple:
    """Division through the closed formula: P = sum T_l x^l, x^l = p^-nu (S_l D + R_l)."""
    if P.chart != "global":
        raise DomainError("divide_closed works on the global chart")
    ring = P.ring
    caps = _wide(P.op)
    names = CHARTS["global"]
    Q = DiffOp(ring, 2, {}, caps, names)
    R = DiffOp(ring, 2, {}, caps, names)
    for l, T in sorted(right_x_form(P.op.with_caps(caps)).items()):
        if l == 0:
            R = R + T
            continue
        S_l, R_l = build_S_R(l, m, ring, caps)
        inv = ring(Fraction(1, ring.p ** nu_m(l, ring.p, m)))
        Q = Q + op_mul(T, S_l.op).scale(inv)
        R = R + op_mul(T, R_l.op).scale(inv)
    return DaggerElt(Q), DaggerElt(R)


def _digit_sum(n: int, p: int) -> int:
    total = 0
    while n:
        n, r = divmod(n, p)
        total += r
    return total


@lru_cache(maxsize=64)
def jump_constant(p: int, m: int) -> Fraction:
    """C(p, m) >= 0 such that members of E^(m) divide into Q, R with slack >= -C at level m+2.

    S side: v(c_l(r, s)) >= c_bound(l) against nu_(m+2)(s) <= nu_(m+2)(l-1).
    R side: v(p^nu l!/pi^l) - nu_m(l) = -s_p(l)/(p-1).  Minimized over l.
    """
    worst = 0.0
    for l in range(1, 200 * p ** (m + 3) + 1):
        s_side = c_bound(l, p, m) - nu_m(l - 1, p, m + 2)
        r_side = -_digit_sum(l, p) / (p - 1)
        worst = min(worst, s_side, r_side)
    return Fraction(math.ceil(-worst * 1000) + 1, 1000)


@dataclass
class Division:
    Q: DaggerElt
    R: DaggerElt
    gauge_before: GaugeReport
    gauge_after: tuple
    certified: bool
    constant: Fraction

    def to_json(self) -> dict:
        return {"Q": self.Q.to_json(), "R": self.R.to_json(),
                "gauge_before": self.gauge_before.to_json(),
                "gauge_after": [g.to_json() for g in self.gauge_after],
                "certified": self.certified, "constant": str(self.constant)}


def divide_dirac(P: DaggerElt, m: int = 0, method: str = "iterative") -> Division:
    """(Q, R) with P = Q D + R, R free of x, and the level-jump certificate.

    The certificate: if P is in E^(m) then gauge(Q, m+2) and gauge(R, m+2)
    have slack >= -C(p, m), i.e. both lie in E^(m+2) after inverting p.
    """
    if method == "iterative":
        Q, R = divide_iterative(P)
    elif method == "closed":
        Q, R = divide_closed(P, m)
    else:
        raise DomainError(f"unknown method {method!r}")
    if not R.in_B2():
        raise AssertionError("remainder has an x-term")
    before = P.gauge(m)
    gq, gr = Q.gauge(m + 2), R.gauge(m + 2)
    C = jump_constant(P.ring.p, m)
    ok = all(g.slack is None or g.slack >= -C for g in (gq, gr))
    return Division(Q, R, before, (gq, gr), ok if before.member else True, C)


def division_exact(P: DaggerElt, div: Division) -> bool:
    caps = div.Q.op.caps.join(P.op.caps)
    return P.op.with_caps(caps) == op_mul(div.Q.op.with_caps(caps), dirac(P.ring, caps)) + div.R.op.with_caps(caps)


def kernel_test(Q: DaggerElt) -> Report:
    """Q D = 0 forces Q = 0; dividing Q D must give back (Q, 0)."""
    caps = _wide(Q.op)
    prod = op_mul(Q.op.with_caps(caps), dirac(Q.ring, caps))
    checks = {"zero_iff": prod.is_zero() == Q.op.is_zero()}
    if not prod.is_zero():
        Q2, R2 = divide_iterative(DaggerElt(prod))
        checks["recovers_Q"] = Q2.op == Q.op.with_caps(Q2.op.caps)
        checks["zero_remainder"] = R2.op.is_zero()
    return Report(all(checks.values()), checks)


# --------------------------------------------------------------------------
# charts


def lah_dx(n: int, ring: PadicRing, caps: Caps, names, var: int) -> DiffOp:
    """(-u^2 d_u)^n / n! = (-1)^n sum_k C(n-1, k-1) u^(n+k) d_u^[k]."""
    if n == 0:
        return DiffOp.identity(ring, 2, caps, names)
    terms = {}
    for k in range(1, n + 1):
        a = [0, 0]
        b = [0, 0]
        a[var] = n + k
        b[var] = k
        terms[(tuple(a), tuple(b))] = ring(math.comb(n - 1, k - 1) * (-1) ** n)
    return DiffOp(ring, 2, terms, caps, names)


def to_chart(P: DaggerElt, chart: str, caps: Caps | None = None) -> DaggerElt:
    """Transport a global element: x -> 1/x', d_x -> -x'^2 d_x', and y, d_y per chart."""
    if P.chart != "global":
        raise DomainError("only global elements are transported")
    if chart == "global":
        return P
    ring = P.ring
    if caps is None:
        hi = max(P.op.caps.hi) * 3 + 2
        caps = Caps((-hi, -hi if chart == "u1v1" else P.op.caps.lo[Y]), (hi, hi), P.op.caps.order)
    names = CHARTS[chart]
    out = DiffOp(ring, 2, {}, caps, names)
    for (a, b), c in P.op.terms.items():
        term = DiffOp.scalar(ring, 2, c, caps, names)
        term = op_mul(term, DiffOp.x(ring, 2, X, -a[X], caps, names))
        term = op_mul(term, DiffOp.x(ring, 2, Y, -a[Y] if chart == "u1v1" else a[Y], caps, names))
        term = op_mul(term, lah_dx(b[X], ring, caps, names, X))
        dy = lah_dx(b[Y], ring, caps, names, Y) if chart == "u1v1" else DiffOp.d(ring, 2, Y, b[Y], caps, names)
        term = op_mul(term, dy)
        out = out + term
    return DaggerElt(out, chart)


def chart_dirac(ring: PadicRing, caps: Caps, chart: str) -> DiffOp:
    """D' = -x' d_y + pi in chart coordinates."""
    xp = DiffOp.x(ring, 2, X, 1, caps, CHARTS[chart])
    return DiffOp.scalar(ring, 2, ring.pi(), caps, CHARTS[chart]) - op_mul(xp, _dy_power(ring, caps, chart, 1))


def ideal_identity(ring: PadicRing, caps: Caps, chart: str) -> bool:
    """x (-x' d_y + pi) = -d_y + pi x."""
    x = _x_power(ring, caps, chart, 1)
    lhs = op_mul(x, chart_dirac(ring, caps, chart))
    rhs = x.scale(ring.pi()) - _dy_power(ring, caps, chart, 1)
    return lhs == rhs


def in_infinity_prime(P: DaggerElt) -> bool:
    """No negative x' exponent (the class without poles along x = infinity)."""
    return all(a[X] >= 0 for a, _ in P.op.terms)


def divide_chart(P: DaggerElt, m: int = 0) -> tuple:
    """(Q, R) with P = Q (-x' d_y + pi) + R and R without negative x' powers."""
    if P.chart == "global":
        raise DomainError("divide_chart needs a chart element")
    ring = P.ring
    chart = P.chart
    names = CHARTS[chart]
    c = P.op.caps
    lmax = max((-a[X] for a, _ in P.op.terms), default=0)
    grow = max(lmax, 0) + 2
    caps = Caps((c.lo[X] - grow, c.lo[Y] - 2 * grow), (c.hi[X] + grow, c.hi[Y] + 2 * grow),
                tuple(o + grow for o in c.order))
    Q = DiffOp(ring, 2, {}, caps, names)
    R = DiffOp(ring, 2, {}, caps, names)
    for l, T in sorted(right_x_form(P.op.with_caps(caps)).items()):
        T = T.with_caps(caps)
        if l >= 0:
            R = R + op_mul(T, DiffOp.x(ring, 2, X, l, caps, names))
            continue
        S_l, R_l = build_S_R(-l, m, ring, caps, chart)
        inv = ring(Fraction(1, ring.p ** nu_m(-l, ring.p, m)))
        Q = Q + op_mul(op_mul(T, S_l.op), _x_power(ring, caps, chart, 1)).scale(inv)
        R = R + op_mul(T, R_l.op).scale(inv)
    return DaggerElt(Q, chart), DaggerElt(R, chart)


def chart_division_exact(P: DaggerElt, Q: DaggerElt, R: DaggerElt) -> bool:
    caps = Q.op.caps.join(P.op.caps).join(R.op.caps)
    lhs = P.op.with_caps(caps)
    rhs = op_mul(Q.op.with_caps(caps), chart_dirac(P.ring, caps, P.chart)) + R.op.with_caps(caps)
    return lhs == rhs


def conditional_membership(Q: DaggerElt) -> bool:
    """If Q (-d_y + pi x) has no x'-poles then neither has Q (the implication's truth value)."""
    caps = Q.op.caps
    x = _x_power(Q.ring, caps, Q.chart, 1)
    D = x.scale(Q.ring.pi()) - _dy_power(Q.ring, caps, Q.chart, 1)
    prod = DaggerElt(op_mul(Q.op, D), Q.chart)
    return (not in_infinity_prime(prod)) or in_infinity_prime(Q)


# --------------------------------------------------------------------------
# augmentation and Fourier quotient


def _divided_pow_scalar_var(ring: PadicRing, caps: Caps, var: int, n: int) -> DiffOp:
    """(-pi z)^n / n! as an operator, z the coordinate ``var``."""
    c = ring(Fraction((-1) ** n, math.factorial(n))) * ring.pi() ** n
    return DiffOp.x(ring, 2, var, n, caps, CHARTS["global"]).scale(c)


def twist_automorphism(P: DaggerElt) -> DaggerElt:
    """d_y -> d_y - pi x, d_x -> d_x - pi y (conjugation by exp(pi x y))."""
    ring = P.ring
    caps = _wide(P.op)
    caps = Caps(caps.lo, tuple(h + max(caps.order) for h in caps.hi), caps.order)
    names = CHARTS["global"]
    out = DiffOp(ring, 2, {}, caps, names)

    def dp(var, other, n):
        # (d_var - pi * other)^[n] = sum_t d_var^[t] (-pi other)^[n-t]
        acc = DiffOp(ring, 2, {}, caps, names)
        for t in range(n + 1):
            acc = acc + op_mul(DiffOp.d(ring, 2, var, t, caps, names),
                               _divided_pow_scalar_var(ring, caps, other, n - t))
        return acc

    for (a, b), c in P.op.terms.items():
        term = DiffOp(ring, 2, {(a, (0, 0)): c}, caps, names)
        term = op_mul(op_mul(term, dp(X, Y, b[X])), dp(Y, X, b[Y]))
        out = out + term
    return DaggerElt(out)


def epsilon_prime(P: DaggerElt) -> DaggerElt:
    """eps'(P): twist, then drop the left ideal generated by d_y on the right."""
    if P.chart != "global":
        raise DomainError("eps' is defined on the global chart")
    tw = twist_automorphism(P).op
    keep = {(a, b): c for (a, b), c in tw.terms.items() if b[Y] == 0}
    return DaggerElt(DiffOp(tw.ring, 2, keep, tw.caps, tw.names))


def kpi_differential(P: DaggerElt) -> DaggerElt:
    """d(P (x) d_y) = P (d_y + pi x)."""
    caps = _wide(P.op)
    g = _gens(P.ring, caps)
    return DaggerElt(op_mul(P.op.with_caps(caps), g["dy"] + g["x"].scale(P.ring.pi())))


def fourier_reduce(P: DaggerElt) -> DiffOp:
    """Class of P modulo d_x A_2 + A_2 D, as an operator in (y, d_y)."""
    _, R = divide_iterative(P)
    keep = {}
    for (a, b), c in R.op.terms.items():
        if b[X] == 0:
            keep[((a[Y],), (b[Y],))] = c
    caps = R.op.caps
    return DiffOp(P.ring, 1, keep, Caps((caps.lo[Y],), (caps.hi[Y],), (caps.order[Y],)), ("y",))


def fourier_rank(params: TruncationParams, amax: int = 2, bmax: int = 2, imax: int = 1, jmax: int = 2) -> Report:
    """Rank of the reduction on the monomial window equals the number of image cells."""
    ring = params.ring()
    caps = Caps.uniform(2, 0, max(amax, bmax) + 2, imax + jmax + amax + 2)
    cells = []
    rows = []
    images = []
    for a in range(amax + 1):
        for b in range(bmax + 1):
            for i in range(imax + 1):
                for j in range(jmax + 1):
                    mono = DiffOp(ring, 2, {((a, b), (i, j)): ring.one()}, caps, CHARTS["global"])
                    img = fourier_reduce(DaggerElt(mono))
                    images.append(img)
                    for k in img.terms:
                        if k not in cells:
                            cells.append(k)
    for img in images:
        rows.append([img.terms.get(k, ring.zero()) for k in cells])
    rk = rank_padic(rows) if cells else 0
    ok = rk == len(cells)
    return Report(ok, {"rank=cells": ok}, {"rank": rk, "cells": len(cells)})


def random_global(params: TruncationParams, rng: random.Random, terms: int = 4,
                  amax: int = 4, bmax: int = 3, member_level: int | None = None) -> DaggerElt:
    """Random global element; with ``member_level`` the coefficients are scaled into E^(m)."""
    ring = params.ring()
    p = params.p
    caps = Caps.uniform(2, 0, max(amax, bmax) + 4, max(params.order, amax + bmax + 6))
    t = {}
    for _ in range(terms):
        a = (rng.randint(0, amax), rng.randint(0, bmax))
        b = (rng.randint(0, 2), rng.randint(0, 2))
        c = ring(rng.randint(1, p**3))
        if member_level is not None:
            c = c * p ** (nu_m(a[0], p, member_level) + nu_m(a[1], p, member_level))
        t[(a, b)] = c
    return DaggerElt(DiffOp(ring, 2, t, caps, CHARTS["global"]))
