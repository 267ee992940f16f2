"""Invariant batteries behind ``dworkalg check`` and the acceptance tests.

Every battery returns a list of Check entries and is deterministic in
(params, seed).
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import canonical_iso as ci
from . import weyl_dagger as wd
from .dwork import (FrobeniusLift, H_squared_normal_form, dual_monomial_action, dwork_dual, dwork_H,
                    frobenius_pullback, partition_of_unity, symbolic_dprime, taylor, transfer)
from .errors import Ambiguous, DomainError, DworkAlgError, Overflow, Unsupported
from .modpoly import ModPoly
from .operator_algebra import Caps, DiffOp, LaurentPoly, apply, op_mul
from .padic_core import TruncationParams, check_estimations, nu_m

SCHEMA = 1


@dataclass
class Check:
    name: str
    status: str  # pass, fail, skip
    witness: object = None

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "witness": self.witness}


def _ok(name, cond, witness=None) -> Check:
    return Check(name, "pass" if cond else "fail", None if cond else witness)


@dataclass
class SuiteReport:
    suite: str
    params: TruncationParams
    checks: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def failed(self) -> bool:
        return any(c.status == "fail" for c in self.checks)

    def to_json(self) -> dict:
        p = self.params
        return {
            "schema": SCHEMA,
            "suite": self.suite,
            "params": {"p": p.p, "s": p.s, "N": p.N, "lo": p.lo, "hi": p.hi, "K": p.K,
                       "m": p.m, "seed": p.seed},
            "checks": [c.to_json() for c in sorted(self.checks, key=lambda c: c.name)],
            "wall_time": round(self.wall_time, 3),
        }


# --------------------------------------------------------------------------
# dwork


def dwork_projector(params: TruncationParams) -> list:
    """H^2 = H, H(x^j) = x^j iff p | j, dual delta property, partition of unity."""
    ring = params.ring()
    N = params.N
    q = params.q
    H = dwork_H(0, params)
    caps = H.caps
    out = []
    bad_proj = bad_fix = None
    for j in range(0, params.hi + 1):
        mono = LaurentPoly.monomial(ring, (j,), 1, caps)
        h = apply(H, mono)
        expect = mono if j % q == 0 else mono - mono
        if bad_fix is None and not h.agrees_mod(expect, N):
            bad_fix = j
        if bad_proj is None and not apply(H, h).agrees_mod(h, N):
            bad_proj = j
    out.append(_ok("H(x^j)=x^j iff q|j", bad_fix is None, {"j": bad_fix}))
    out.append(_ok("H^2=H on monomials", bad_proj is None, {"j": bad_proj}))
    HH, Ht = H_squared_normal_form(params)
    out.append(_ok("H^2=H normal form", HH.agrees_mod(Ht, N)))
    bad = None
    for k in range(q):
        Hk = dwork_dual(k, params)
        for j in range(0, params.hi + 1):
            img = apply(Hk, LaurentPoly.monomial(ring, (j,), 1, Hk.caps))
            lam = dual_monomial_action(j, k, params)
            want = (LaurentPoly.monomial(ring, (j - k,), 1, Hk.caps).scale(lam)
                    if j - k >= params.lo else LaurentPoly(ring, 1, {}, Hk.caps))
            if not img.agrees_mod(want, N):
                bad = (k, j)
                break
            if j < q and not lam.agrees_mod(ring(int(j == k)), N):
                bad = (k, j)
                break
        if bad:
            break
    out.append(_ok("dual basis delta property", bad is None, {"k,j": bad}))
    out.append(_ok("partition of unity", partition_of_unity(params).passed))
    return out


def _random_op(ring, rng, caps, names, terms=3, amax=2, bmax=2) -> DiffOp:
    return DiffOp(ring, 1, {((rng.randint(0, amax),), (rng.randint(0, bmax),)): rng.randint(-5, 5)
                            for _ in range(terms)}, caps, names)


def transfer_homomorphism(params: TruncationParams, trials: int = 100) -> list:
    """(PQ)° = P°Q° and P°(F*g) = F*(P g) by action on window monomials."""
    rng = random.Random(params.seed)
    ring = params.ring()
    N = params.N
    q = params.q
    ycaps = Caps.uniform(1, params.lo, params.hi, params.hi)
    F = FrobeniusLift(1, q)
    bad_mul = bad_pull = None
    for it in range(trials):
        A = _random_op(ring, rng, ycaps, ("y",))
        B = _random_op(ring, rng, ycaps, ("y",))
        AB = op_mul(A, B)
        Ac, Bc, ABc = transfer(A, params), transfer(B, params), transfer(AB, params)
        for n in range(0, params.hi + 1):
            mono = LaurentPoly.monomial(ring, (n,), 1, Ac.caps)
            try:
                mid = apply(Bc, mono)
                # beyond the materialized order the truncated series is not exact
                if any(e[0] > Ac.caps.order[0] for e, _ in mid):
                    continue
                lhs = apply(ABc, mono)
                rhs = apply(Ac, mid)
            except Overflow:
                continue
            if not lhs.agrees_mod(rhs, N):
                bad_mul = bad_mul or {"trial": it, "n": n}
        g = LaurentPoly(ring, 1, {(rng.randint(0, 3),): rng.randint(-5, 5) for _ in range(3)},
                        Caps.uniform(1, 0, params.hi // q, params.hi), ("y",))
        try:
            lhs = apply(Ac, frobenius_pullback(F, g, Ac.caps))
            rhs = frobenius_pullback(F, apply(A.with_caps(A.caps.join(g.caps)), g), Ac.caps)
        except Overflow:
            continue
        if not lhs.agrees_mod(rhs, N):
            bad_pull = bad_pull or {"trial": it}
    return [_ok("(PQ)°=P°Q°", bad_mul is None, bad_mul),
            _ok("P°(F*g)=F*(Pg)", bad_pull is None, bad_pull)]


def transfer_literal_vs_symbolic(params: TruncationParams) -> list:
    ring = params.ring()
    lit = transfer(DiffOp.d(ring, 1, 0, 1), params, mode="literal")
    sym = symbolic_dprime(params)
    ok = all(apply(lit, LaurentPoly.monomial(ring, (j,), 1, lit.caps)).agrees_mod(
        apply(sym, LaurentPoly.monomial(ring, (j,), 1, sym.caps)), params.N)
        for j in range(0, params.hi + 1))
    return [_ok("literal (d')° = (q x^(q-1))^-1 d H", ok)]


def taylor_cocycle(params: TruncationParams, trials: int = 10, order: int = 6) -> list:
    """tau_(f,f) = 1 and tau_(f2,f3) tau_(f1,f2) = tau_(f1,f3); evaluation matches g(f2)."""
    rng = random.Random(params.seed)
    ring = params.ring()
    p, m, N = params.p, max(params.m, 1), params.N
    caps = Caps.uniform(1, 0, 40, 40)
    bad_id = bad_comp = bad_eval = None

    def rnd(scale=1, deg=2):
        return LaurentPoly(ring, 1, {(rng.randint(0, deg),): rng.randint(-9, 9) * scale for _ in range(3)},
                           caps)

    for it in range(trials):
        f1 = rnd() + LaurentPoly.monomial(ring, (1,), 1, caps)
        f2 = f1 + rnd(p)
        f3 = f1 + rnd(p)
        if not taylor([f1], [f1], m, order).is_identity_mod(N):
            bad_id = bad_id or it
        t12 = taylor([f1], [f2], m, order)
        t23 = taylor([f2], [f3], m, order)
        t13 = taylor([f1], [f3], m, order)
        if not t23.compose(t12).agrees_mod(t13, N):
            bad_comp = bad_comp or it
        g = LaurentPoly(ring, 1, {(rng.randint(0, 3),): rng.randint(-5, 5) for _ in range(2)}, caps)
        if not t12.evaluate(g, [f1]).agrees_mod(g.substitute([f2]), N):
            bad_eval = bad_eval or it
    return [_ok("tau_(f,f)=1", bad_id is None, {"trial": bad_id}),
            _ok("tau composition law", bad_comp is None, {"trial": bad_comp}),
            _ok("tau evaluates to g(f2)", bad_eval is None, {"trial": bad_eval})]


def _guarded(label: str, fn, *args, **kw) -> list:
    """Run one battery; a library error becomes a single failing check.

    Unsupported parameters and windows too small for the battery are skips.
    """
    try:
        return fn(*args, **kw)
    except (Unsupported, Overflow) as exc:
        return [Check(f"{label}: not run", "skip", {"error": type(exc).__name__, "message": str(exc)})]
    except DworkAlgError as exc:
        return [Check(f"{label}: error", "fail", {"error": type(exc).__name__, "message": str(exc)})]


def suite_dwork(params: TruncationParams) -> list:
    tp = TruncationParams(p=3, N=params.N, m=1, seed=params.seed)
    taylor_checks = _guarded("taylor", taylor_cocycle, tp, trials=5)
    return (_guarded("projector", dwork_projector, params)
            + _guarded("transfer", transfer_homomorphism, params.replace(hi=min(params.hi, 30)), trials=20)
            + _guarded("literal transfer", transfer_literal_vs_symbolic, params)
            + [Check("taylor: " + c.name, c.status, c.witness) for c in taylor_checks])


# --------------------------------------------------------------------------
# estimates


def suite_estimates(params: TruncationParams, kmax: int = 2_000) -> list:
    rep = check_estimations((params.p,), kmax=kmax, samples=2_000, seed=params.seed)
    return [_ok(f"estimations p={params.p} k<={kmax}", rep.passed, rep.counterexample)]


# --------------------------------------------------------------------------
# koszul / iota-alpha


def koszul_basics(params: TruncationParams) -> list:
    mod = params.p ** params.N
    x = ModPoly.var(2, mod, 0, 1, ("x", "y"))
    y = ModPoly.var(2, mod, 1, 1, ("x", "y"))
    out = [_ok("d^2=0 (x,y)", ci.koszul_build([x, y]).d_squared_zero()),
           _ok("regular (x)", ci.koszul_build([ModPoly.var(1, mod, 0, 1, ("x",))]).is_regular())]
    rng = random.Random(params.seed)
    ok = True
    for _ in range(5):
        a = rng.randrange(mod)
        # unit-triangular change of (x, y)
        ok &= ci.KoszulComplex([x + y * a, y]).is_regular()
    out.append(_ok("unit-triangular change stays regular", ok))
    try:
        ci.koszul_build([x, x])
        out.append(Check("non-regular (x,x) rejected", "fail"))
    except DomainError:
        out.append(Check("non-regular (x,x) rejected", "pass"))
    return out


def _identity_case(d: int, mod: int, rng: random.Random):
    model = ci.FiniteFlatModel("identity", d, mod, nparams=1)
    G = ci.random_unit_G(model, rng)
    ys = [model.y(i) for i in range(d)]
    model.z_images = [sum((G[i][j] * ys[j] for j in range(d)), model.ring_Y()) for i in range(d)]
    return model, G


def iota_alpha_battery(params: TruncationParams, trials: int = 50) -> list:
    """Closed determinant formula against the chain-level route, d in {1, 2}."""
    rng = random.Random(params.seed)
    mod = params.p ** min(params.N, 6)
    out = []
    for d in (1, 2):
        bad = None
        for it in range(trials):
            if it % 2 == 0:
                model, G = _identity_case(d, mod, rng)
            else:
                model = ci.FiniteFlatModel("frobenius", d, mod, q=params.q, nparams=1)
                G = ci.frobenius_G(model, rng)
            phi = ci.random_functional(model, rng)
            if not (ci.iota_alpha(phi, G, model) - ci.iota_alpha_chain(phi, G, model)).is_zero():
                bad = bad or {"trial": it, "kind": model.kind}
        out.append(_ok(f"iota-alpha formula = chain route, d={d}", bad is None, bad))
    model = ci.FiniteFlatModel("frobenius", 2, mod, q=params.q)
    bad = None
    for it in range(10):
        phi = ci.random_functional(model, rng)
        if not (ci.iota_alpha(phi, ci.frobenius_G(model), model)
                - ci.iota_alpha(phi, ci.frobenius_G(model, rng), model)).is_zero():
            bad = bad or it
    out.append(_ok("iota-alpha independent of G up to syzygies", bad is None, {"trial": bad}))
    return out


def suite_koszul(params: TruncationParams) -> list:
    return _guarded("koszul", koszul_basics, params) + _guarded("iota-alpha", iota_alpha_battery, params, trials=10)


# --------------------------------------------------------------------------
# canonical isomorphisms


def mu_battery(qs=(2, 3)) -> list:
    out = []
    for q in qs:
        rep = ci.compare_mu(q, 1)
        out.append(_ok(f"mu composite = closed form, q={q}", rep.passed, rep.checks))
        out.append(_ok(f"(Hx^-(q-1))'(det G) = 1, q={q}", rep.checks["det_G_value_is_one"]))
    return out


def mu_nu_battery(params: TruncationParams, trials: int = 20) -> list:
    rng = random.Random(params.seed)
    ring = params.ring()
    caps = Caps.uniform(1, params.lo, params.hi, params.hi)
    bad = None
    for it in range(trials):
        f = LaurentPoly(ring, 1, {(rng.randint(0, 4),): rng.randint(-20, 20) for _ in range(3)}, caps)
        back = ci.nu_N(ci.nu_input_from_mu(ci.mu_M(f, "m", params)), params)
        if not back.factors[0].value.agrees_mod(f, params.N):
            bad = bad or it
    fun = all(ci.mu_functional_identity(params, k) for k in range(params.q))
    return [_ok("nu o mu round trip", bad is None, {"trial": bad}),
            _ok("x^(q-1-k) Hx^-(q-1) = Hx^-k", fun)]


def chi_xi0_battery(params: TruncationParams, ls=(0, 1, 2)) -> list:
    """xi0 against the chi intermediates recombined with the partition-of-unity weights."""
    ring = params.ring()
    caps = Caps.uniform(1, params.lo, params.hi, params.hi)
    w = ci.partition_weights(params)
    bad = None
    for l in ls:
        for P in (DiffOp.identity(ring, 1, caps, ("y'",)), DiffOp.d(ring, 1, 0, 1, caps, ("y'",))):
            x0 = ci.xi0(l, P, "m", params)
            # intermediates recompute the operator from chi independently
            terms = [(w[k], ci.xi0_intermediate(l, P, "m", k, params)) for k in range(params.q)]
            if not ci.recombine(terms, params.N).agrees(x0, params.N):
                bad = bad or {"l": l, "P": str(P)}
    one = LaurentPoly.constant(ring, 1, 1, caps, ("y",))
    c1 = ci.chi(one.scale(5), DiffOp.identity(ring, 1, caps, ("y'",)), 1, params)
    c2 = ci.chi(one, DiffOp.identity(ring, 1, caps, ("y'",)), 1, params)
    lin = c1.factors[1].value.agrees_mod(c2.factors[1].value.scale(5), params.N)
    return [_ok("chi/xi0 recombination", bad is None, bad), _ok("chi scalar linearity", lin)]


def scalar_identities(params: TruncationParams) -> list:
    ts = ci.ts_identity(params)
    bi = ci.binomial_identity(params)
    return [_ok(f"tS(1)=1 q={params.q}", ts.checks["tS(1)=1"], ts.witness),
            _ok(f"q^-1 sum (1-zeta)^k C(k+q-1,k) = 1, q={params.q}", ts.checks["closed_sum=1"]),
            _ok(f"binomial identity q={params.q}", bi.passed, bi.checks)]


def twist_battery(cases=((1, 2), (1, 3), (2, 2), (2, 3))) -> list:
    out = []
    for d, q in cases:
        rep = ci.frobenius_twist_ratio(d, q)
        out.append(_ok(f"twist ratio q^d, d={d} q={q}", rep.passed, rep.witness))
    psi = ci.FrobeniusScalar(Fraction(1), 3)
    out.append(_ok("twist(1, 1) = 1/3", ci.twist(psi, 1).value == Fraction(1, 3)))
    out.append(_ok("twist o twist = twist(d1+d2)", ci.twist(ci.twist(psi, 2), 3).value == ci.twist(psi, 5).value))
    I = [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]
    out.append(_ok("identical diagrams give n=1", ci.commute_up_to([I, I], [I, I]) == 1))
    Z = [[Fraction(0)] * 3 for _ in range(3)]
    try:
        ci.commute_up_to([Z], [Z])
        out.append(Check("zero maps are ambiguous", "fail"))
    except Ambiguous:
        out.append(Check("zero maps are ambiguous", "pass"))
    return out


def suite_canonical(params: TruncationParams) -> list:
    # the structured-element batteries need a window of a few q
    hi = max(12, 4 * params.q)
    small = params.replace(hi=min(params.hi, hi), lo=max(params.lo, -hi // 2), N=min(params.N, 8))
    return (_guarded("mu", mu_battery) + _guarded("mu/nu", mu_nu_battery, small, trials=5)
            + _guarded("chi/xi0", chi_xi0_battery, small, ls=(0, 1))
            + _guarded("scalar identities", scalar_identities, params) + _guarded("twist", twist_battery))


# --------------------------------------------------------------------------
# division and Fourier


def division_battery(params: TruncationParams, trials: int = 200, levels=(0, 1, 2)) -> list:
    rng = random.Random(params.seed)
    bad_exact = bad_cert = bad_closed = None
    for it in range(trials):
        m = levels[it % len(levels)]
        P = wd.random_global(params, rng, member_level=m)
        div = wd.divide_dirac(P, m)
        if not (wd.division_exact(P, div) and div.R.in_B2()):
            bad_exact = bad_exact or {"trial": it}
        if not (P.gauge(m).member and div.certified):
            bad_cert = bad_cert or {"trial": it, "after": [g.to_json() for g in div.gauge_after]}
        if it % 10 == 0:
            Q2, R2 = wd.divide_closed(P, m)
            if not (Q2.op == div.Q.op.with_caps(Q2.op.caps) and R2.op == div.R.op.with_caps(R2.op.caps)):
                bad_closed = bad_closed or {"trial": it}
    return [_ok("P = Q D + R exact, R x-free", bad_exact is None, bad_exact),
            _ok("level jump m -> m+2 certified", bad_cert is None, bad_cert),
            _ok("closed formula = iterative division", bad_closed is None, bad_closed)]


def kernel_battery(params: TruncationParams, trials: int = 100) -> list:
    rng = random.Random(params.seed + 1)
    ring = params.ring()
    caps = Caps.uniform(2, 0, 8, 12)
    zero = wd.DaggerElt(DiffOp(ring, 2, {}, caps, ("x", "y")))
    one = wd.DaggerElt(DiffOp.identity(ring, 2, caps, ("x", "y")))
    bad = None
    for it in range(trials):
        if not wd.kernel_test(wd.random_global(params, rng, terms=3)).passed:
            bad = bad or it
    return [_ok("kernel: Q=0", wd.kernel_test(zero).passed),
            _ok("kernel: Q=1", wd.kernel_test(one).passed),
            _ok("kernel: random Q", bad is None, {"trial": bad})]


def c_bound_battery(lmax: int = 200, primes=(2, 3), levels=(0, 1, 2)) -> list:
    out = []
    ring_checks = True
    for p in primes:
        for m in levels:
            rep = wd.c_valuation_grid(lmax, p, m)
            out.append(_ok(f"c_l(r,s) bound p={p} m={m} l<={lmax}", rep.passed, rep.witness))
            ring_checks &= wd.check_c_bound(12, p, m).passed
    out.append(_ok("c_l(r,s) bound via scalar valuations, l<=12", ring_checks))
    return out


def chart_battery(params: TruncationParams, trials: int = 10) -> list:
    rng = random.Random(params.seed + 2)
    ring = params.ring()
    caps = Caps.uniform(2, -10, 10, 12)
    out = []
    for chart in ("u1v0", "u1v1"):
        out.append(_ok(f"{chart}: x(-x'dy+pi) = -dy+pi x", wd.ideal_identity(ring, caps, chart)))
        bad = None
        for it in range(trials):
            P = wd.random_global(params, rng, terms=3, amax=2, bmax=2)
            Pc = wd.to_chart(P, chart)
            Q, R = wd.divide_chart(Pc)
            if not (wd.chart_division_exact(Pc, Q, R) and wd.in_infinity_prime(R)
                    and wd.conditional_membership(Q)):
                bad = bad or it
        out.append(_ok(f"{chart}: chart division exact", bad is None, {"trial": bad}))
        # transport: dividing x globally then charting matches dividing x' ^ -1
        x = wd.DaggerElt(DiffOp.x(ring, 2, 0, 1, Caps.uniform(2, 0, 6, 8), ("x", "y")))
        div = wd.divide_dirac(x)
        Qc, Rc = wd.divide_chart(wd.to_chart(x, chart))
        Qt = wd.to_chart(div.Q, chart)
        xs = DiffOp.x(ring, 2, 0, -1, Qt.op.caps, ("x'", "t"))
        same = (op_mul(Qt.op, xs) == Qc.op.with_caps(Qt.op.caps.join(Qc.op.caps))
                and wd.to_chart(div.R, chart).op == Rc.op.with_caps(Rc.op.caps.join(wd.to_chart(div.R, chart).op.caps)))
        out.append(_ok(f"{chart}: chart transport matches global division", same))
    bad = None
    for it in range(trials):
        A = wd.random_global(params, rng, terms=2, amax=2, bmax=2)
        B = wd.random_global(params, rng, terms=2, amax=2, bmax=2)
        lhs = wd.to_chart(wd.DaggerElt(op_mul(A.op, B.op)), "u1v1")
        rhs = op_mul(wd.to_chart(A, "u1v1").op, wd.to_chart(B, "u1v1").op)
        if lhs.op != rhs.with_caps(lhs.op.caps.join(rhs.caps)):
            bad = bad or it
    out.append(_ok("chart transport is multiplicative", bad is None, {"trial": bad}))
    return out


def fourier_battery(params: TruncationParams, trials: int = 100) -> list:
    rng = random.Random(params.seed + 3)
    ring = params.ring()
    caps = Caps.uniform(2, 0, 12, 16)
    names = ("x", "y")
    g = wd._gens(ring, caps)
    one = wd.DaggerElt(g["one"])
    red1 = wd.fourier_reduce(one)
    out = [_ok("reduce(1) = 1", red1 == DiffOp.identity(ring, 1, red1.caps, ("y",)))]
    bad_dx = bad_D = bad_rel = None
    D = wd.dirac(ring, caps)
    for it in range(trials):
        P = wd.random_global(params, rng, terms=3, amax=3, bmax=2)
        Pw = P.op.with_caps(caps)
        if not wd.fourier_reduce(wd.DaggerElt(op_mul(g["dx"], Pw))).is_zero():
            bad_dx = bad_dx or it
        if not wd.fourier_reduce(wd.DaggerElt(op_mul(Pw, D))).is_zero():
            bad_D = bad_D or it
        lhs = wd.fourier_reduce(wd.DaggerElt(op_mul(Pw, g["x"].scale(ring.pi()))))
        rhs = wd.fourier_reduce(wd.DaggerElt(op_mul(Pw, g["dy"])))
        if lhs != rhs.with_caps(lhs.caps.join(rhs.caps)):
            bad_rel = bad_rel or it
    out += [_ok("reduce kills d_x A2", bad_dx is None, {"trial": bad_dx}),
            _ok("reduce kills A2 D", bad_D is None, {"trial": bad_D}),
            _ok("reduce(P pi x) = reduce(P d_y)", bad_rel is None, {"trial": bad_rel})]
    rk = wd.fourier_rank(params)
    out.append(_ok("reduction has full rank on the window", rk.passed, rk.witness))
    bad = None
    for it in range(20):
        P = wd.random_global(params, rng, terms=2, amax=2, bmax=2)
        if not wd.epsilon_prime(wd.kpi_differential(P)).op.is_zero():
            bad = bad or it
    out.append(_ok("eps' o d = 0 on K_pi", bad is None, {"trial": bad}))
    ed = wd.epsilon_prime(wd.DaggerElt(g["dy"]))
    out.append(_ok("eps'(dy) = -pi x", ed.op == g["x"].scale(-ring.pi()).with_caps(ed.op.caps)))
    return out


def left_relation_witness(params: TruncationParams) -> dict:
    """reduce(pi x P) vs reduce(d_y P) for P = d_x: the left-multiplication form fails."""
    ring = params.ring()
    caps = Caps.uniform(2, 0, 8, 10)
    g = wd._gens(ring, caps)
    lhs = wd.fourier_reduce(wd.DaggerElt(op_mul(g["x"].scale(ring.pi()), g["dx"])))
    rhs = wd.fourier_reduce(wd.DaggerElt(op_mul(g["dy"], g["dx"])))
    return {"P": "dx", "reduce(pi x P)": repr(lhs), "reduce(dy P)": repr(rhs), "equal": lhs == rhs}


def suite_division(params: TruncationParams) -> list:
    return (_guarded("division", division_battery, params, trials=30)
            + _guarded("kernel", kernel_battery, params, trials=20)
            + _guarded("c bound", c_bound_battery, lmax=60) + _guarded("charts", chart_battery, params, trials=3))


def suite_fourier(params: TruncationParams) -> list:
    return _guarded("fourier", fourier_battery, params, trials=20)


SUITES = {
    "dwork": suite_dwork,
    "division": suite_division,
    "koszul": suite_koszul,
    "canonical": suite_canonical,
    "estimates": suite_estimates,
    "fourier": suite_fourier,
}


def run_suite(name: str, params: TruncationParams) -> SuiteReport:
    if name != "all" and name not in SUITES:
        raise DomainError(f"unknown suite {name!r}")
    names = sorted(SUITES) if name == "all" else [name]
    start = time.perf_counter()
    checks = []
    for n in names:
        try:
            got = SUITES[n](params)
        except DworkAlgError as exc:
            got = [Check("error", "fail", {"error": type(exc).__name__, "message": str(exc)})]
        if name == "all":
            got = [Check(f"{n}: {c.name}", c.status, c.witness) for c in got]
        checks.extend(got)
    return SuiteReport(name, params, checks, time.perf_counter() - start)
