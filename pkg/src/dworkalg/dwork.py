"""Dwork operators, Frobenius descent and the Taylor isomorphism.

All operators are truncations.  The Dwork operators are materialized to
order ``max(K, hi)`` so that their action on the monomials x^j, 0 <= j <= hi,
is the exact binomial-theorem sum; below that order the identities on the
window would only hold up to the tail valuation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import DomainError, Overflow
from .operator_algebra import Caps, DiffOp, LaurentPoly, apply, op_mul
from .padic_core import (PadicRing, PadicScalar, TruncationParams, binom, q_km, roots_of_unity)


# --------------------------------------------------------------------------
# Frobenius lift


@dataclass(frozen=True)
class FrobeniusLift:
    """The coordinate lift y_i -> x_i^q."""

    dim: int
    q: int

    @classmethod
    def from_params(cls, params: TruncationParams, dim: int = 1) -> "FrobeniusLift":
        return cls(dim, params.q)

    def pullback(self, g: LaurentPoly, caps: Caps | None = None) -> LaurentPoly:
        return frobenius_pullback(self, g, caps)


def frobenius_pullback(F: FrobeniusLift, g: LaurentPoly, caps: Caps | None = None) -> LaurentPoly:
    """Substitute y_i -> x_i^q; Overflow if the dilated exponents leave ``caps``."""
    if g.dim != F.dim:
        raise DomainError("lift and polynomial dimensions differ")
    if caps is None:
        caps = Caps(tuple(F.q * l for l in g.caps.lo), tuple(F.q * h for h in g.caps.hi), g.caps.order)
    names = tuple(n.replace("y", "x") for n in g.names)
    terms = {tuple(F.q * e for e in a): c for a, c in g.terms.items()}
    return LaurentPoly(g.ring, g.dim, terms, caps, names, g.floor)


# --------------------------------------------------------------------------
# one-variable building blocks


def _window_caps(params: TruncationParams, dim: int, order: int | None = None) -> Caps:
    order = materialized_order(params) if order is None else order
    return Caps.uniform(dim, params.lo, max(params.hi, order), order)


def materialized_order(params: TruncationParams) -> int:
    return max(params.order, params.hi)


@lru_cache(maxsize=256)
def _dual_coeffs(p: int, N: int, q: int, k: int, order: int) -> tuple:
    """d_b = q^-1 sum_zeta zeta^-k (zeta - 1)^b for b = 0..order."""
    from .padic_core import padic_ring

    ring = padic_ring(p, N)
    roots = roots_of_unity(q, ring)
    qinv = ring(Fraction(1, q))
    out = []
    pows = [z ** (-k) if k else ring.one() for z in roots]
    steps = [z - 1 for z in roots]
    for _ in range(order + 1):
        s = ring.zero()
        for w in pows:
            s = s + w
        out.append(s * qinv)
        pows = [w * t for w, t in zip(pows, steps)]
    return tuple(out)


def _tensor(ring: PadicRing, factors: Sequence[Sequence[tuple]], caps: Caps, names=None,
            left_shift: Sequence[int] | None = None) -> DiffOp:
    """Product of commuting one-variable operators given as (a, b, coeff) lists."""
    dim = len(factors)
    shift = left_shift or (0,) * dim
    terms = {}
    for combo in itertools.product(*factors):
        a = tuple(t[0] + s for t, s in zip(combo, shift))
        b = tuple(t[1] for t in combo)
        c = combo[0][2]
        for t in combo[1:]:
            c = c * t[2]
        terms[(a, b)] = c
    return DiffOp(ring, dim, terms, caps, names)


def _dual_1d(params: TruncationParams, k: int, order: int) -> list:
    if not 0 <= k < params.q:
        raise DomainError(f"dual index {k} outside [0, {params.q})")
    ring = params.ring()
    coeffs = _dual_coeffs(ring.p, ring.N, params.q, k, order)
    return [(b - k, b, coeffs[b]) for b in range(k, order + 1) if not coeffs[b].is_zero()]


def dwork_H(i: int | None, params: TruncationParams, dim: int = 1) -> DiffOp:
    """H_i = q^-1 sum_zeta sum_k (zeta-1)^k x_i^k d_i^[k]; ``i=None`` gives H = prod H_i."""
    return dwork_dual((0,) * dim, params, variables=None if i is None else (i,))


def dwork_dual(k, params: TruncationParams, dim: int | None = None,
               variables: Sequence[int] | None = None) -> DiffOp:
    """The operator Hx^-k acting by x^j -> x^(j-k) if j = k mod q, else 0.

    ``variables`` restricts the Dwork factors to a subset of coordinates (the
    others get the identity).
    """
    k = (k,) if isinstance(k, int) else tuple(k)
    dim = len(k) if dim is None else dim
    if len(k) != dim:
        raise DomainError("multi-index length does not match dimension")
    order = materialized_order(params)
    ring = params.ring()
    one = [(0, 0, ring.one())]
    factors = []
    for i in range(dim):
        if variables is None or i in variables:
            factors.append(_dual_1d(params, k[i], order))
        elif k[i]:
            raise DomainError("nonzero dual index on a variable without a Dwork factor")
        else:
            factors.append(one)
    return _tensor(ring, factors, _window_caps(params, dim, order))


def dual_monomial_action(j: int, k: int, params: TruncationParams) -> PadicScalar:
    """Oracle: q^-1 sum_zeta zeta^(j-k), the eigenvalue of Hx^-k on x^j."""
    ring = params.ring()
    s = ring.zero()
    for z in roots_of_unity(params.q, ring):
        s = s + z ** (j - k)
    return s / params.q


@dataclass
class Report:
    passed: bool
    checks: dict = field(default_factory=dict)
    witness: dict | None = None

    def __bool__(self):
        return self.passed


def _window_monomials(params: TruncationParams, dim: int, lo: int = 0):
    return itertools.product(range(lo, params.hi + 1), repeat=dim)


def partition_of_unity(params: TruncationParams, dim: int = 1) -> Report:
    """Check sum_k x^k Hx^-k = 1 on every window monomial with exponents in [0, hi]."""
    ring = params.ring()
    q = params.q
    caps = _window_caps(params, dim)
    duals = {k: dwork_dual(k, params, dim) for k in itertools.product(range(q), repeat=dim)}
    for j in _window_monomials(params, dim):
        mono = LaurentPoly.monomial(ring, j, 1, caps)
        total = LaurentPoly(ring, dim, {}, caps)
        for k, Hk in duals.items():
            total = total + LaurentPoly.monomial(ring, k, 1, caps) * apply(Hk, mono)
        if not total.agrees_mod(mono, params.N):
            return Report(False, {"partition_of_unity": False}, {"monomial": list(j)})
    return Report(True, {"partition_of_unity": True})


def H_squared_normal_form(params: TruncationParams, dim: int = 1, order: int | None = None) -> tuple:
    """(H*H truncated, H truncated) at ``order``; terms of H*H of order <= T
    only involve factors of order <= T, so the truncation is exact."""
    T = params.order if order is None else order
    H = dwork_H(None, params, dim).truncated(T)
    H = H.with_caps(H.caps.widen(hi=max(H.caps.hi) + T, order=2 * T))
    return op_mul(H, H).truncated(T), H


# --------------------------------------------------------------------------
# transfer


def _transfer_1d(b: int, q: int, order: int, mode: str) -> list:
    """Integer coefficients e_c (c >= q*b) with sum_c e_c C(n, c) = g(n) for 0 <= n <= order.

    descent: g(n) = C(floor(n/q), b); literal: g(n) = [q | n] C(n/q, b).
    """
    return list(_transfer_coeffs(b, q, order, mode))


@lru_cache(maxsize=4096)
def _transfer_coeffs(b: int, q: int, order: int, mode: str) -> tuple:
    if mode == "descent":
        g = [binom(n // q, b) for n in range(order + 1)]
    elif mode == "literal":
        g = [binom(n // q, b) if n % q == 0 else 0 for n in range(order + 1)]
    else:
        raise DomainError(f"unknown transfer mode {mode!r}")
    out = []
    # Newton forward differences at 0: e_c = sum_i (-1)^(c-i) C(c, i) g(i)
    row = g[:]
    for c in range(order + 1):
        out.append(row[0])
        row = [row[i + 1] - row[i] for i in range(len(row) - 1)]
    return tuple(out)


def transfer(P: DiffOp, params: TruncationParams, mode: str = "descent",
             caps: Caps | None = None) -> DiffOp:
    """P = sum f[a, b] y^a d'^[b]  ->  P° = sum f[a, b] x^(q a) ((d')°)^[b].

    ((d')°)^[b] is materialized from its action on monomials by a
    triangular solve.  ``descent`` acts as P on each x^k F*(O) summand (a
    ring homomorphism); ``literal`` is the monomial action
    x^j -> (j/q) x^(j-q) on q | j and 0 otherwise, extended by powers.
    """
    q = params.q
    dim = P.dim
    if caps is None:
        order = materialized_order(params)
        amax = max((max(a) for a, _ in P.terms), default=0)
        amin = min((min(a) for a, _ in P.terms), default=0)
        caps = Caps.uniform(dim, min(params.lo, q * amin), max(params.hi, order + q * max(amax, 0)), order)
    order = caps.order[0]
    ring = P.ring
    terms: dict = {}
    for (a, b), c in P.terms.items():
        per = []
        for i in range(dim):
            coeffs = _transfer_coeffs(b[i], q, order, mode)
            per.append([(cc - q * b[i] + q * a[i], cc, e) for cc, e in enumerate(coeffs) if e])
        for combo in itertools.product(*per):
            n = 1
            for t in combo:
                n *= t[2]
            key = (tuple(t[0] for t in combo), tuple(t[1] for t in combo))
            v = c._mul_int(n)
            terms[key] = terms[key] + v if key in terms else v
    names = tuple(n.replace("y", "x") for n in P.names)
    return DiffOp(ring, dim, terms, caps, names, P.floor)


def symbolic_dprime(params: TruncationParams) -> DiffOp:
    """(q x^(q-1))^-1 d H in one variable, built by composition."""
    ring = params.ring()
    order = materialized_order(params)
    caps = Caps.uniform(1, params.lo - params.q, params.hi, order + 1)
    H = dwork_H(0, params).with_caps(caps)
    dH = op_mul(DiffOp.d(ring, 1, 0, 1, caps), H)
    left = DiffOp(ring, 1, {((1 - params.q,), (0,)): Fraction(1, params.q)}, caps)
    return op_mul(left, dH)


def garnier_iso(f: LaurentPoly, P: DiffOp, k, params: TruncationParams) -> DiffOp:
    """f * P° * Hx^-k in normal form."""
    k = (k,) if isinstance(k, int) else tuple(k)
    Pc = transfer(P, params)
    Hk = dwork_dual(k, params, P.dim)
    return op_mul(op_mul(DiffOp.from_poly(f.with_caps(Pc.caps)), Pc), Hk)


# --------------------------------------------------------------------------
# Taylor isomorphism


@dataclass
class TaylorElt:
    """sum_k coeff[k] (x) d^<k>_(m), coefficients are functions on the source."""

    coeffs: dict
    m: int
    order: int
    p: int

    def evaluate(self, g: LaurentPoly, f: Sequence[LaurentPoly]) -> LaurentPoly:
        """sum_k coeff[k] * f^*(d^<k>_(m) g)."""
        ring = g.ring
        total = None
        for k, ck in self.coeffs.items():
            scale = 1
            for ki in k:
                scale *= _qfact(ki, self.p, self.m)
            dk = DiffOp(ring, g.dim, {((0,) * g.dim, k): scale}, g.caps.widen(order=self.order))
            h = apply(dk, g)
            if h.is_zero():
                continue
            term = ck * h.substitute(list(f))
            total = term if total is None else total + term
        return total if total is not None else LaurentPoly(ring, f[0].dim, {}, f[0].caps, f[0].names)

    def compose(self, other: "TaylorElt") -> "TaylorElt":
        """Product in O (x) D with d^<k> d^<l> = <k+l, k> d^<k+l>, truncated at ``order``."""
        if (self.m, self.order, self.p) != (other.m, other.order, other.p):
            raise DomainError("incompatible Taylor elements")
        out: dict = {}
        for k, a in self.coeffs.items():
            for l, b in other.coeffs.items():
                n = tuple(x + y for x, y in zip(k, l))
                if any(v > self.order for v in n):
                    continue
                mult = Fraction(1)
                for ki, li in zip(k, l):
                    mult *= Fraction(_qfact(ki, self.p, self.m) * _qfact(li, self.p, self.m)
                                     * binom(ki + li, ki), _qfact(ki + li, self.p, self.m))
                if mult.denominator % self.p == 0:
                    raise AssertionError("level-m binomial is not p-integral")
                t = (a * b).scale(mult)
                out[n] = out[n] + t if n in out else t
        return TaylorElt(out, self.m, self.order, self.p)

    def agrees_mod(self, other: "TaylorElt", n_p: int) -> bool:
        keys = set(self.coeffs) | set(other.coeffs)
        for k in keys:
            a, b = self.coeffs.get(k), other.coeffs.get(k)
            if a is None:
                a, b = b, a
            if b is None:
                if not a.agrees_mod(a - a, n_p):
                    return False
            elif not a.agrees_mod(b, n_p):
                return False
        return True

    def is_identity_mod(self, n_p: int) -> bool:
        for k, c in self.coeffs.items():
            if any(k):
                if not c.agrees_mod(c - c, n_p):
                    return False
            elif not c.agrees_mod(LaurentPoly.constant(c.ring, c.dim, 1, c.caps, c.names), n_p):
                return False
        return True


def _qfact(k: int, p: int, m: int) -> int:
    from math import factorial
    return factorial(q_km(k, p, m))


def _ramification(polys: Sequence[LaurentPoly]) -> int:
    """1 when every coefficient lies in Z_p, else p - 1."""
    for f in polys:
        for c in f.terms.values():
            if not c.in_zp():
                return f.ring.e
    return 1


def taylor(f: Sequence[LaurentPoly], f2: Sequence[LaurentPoly], m: int, order: int) -> TaylorElt:
    """Taylor element for two congruent morphisms with coordinates f, f2."""
    if len(f) != len(f2) or not f:
        raise DomainError("coordinate sequences must have equal positive length")
    p = f[0].ring.p
    e = _ramification(list(f) + list(f2))
    if not Fraction(p**m) > Fraction(e, p - 1):
        raise DomainError(f"need p^m > e/(p-1); got p={p}, m={m}, e={e}")
    deltas = [b - a for a, b in zip(f, f2)]
    ring_e = f[0].ring.e
    for dl in deltas:
        if dl.floor < ring_e or any(c.v < ring_e for c in dl.terms.values()):
            raise DomainError("the two morphisms are not congruent mod p")
    d = len(deltas)
    one = LaurentPoly.constant(f[0].ring, f[0].dim, 1, f[0].caps, f[0].names)
    powers = []
    for dl in deltas:
        row = [one]
        for _ in range(order):
            row.append(row[-1] * dl)
        powers.append(row)
    coeffs = {}
    for k in itertools.product(range(order + 1), repeat=d):
        c = one
        scale = 1
        for i, ki in enumerate(k):
            c = c * powers[i][ki]
            scale *= _qfact(ki, p, m)
        c = c.scale(Fraction(1, scale)) if scale != 1 else c
        if not c.is_zero():
            coeffs[k] = c
    return TaylorElt(coeffs, m, order, p)
