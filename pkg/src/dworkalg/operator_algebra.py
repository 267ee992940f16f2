"""Truncated Laurent polynomials and divided-power differential operators.

Operators are stored in left normal form ``sum c[a, b] x^a d^[b]`` (all
x-powers to the left of all divided powers d^[b] = d^b / b!).  Level-m data
d^<k>_(m) = q_k^(m)! d^[k] are conversions of that single storage basis.

Both containers carry a ``floor``: a lower bound (in pi-adic digits) on the
absolute precision of coefficients that were pruned as zero, or that are
only known up to that precision because an operand had pruned terms.
Exactness claims mod p^N must consult it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping

from .errors import DomainError, Overflow
from .padic_core import INF, PadicRing, PadicScalar, binom, nu_m, vp_factorial

DEFAULT_NAMES = {1: ("x",), 2: ("x", "y")}


def default_names(d: int) -> tuple:
    return DEFAULT_NAMES.get(d, tuple(f"x{i + 1}" for i in range(d)))


@dataclass(frozen=True)
class Caps:
    """Exponent window [lo, hi] and divided-power order cap, per variable."""

    lo: tuple
    hi: tuple
    order: tuple

    @classmethod
    def uniform(cls, d: int, lo: int, hi: int, order: int) -> "Caps":
        return cls((lo,) * d, (hi,) * d, (order,) * d)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def join(self, other: "Caps") -> "Caps":
        if other is None or other is self:
            return self
        return Caps(tuple(map(min, self.lo, other.lo)), tuple(map(max, self.hi, other.hi)),
                    tuple(map(max, self.order, other.order)))

    def widen(self, lo=None, hi=None, order=None) -> "Caps":
        d = self.dim
        return Caps(self.lo if lo is None else (lo,) * d, self.hi if hi is None else (hi,) * d,
                    self.order if order is None else (order,) * d)

    def fits_exp(self, a) -> bool:
        return all(l <= x <= h for l, x, h in zip(self.lo, a, self.hi))

    def fits_order(self, b) -> bool:
        return all(x <= h for x, h in zip(b, self.order))


def _min_val(terms: Mapping) -> int:
    return min((c.v for c in terms.values()), default=INF)


def _prune(acc: dict) -> tuple:
    """Drop zero coefficients; return (terms, floor of dropped precision)."""
    out = {}
    floor = INF
    for k, c in acc.items():
        if c.u is None:
            if c.v < floor:
                floor = c.v
        else:
            out[k] = c
    return out, floor


def _combine_floor(fa, va, fb, vb):
    """Precision floor of a bilinear combination of two operands."""
    f = INF
    if fa < INF // 2:
        f = min(f, fa + (vb if vb < INF // 2 else 0))
    if fb < INF // 2:
        f = min(f, fb + (va if va < INF // 2 else 0))
    return f


# --------------------------------------------------------------------------
# Laurent polynomials


class LaurentPoly:
    __slots__ = ("ring", "dim", "terms", "caps", "names", "floor")

    def __init__(self, ring: PadicRing, dim: int, terms: Mapping | None = None,
                 caps: Caps | None = None, names: tuple | None = None, floor: int = INF,
                 check: bool = True):
        self.ring = ring
        self.dim = dim
        self.caps = caps or Caps.uniform(dim, -64, 64, 64)
        self.names = names or default_names(dim)
        acc = {}
        for a, c in (terms or {}).items():
            a = tuple(a)
            if len(a) != dim:
                raise DomainError("exponent length does not match dimension")
            acc[a] = ring(c)
        self.terms, pruned = _prune(acc)
        self.floor = min(floor, pruned)
        if check:
            for a in self.terms:
                if not self.caps.fits_exp(a):
                    raise Overflow(f"exponent {a} outside window")

    @classmethod
    def monomial(cls, ring, a, coeff=1, caps=None, names=None) -> "LaurentPoly":
        a = tuple(a)
        return cls(ring, len(a), {a: coeff}, caps, names)

    @classmethod
    def constant(cls, ring, dim, c=1, caps=None, names=None) -> "LaurentPoly":
        return cls(ring, dim, {(0,) * dim: c}, caps, names)

    def _new(self, terms, floor=INF, caps=None):
        return LaurentPoly(self.ring, self.dim, terms, caps or self.caps, self.names, floor)

    def with_caps(self, caps: Caps) -> "LaurentPoly":
        return LaurentPoly(self.ring, self.dim, self.terms, caps, self.names, self.floor)

    def is_zero(self) -> bool:
        return not self.terms

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def coeff(self, a) -> PadicScalar:
        return self.terms.get(tuple(a), self.ring.zero())

    def __add__(self, other):
        other = self._coerce(other)
        acc = dict(self.terms)
        for a, c in other.terms.items():
            acc[a] = acc[a] + c if a in acc else c
        return self._new(acc, min(self.floor, other.floor), self.caps.join(other.caps))

    __radd__ = __add__

    def __neg__(self):
        return self._new({a: -c for a, c in self.terms.items()}, self.floor)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            if other.dim != self.dim:
                raise DomainError("dimension mismatch")
            return other
        if isinstance(other, (int, Fraction, PadicScalar)):
            return LaurentPoly.constant(self.ring, self.dim, other, self.caps, self.names)
        raise TypeError(f"cannot combine LaurentPoly with {type(other).__name__}")

    def scale(self, c) -> "LaurentPoly":
        c = self.ring(c)
        f = self.floor + c.v if self.floor < INF // 2 else INF
        return self._new({a: x * c for a, x in self.terms.items()}, f)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, PadicScalar)):
            return self.scale(other)
        other = self._coerce(other)
        caps = self.caps.join(other.caps)
        acc = {}
        for a, c in self.terms.items():
            for b, d in other.terms.items():
                k = tuple(x + y for x, y in zip(a, b))
                t = c * d
                acc[k] = acc[k] + t if k in acc else t
        floor = _combine_floor(self.floor, _min_val(self.terms), other.floor, _min_val(other.terms))
        return self._new(acc, floor, caps)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = LaurentPoly.constant(self.ring, self.dim, 1, self.caps, self.names)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            d = self - other
        except (TypeError, DomainError):
            return False
        return d.is_zero()

    __hash__ = None

    def agrees_mod(self, other, n_p: int) -> bool:
        d = self - other
        need = n_p * self.ring.e
        return d.floor >= need and all(c.v >= need for c in d.terms.values())

    def substitute(self, images: list) -> "LaurentPoly":
        """Ring map sending variable i to images[i] (LaurentPolys)."""
        if len(images) != self.dim:
            raise DomainError("need one image per variable")
        tgt = images[0]
        out = LaurentPoly(self.ring, tgt.dim, {}, tgt.caps, tgt.names)
        for a, c in self.terms.items():
            mono = LaurentPoly.constant(self.ring, tgt.dim, c, tgt.caps, tgt.names)
            for img, e in zip(images, a):
                if e < 0:
                    raise DomainError("substitution of negative exponents needs inverses")
                mono = mono * (img ** e)
            out = out + mono
        return out

    def to_json(self) -> list:
        return [{"a": list(a), "c": c.to_json()} for a, c in self]

    def __repr__(self):
        return format_terms([(a, None, c) for a, c in self], self.names)


# --------------------------------------------------------------------------
# operators


@lru_cache(maxsize=200_000)
def _commute_1d(b: int, a2: int, b2: int) -> tuple:
    """d^[b] x^a2 d^[b2] = sum_j coeff_j x^(a2-j) d^[b-j+b2]; returns ((j, coeff), ...)."""
    jmax = b if a2 < 0 else min(b, a2)
    out = []
    for j in range(jmax + 1):
        c = binom(a2, j) * binom(b - j + b2, b2)
        if c:
            out.append((j, c))
    return tuple(out)


class DiffOp:
    """Normal-form operator sum c[a, b] x^a d^[b] in ``dim`` variables."""

    __slots__ = ("ring", "dim", "terms", "caps", "names", "floor", "_by_order")

    def __init__(self, ring: PadicRing, dim: int, terms: Mapping | None = None,
                 caps: Caps | None = None, names: tuple | None = None, floor: int = INF,
                 check: bool = True):
        self.ring = ring
        self.dim = dim
        self._by_order = None
        self.caps = caps or Caps.uniform(dim, -64, 64, 64)
        self.names = names or default_names(dim)
        acc = {}
        for (a, b), c in (terms or {}).items():
            a, b = tuple(a), tuple(b)
            if len(a) != dim or len(b) != dim:
                raise DomainError("multi-index length does not match dimension")
            if any(x < 0 for x in b):
                raise DomainError("divided-power orders must be non-negative")
            key = (a, b)
            c = c if isinstance(c, PadicScalar) and c.ring is ring else ring(c)
            acc[key] = acc[key] + c if key in acc else c
        self.terms, pruned = _prune(acc)
        self.floor = min(floor, pruned)
        if check:
            self._check_caps()

    def _check_caps(self):
        for a, b in self.terms:
            if not self.caps.fits_exp(a):
                raise Overflow(f"exponent {a} outside window {self.caps.lo}..{self.caps.hi}")
            if not self.caps.fits_order(b):
                raise Overflow(f"order {b} exceeds cap {self.caps.order}")

    @classmethod
    def _raw(cls, ring, dim, terms, caps, names, floor):
        obj = object.__new__(cls)
        obj.ring, obj.dim, obj.caps, obj.names = ring, dim, caps, names
        obj._by_order = None
        obj.terms, pruned = _prune(terms)
        obj.floor = min(floor, pruned)
        obj._check_caps()
        return obj

    # -- constructors -----------------------------------------------------

    @classmethod
    def identity(cls, ring, dim, caps=None, names=None) -> "DiffOp":
        z = (0,) * dim
        return cls(ring, dim, {(z, z): 1}, caps, names)

    @classmethod
    def scalar(cls, ring, dim, c, caps=None, names=None) -> "DiffOp":
        z = (0,) * dim
        return cls(ring, dim, {(z, z): c}, caps, names)

    @classmethod
    def x(cls, ring, dim, i, power=1, caps=None, names=None) -> "DiffOp":
        a = [0] * dim
        a[i] = power
        return cls(ring, dim, {(tuple(a), (0,) * dim): 1}, caps, names)

    @classmethod
    def d(cls, ring, dim, i, k=1, caps=None, names=None) -> "DiffOp":
        """The divided power d_i^[k]."""
        b = [0] * dim
        b[i] = k
        return cls(ring, dim, {((0,) * dim, tuple(b)): 1}, caps, names)

    @classmethod
    def from_poly(cls, f: LaurentPoly) -> "DiffOp":
        z = (0,) * f.dim
        return cls(f.ring, f.dim, {(a, z): c for a, c in f.terms.items()}, f.caps, f.names, f.floor)

    def _new(self, terms, floor=INF, caps=None) -> "DiffOp":
        return DiffOp._raw(self.ring, self.dim, terms, caps or self.caps, self.names, floor)

    def with_caps(self, caps: Caps) -> "DiffOp":
        return DiffOp(self.ring, self.dim, self.terms, caps, self.names, self.floor)

    def renamed(self, names: tuple) -> "DiffOp":
        return DiffOp._raw(self.ring, self.dim, dict(self.terms), self.caps, tuple(names), self.floor)

    def truncated(self, order: int | Iterable[int]) -> "DiffOp":
        """Explicitly drop every term of order above ``order`` (per variable)."""
        cap = (order,) * self.dim if isinstance(order, int) else tuple(order)
        keep = {k: c for k, c in self.terms.items() if all(x <= h for x, h in zip(k[1], cap))}
        return self._new(keep, self.floor)

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def coeff(self, a, b) -> PadicScalar:
        return self.terms.get((tuple(a), tuple(b)), self.ring.zero())

    def max_order(self) -> int:
        return max((sum(b) for _, b in self.terms), default=0)

    def min_val(self) -> int:
        return _min_val(self.terms)

    def is_function(self) -> bool:
        return all(not any(b) for _, b in self.terms)

    def to_poly(self) -> LaurentPoly:
        if not self.is_function():
            raise DomainError("operator has derivative terms")
        return LaurentPoly(self.ring, self.dim, {a: c for (a, _), c in self.terms.items()},
                           self.caps, self.names, self.floor)

    # -- linear structure --------------------------------------------------

    def _coerce(self, other) -> "DiffOp":
        if isinstance(other, DiffOp):
            if other.dim != self.dim:
                raise DomainError("dimension mismatch")
            return other
        if isinstance(other, LaurentPoly):
            return DiffOp.from_poly(other)
        if isinstance(other, (int, Fraction, PadicScalar)):
            return DiffOp.scalar(self.ring, self.dim, other, self.caps, self.names)
        raise TypeError(f"cannot combine DiffOp with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc[k] + c if k in acc else c
        return self._new(acc, min(self.floor, other.floor), self.caps.join(other.caps))

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -c for k, c in self.terms.items()}, self.floor)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def scale(self, c) -> "DiffOp":
        c = self.ring(c)
        f = self.floor + c.v if self.floor < INF // 2 else INF
        return self._new({k: x * c for k, x in self.terms.items()}, f)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, PadicScalar)):
            return self.scale(other)
        return op_mul(self, self._coerce(other))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, PadicScalar)):
            return self.scale(other)
        return op_mul(self._coerce(other), self)

    def __pow__(self, n: int):
        out = DiffOp.identity(self.ring, self.dim, self.caps, self.names)
        for _ in range(n):
            out = op_mul(out, self)
        return out

    def __eq__(self, other):
        try:
            d = self - other
        except (TypeError, DomainError):
            return False
        return d.is_zero()

    __hash__ = None

    def agrees_mod(self, other, n_p: int) -> bool:
        """Coefficientwise agreement mod p^n_p, certified by tracked precision."""
        d = self - other
        need = n_p * self.ring.e
        return d.floor >= need and all(c.v >= need for c in d.terms.values())

    def __call__(self, f: LaurentPoly) -> LaurentPoly:
        return apply(self, f)

    def to_json(self) -> list:
        return [{"a": list(a), "b": list(b), "c": c.to_json()} for (a, b), c in self]

    def __repr__(self):
        return format_terms([(a, b, c) for (a, b), c in self], self.names)


def op_mul(P: DiffOp, Q: DiffOp) -> DiffOp:
    """Normal form of the composition P o Q."""
    if P.dim != Q.dim:
        raise DomainError("dimension mismatch")
    dim = P.dim
    caps = P.caps.join(Q.caps)
    acc: dict = {}
    qterms = list(Q.terms.items())
    for (a, b), c in P.terms.items():
        for (a2, b2), c2 in qterms:
            cc = c * c2
            per_var = [_commute_1d(b[i], a2[i], b2[i]) for i in range(dim)]
            if dim == 1:
                (lst,) = per_var
                a0, b0, x0, y0 = a[0], b[0], a2[0], b2[0]
                for j, n in lst:
                    key = ((a0 + x0 - j,), (b0 - j + y0,))
                    acc.setdefault(key, []).append((cc, n))
                continue
            for combo in itertools.product(*per_var):
                n = 1
                for _, ni in combo:
                    n *= ni
                key = (tuple(a[i] + a2[i] - combo[i][0] for i in range(dim)),
                       tuple(b[i] - combo[i][0] + b2[i] for i in range(dim)))
                acc.setdefault(key, []).append((cc, n))
    ring = P.ring
    terms = {k: ring.lin_comb(v) for k, v in acc.items()}
    floor = _combine_floor(P.floor, P.min_val(), Q.floor, Q.min_val())
    return DiffOp._raw(ring, dim, terms, caps, P.names, floor)


@lru_cache(maxsize=500_000)
def _binom_cached(n: int, k: int) -> int:
    return binom(n, k)


def apply(P: DiffOp, f: LaurentPoly) -> LaurentPoly:
    """Action d^[b](x^a) = C(a, b) x^(a-b), extended linearly."""
    if P.dim != f.dim:
        raise DomainError("dimension mismatch")
    acc: dict = {}
    if P._by_order is None:
        P._by_order = sorted(P.terms.items(), key=lambda t: max(t[0][1], default=0))
    pterms = P._by_order
    ring = f.ring
    for e, g in f.terms.items():
        emax = max(e, default=0) if min(e, default=0) >= 0 else None
        local: dict = {}
        for (a, b), c in pterms:
            if emax is not None and max(b, default=0) > emax:
                break
            n = 1
            for ei, bi in zip(e, b):
                if 0 <= ei < bi:
                    n = 0
                    break
                n *= _binom_cached(ei, bi)
            if not n:
                continue
            key = tuple(ai + ei - bi for ai, ei, bi in zip(a, e, b))
            local.setdefault(key, []).append((c, n))
        for key, items in local.items():
            acc.setdefault(key, []).append((ring.lin_comb(items) * g, 1))
    acc = {k: f.ring.lin_comb(v) for k, v in acc.items()}
    floor = _combine_floor(P.floor, P.min_val(), f.floor, _min_val(f.terms))
    terms, pruned = _prune(acc)
    return LaurentPoly(f.ring, f.dim, terms, f.caps, f.names, min(floor, pruned))


# --------------------------------------------------------------------------
# level conversions, transposition, gauges


def qfact_int(k: int, p: int, m: int) -> int:
    from math import factorial
    return factorial(k // p**m)


def to_level(P: DiffOp, m: int) -> dict:
    """Coefficients relative to d^<b>_(m): c[a, b] / prod q_{b_i}^(m)!."""
    p = P.ring.p
    out = {}
    for (a, b), c in P.terms.items():
        scale = 1
        for bi in b:
            scale *= qfact_int(bi, p, m)
        out[(a, b)] = c / scale if scale != 1 else c
    return out


def from_level(ring: PadicRing, dim: int, coeffs: Mapping, m: int, caps=None, names=None) -> DiffOp:
    """Inverse of to_level."""
    p = ring.p
    terms = {}
    for (a, b), c in coeffs.items():
        scale = 1
        for bi in b:
            scale *= qfact_int(bi, p, m)
        terms[(tuple(a), tuple(b))] = ring(c) * scale
    return DiffOp(ring, dim, terms, caps, names)


def transpose(P: DiffOp) -> DiffOp:
    """Formal adjoint: x -> x, d^[k] -> (-1)^|k| d^[k], reversing products."""
    dim = P.dim
    out = DiffOp(P.ring, dim, {}, P.caps, P.names)
    zero = (0,) * dim
    acc: dict = {}
    for (a, b), c in P.terms.items():
        # (c x^a d^[b])^t = (-1)^|b| d^[b] x^a
        sign = -1 if sum(b) % 2 else 1
        left = DiffOp._raw(P.ring, dim, {(zero, b): P.ring(sign)}, P.caps, P.names, INF)
        right = DiffOp._raw(P.ring, dim, {(a, zero): c}, P.caps, P.names, INF)
        for k, v in op_mul(left, right).terms.items():
            acc[k] = acc[k] + v if k in acc else v
    out = DiffOp._raw(P.ring, dim, acc, P.caps, P.names, P.floor)
    return out


@dataclass(frozen=True)
class GaugeReport:
    level: int
    slack: Fraction | None  # None for the zero operator
    member: bool
    offending: tuple | None = None
    mode: str = "overconvergent-infinity"
    basis: str = "divided"

    def to_json(self) -> dict:
        return {"level": self.level, "slack": None if self.slack is None else str(self.slack),
                "member": self.member, "offending": self.offending, "mode": self.mode,
                "basis": self.basis}


GAUGE_MODES = ("overconvergent-infinity", "pole-divisor")


def gauge(P: DiffOp, m: int, mode: str = "overconvergent-infinity", basis: str = "divided",
          variables: Iterable[int] | None = None, forbid: Iterable[int] = ()) -> GaugeReport:
    """Minimal slack v_p(coefficient) - nu_m(exponent data) over the terms.

    ``mode`` chooses the exponent data: positive x-exponents (growth at
    infinity) or negative exponents read as pole orders.  ``basis`` is
    ``divided`` for the stored d^[k] coefficients or ``level`` for
    coefficients relative to d^<k>_(m).  ``variables`` restricts which exponents feed
    nu_m; a term with a nonzero exponent in a ``forbid`` variable is a
    non-member outright.
    """
    if mode not in GAUGE_MODES:
        raise DomainError(f"unknown gauge mode {mode!r}")
    if basis not in ("level", "divided"):
        raise DomainError(f"unknown basis {basis!r}")
    p, e = P.ring.p, P.ring.e
    idx = list(range(P.dim)) if variables is None else list(variables)
    forbid = tuple(forbid)
    coeffs = to_level(P, m) if basis == "level" else P.terms
    best = None
    worst = None
    for key in sorted(coeffs):
        a, b = key
        if any(a[i] != 0 for i in forbid):
            return GaugeReport(m, None, False, (list(a), list(b)), mode, basis)
        c = coeffs[key]
        if mode == "overconvergent-infinity":
            data = [a[i] for i in idx if a[i] > 0]
        else:
            data = [-a[i] for i in idx if a[i] < 0]
        slack = Fraction(c.v, e) - sum(nu_m(l, p, m) for l in data)
        if best is None or slack < best:
            best = slack
            worst = key
    if best is None:
        return GaugeReport(m, None, True, None, mode, basis)
    member = best >= 0
    offending = None if member else (list(worst[0]), list(worst[1]))
    return GaugeReport(m, best, member, offending, mode, basis)


# --------------------------------------------------------------------------
# text form


def _mono(names, a, b) -> list:
    parts = []
    if a is not None:
        for n, e in zip(names, a):
            if e == 1:
                parts.append(n)
            elif e:
                parts.append(f"{n}^{e}")
    if b is not None:
        for n, k in zip(names, b):
            if k:
                parts.append(f"d{n}^[{k}]")
    return parts


def format_terms(items, names) -> str:
    """Canonical text: signed sum of coeff * monomial, sorted by (a, b)."""
    from .padic_core import format_scalar

    if not items:
        return "0"
    chunks = []
    for a, b, c in items:
        mono = _mono(names, a, b)
        terms = c.balanced_terms()
        body = format_scalar(c)
        sign = "+"
        if len(terms) == 1:
            n, k = terms[0]
            if n < 0:
                sign = "-"
                body = format_scalar(-c)
            if mono and body == "1":
                body = ""
        else:
            body = f"({body})"
        text = "*".join(([body] if body else []) + mono) or "1"
        chunks.append((sign, text))
    out = ("-" if chunks[0][0] == "-" else "") + chunks[0][1]
    for sign, text in chunks[1:]:
        out += f" {sign} {text}"
    return out
