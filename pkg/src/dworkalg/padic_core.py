"""Arithmetic in V = Z_p[pi]/(pi^(p-1) + p) and the valuation combinatorics.

Scalars use a capped relative precision model.  A nonzero element is stored
as ``pi^v * u`` where ``u = sum c_i pi^i`` (0 <= i < p-1) is a unit known
modulo ``pi^r``.  Negative ``v`` is allowed, so the fraction field K = V[1/p]
is available: dividing by ``p`` or ``pi`` never loses relative precision, only
cancellation in a sum does.  Every value knows its absolute precision
``v + r`` (in pi-adic digits), which is how precision loss is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import DomainError, NonUnit, PrecisionExhausted, Unsupported

# absolute precision used for exact zeros; anything above INF // 2 is "exact"
INF = 10**9


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def vp_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# --------------------------------------------------------------------------
# valuations


@dataclass(frozen=True)
class RationalValuation:
    """v_p of a scalar, stored as ``num / den`` with ``den = p - 1``.

    ``exhausted`` marks a value that is zero to the available precision; in
    that case ``num / den`` is only a lower bound.
    """

    num: int
    den: int
    exhausted: bool = False

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def infinite(self) -> bool:
        return self.num >= INF // 2

    def __float__(self) -> float:
        return math.inf if self.infinite else self.num / self.den

    def _cmp_key(self, other):
        if isinstance(other, RationalValuation):
            return other.value if not other.infinite else math.inf
        return Fraction(other) if not isinstance(other, float) else other

    def _key(self):
        return math.inf if self.infinite else self.value

    def __lt__(self, other):
        return self._key() < self._cmp_key(other)

    def __le__(self, other):
        return self._key() <= self._cmp_key(other)

    def __gt__(self, other):
        return self._key() > self._cmp_key(other)

    def __ge__(self, other):
        return self._key() >= self._cmp_key(other)

    def __eq__(self, other):
        if isinstance(other, RationalValuation):
            return (self._key(), self.exhausted) == (other._key(), other.exhausted)
        try:
            return not self.exhausted and self._key() == self._cmp_key(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self._key(), self.exhausted))

    def __add__(self, other: "RationalValuation") -> "RationalValuation":
        if self.den != other.den:
            raise ValueError("valuations over different rings")
        return RationalValuation(min(self.num + other.num, INF), self.den,
                                 self.exhausted or other.exhausted)

    def __repr__(self):
        if self.infinite:
            return "RationalValuation(inf)"
        tag = ", exhausted" if self.exhausted else ""
        return f"RationalValuation({self.value}{tag})"


# --------------------------------------------------------------------------
# the ring


class PadicRing:
    """V = Z_p[pi] with pi^(p-1) = -p, capped at relative precision p^N."""

    def __init__(self, p: int, N: int):
        if not is_prime(p):
            raise DomainError(f"{p} is not prime")
        if N < 1:
            raise DomainError("precision N must be at least 1")
        self.p = p
        self.N = N
        self.e = p - 1
        self.cap = N * self.e  # relative precision cap in pi-digits
        self._pk = [p**k for k in range(N + 3)]
        self._mods = {}

    def __repr__(self):
        return f"PadicRing(p={self.p}, N={self.N})"

    def __eq__(self, other):
        return isinstance(other, PadicRing) and (self.p, self.N) == (other.p, other.N)

    def __hash__(self):
        return hash((self.p, self.N))

    # -- vector helpers (ints, no precision bookkeeping) --------------------

    def _ppow(self, k):
        return self._pk[k] if k < len(self._pk) else self.p**k

    def _moduli(self, r: int) -> tuple:
        mods = self._mods.get(r)
        if mods is None:
            a, b = divmod(r, self.e)
            hi, lo = self._ppow(a + 1), self._ppow(a)
            mods = tuple(hi if i < b else lo for i in range(self.e))
            self._mods[r] = mods
        return mods

    def _reduce(self, vec: Sequence[int], r: int) -> tuple:
        """Canonical residues of ``sum c_i pi^i`` modulo ``pi^r``."""
        return tuple(c % m for c, m in zip(vec, self._moduli(r)))

    def lin_comb(self, items) -> "PadicScalar":
        """sum n * s over (s, n) pairs with integer n, normalized once."""
        e, p = self.e, self.p
        v0 = INF
        ap = INF
        parts = []
        for s, n in items:
            if not n:
                continue
            a = 0 if n % p else vp_int(n, p)
            if s.u is None:
                if s.v < INF // 2:
                    ap = min(ap, s.v + e * a)
                continue
            parts.append((s.v, s.u, n))
            ap = min(ap, s.v + s.r + e * a)
            if s.v < v0:
                v0 = s.v
        if not parts:
            return self.zero(ap)
        total = [0] * e
        for v, u, n in parts:
            vec = u if v == v0 else self._shift_up(u, v - v0)
            for i in range(e):
                total[i] += vec[i] * n
        return self._normalize(total, v0, ap - v0)

    def _mulvec(self, u1, u2):
        e, p = self.e, self.p
        if e == 1:
            return (u1[0] * u2[0],)
        out = [0] * e
        for i, a in enumerate(u1):
            if not a:
                continue
            for j, b in enumerate(u2):
                if b:
                    k = i + j
                    if k >= e:
                        out[k - e] -= p * a * b
                    else:
                        out[k] += a * b
        return out

    def _shift_up(self, vec, k):
        """Multiply by pi^k, k >= 0."""
        if k == 0:
            return list(vec)
        a, b = divmod(k, self.e)
        f = (-self.p) ** a
        out = [c * f for c in vec]
        p = self.p
        for _ in range(b):
            out = [-p * out[-1]] + out[:-1]
        return out

    def _shift_down(self, vec, t):
        """Exact division by pi^t (caller guarantees divisibility)."""
        a, b = divmod(t, self.e)
        f = (-self.p) ** a
        out = [c // f for c in vec]
        p = self.p
        for _ in range(b):
            out = out[1:] + [-(out[0] // p)]
        return out

    def _vec_val(self, vec) -> int | None:
        best = None
        e, p = self.e, self.p
        for i, c in enumerate(vec):
            if c:
                v = i + e * vp_int(c, p)
                if best is None or v < best:
                    best = v
        return best

    def _normalize(self, vec, v0: int, R: int) -> "PadicScalar":
        """Element pi^v0 * vec known modulo pi^(v0 + R)."""
        if R >= INF // 2:
            R = self.cap + 4 * self.e  # exact inputs: any finite cap works
            exact = True
        else:
            exact = False
        if R <= 0:
            return PadicScalar._make(self, v0 + R, None, 0)
        vec = self._reduce(vec, R)
        t = self._vec_val(vec)
        if t is None or t >= R:
            return PadicScalar._make(self, INF if exact else v0 + R, None, 0)
        if t:
            vec = self._shift_down(vec, t)
        r = min(R - t, self.cap)
        return PadicScalar._make(self, v0 + t, self._reduce(vec, r), r)

    # -- constructors -----------------------------------------------------

    def zero(self, absprec: int = INF) -> "PadicScalar":
        return PadicScalar._make(self, absprec, None, 0)

    def one(self) -> "PadicScalar":
        return self(1)

    def pi(self) -> "PadicScalar":
        return PadicScalar._make(self, 1, self._reduce([1] + [0] * (self.e - 1), self.cap), self.cap)

    def __call__(self, x) -> "PadicScalar":
        if isinstance(x, PadicScalar):
            if x.ring == self:
                return x
            if x.u is None:
                return self.zero(x.v if x.v >= INF // 2 else x.v)
            r = min(x.r, self.cap)
            return PadicScalar._make(self, x.v, self._reduce(x.u, r), r)
        if isinstance(x, bool):
            x = int(x)
        if isinstance(x, int):
            return self._from_int(x)
        if isinstance(x, Fraction):
            return self._from_int(x.numerator) * self._from_int(x.denominator).inverse()
        raise TypeError(f"cannot convert {type(x).__name__} to a p-adic scalar")

    def _from_int(self, n: int) -> "PadicScalar":
        if n == 0:
            return self.zero()
        a = vp_int(n, self.p)
        unit = n // self.p**a
        if a % 2:
            unit = -unit  # p^a = (-1)^a pi^(e a)
        vec = [unit] + [0] * (self.e - 1)
        return PadicScalar._make(self, self.e * a, self._reduce(vec, self.cap), self.cap)

    def from_coeffs(self, coeffs: Sequence[int], valuation_shift: int = 0) -> "PadicScalar":
        """pi^shift * sum coeffs[i] pi^i, taken as exact integers."""
        if len(coeffs) != self.e:
            raise DomainError(f"expected {self.e} coefficients")
        v0 = valuation_shift
        return self._normalize(list(coeffs), v0, INF)

    def from_digits(self, digits: Sequence[int], valuation: int = 0,
                    precision: int | None = None) -> "PadicScalar":
        """Element with the given pi-adic digits starting at ``valuation``."""
        vec = [0] * self.e
        for k, d in enumerate(digits):
            if d:
                vec = [a + b for a, b in zip(vec, self._shift_up([d] + [0] * (self.e - 1), k))]
        prec = len(digits) if precision is None else precision
        return self._normalize(vec, valuation, prec)


@lru_cache(maxsize=None)
def padic_ring(p: int, N: int) -> PadicRing:
    return PadicRing(p, N)


_set = object.__setattr__


class PadicScalar:
    """Immutable element of K = V[1/p] at capped relative precision."""

    __slots__ = ("ring", "v", "u", "r")

    @classmethod
    def _make(cls, ring, v, u, r):
        obj = object.__new__(cls)
        _set(obj, "ring", ring)
        _set(obj, "v", v)
        _set(obj, "u", u)
        _set(obj, "r", r)
        return obj

    def __setattr__(self, key, value):
        raise AttributeError("PadicScalar is immutable")

    def __reduce__(self):
        return (PadicScalar._make, (self.ring, self.v, self.u, self.r))

    # -- basic queries ---------------------------------------------------

    @property
    def p(self) -> int:
        return self.ring.p

    def is_zero(self) -> bool:
        return self.u is None

    def is_exact_zero(self) -> bool:
        return self.u is None and self.v >= INF // 2

    def __bool__(self):
        return self.u is not None

    @property
    def absprec(self) -> int:
        """Absolute precision in pi-digits (INF for exact zero)."""
        return self.v if self.u is None else self.v + self.r

    @property
    def relprec(self) -> int:
        return self.r

    def valuation(self) -> RationalValuation:
        if self.u is None:
            return RationalValuation(min(self.v, INF), self.ring.e, exhausted=self.v < INF // 2)
        return RationalValuation(self.v, self.ring.e)

    def val_pi(self) -> int:
        """Valuation in units of v(pi); exact zeros give INF."""
        return self.v

    def is_unit(self) -> bool:
        return self.u is not None and self.v == 0

    def in_zp(self) -> bool:
        """True if the element lies in Q_p (no pi^i components with i != 0 mod e)."""
        if self.u is None:
            return True
        if self.ring.e == 1:
            return True
        vec = self.ring._shift_up(self.u, self.v % self.ring.e)
        r = self.r + self.v % self.ring.e
        vec = self.ring._reduce(vec, r)
        return all(c == 0 for c in vec[1:])

    # -- arithmetic ------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            if other.ring != self.ring:
                if other.ring.p != self.ring.p:
                    raise DomainError("scalars over different primes")
                return self.ring(other) if other.ring.N > self.ring.N else other
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        ring = self.ring if self.ring.N <= other.ring.N else other.ring
        x, y = self, other
        if x.u is None and y.u is None:
            return ring.zero(min(x.v, y.v))
        if x.u is None:
            x, y = y, x
        if y.u is None:
            if y.v <= x.v:
                return ring.zero(y.v)
            if y.v >= x.v + x.r:
                return x if x.ring == ring else ring(x)
            return PadicScalar._make(ring, x.v, ring._reduce(x.u, y.v - x.v), y.v - x.v)
        ap = min(x.v + x.r, y.v + y.r)
        v0 = min(x.v, y.v)
        a = ring._shift_up(x.u, x.v - v0) if x.v > v0 else x.u
        b = ring._shift_up(y.u, y.v - v0) if y.v > v0 else y.u
        return ring._normalize([s + t for s, t in zip(a, b)], v0, ap - v0)

    __radd__ = __add__

    def __neg__(self):
        if self.u is None:
            return self
        return PadicScalar._make(self.ring, self.v, self.ring._reduce([-c for c in self.u], self.r), self.r)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return self._mul_int(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        ring = self.ring if self.ring.N <= other.ring.N else other.ring
        if self.u is None or other.u is None:
            if self.u is None and other.u is None:
                return ring.zero(min(self.v + other.v, INF))
            z, w = (self, other) if self.u is None else (other, self)
            if z.v >= INF // 2:
                return ring.zero()
            return ring.zero(z.v + w.v)
        r = min(self.r, other.r)
        vec = ring._reduce(ring._mulvec(self.u, other.u), r)
        return PadicScalar._make(ring, self.v + other.v, vec, r)

    __rmul__ = __mul__

    def _mul_int(self, n: int):
        ring = self.ring
        if n == 0:
            return ring.zero() if self.u is None else ring.zero()
        if self.u is None:
            if self.v >= INF // 2:
                return self
            return ring.zero(self.v + ring.e * vp_int(n, ring.p))
        a = vp_int(n, ring.p)
        unit = n // ring.p**a
        if a % 2:
            unit = -unit
        vec = ring._reduce([c * unit for c in self.u], self.r)
        return PadicScalar._make(ring, self.v + ring.e * a, vec, self.r)

    def inverse(self) -> "PadicScalar":
        """Inverse in K; raises NonUnit for zero."""
        if self.u is None:
            raise NonUnit("zero is not invertible")
        ring = self.ring
        r = self.r
        c0 = self.u[0]
        w = [pow(c0, -1, ring.p)] + [0] * (ring.e - 1)
        k = 1
        while k < r:
            k = min(2 * k, r)
            uw = ring._reduce(ring._mulvec(self.u, w), k)
            corr = [-c for c in uw]
            corr[0] += 2
            w = list(ring._reduce(ring._mulvec(w, corr), k))
        return PadicScalar._make(ring, -self.v, ring._reduce(w, r), r)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def mul_pi_power(self, k: int) -> "PadicScalar":
        if self.u is None:
            return self if self.v >= INF // 2 else self.ring.zero(self.v + k)
        return PadicScalar._make(self.ring, self.v + k, self.u, self.r)

    # -- comparison ------------------------------------------------------

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except (TypeError, DomainError):
            return False
        if other is NotImplemented:
            return False
        return (self - other).is_zero()

    def __hash__(self):
        # equality is "equal to the available precision", so only the
        # valuation is a safe hash ingredient
        return hash(("PadicScalar", self.ring.p, self.v if self.u is not None else None))

    def agrees_mod(self, other, n_p: int) -> bool:
        """True if ``self - other`` has valuation >= n_p, certified by precision."""
        d = self - other
        need = n_p * self.ring.e
        return d.absprec >= need if d.u is None else d.v >= need

    def is_zero_mod(self, n_p: int) -> bool:
        need = n_p * self.ring.e
        return self.absprec >= need if self.u is None else self.v >= need

    # -- conversions -----------------------------------------------------

    def coeffs(self) -> tuple:
        """Residues (c_0..c_{e-1}) of the element as sum c_i pi^i in V mod p^N.

        Raises DomainError if the element is not integral.
        """
        ring = self.ring
        if self.u is None:
            return (0,) * ring.e
        if self.v < 0:
            raise DomainError("element is not integral")
        vec = ring._shift_up(self.u, self.v)
        mod = ring._ppow(ring.N)
        return tuple(c % mod for c in vec)

    def digits(self) -> list:
        """pi-adic digits of the unit part, least significant first."""
        ring = self.ring
        if self.u is None:
            return []
        vec = list(self.u)
        out = []
        for _ in range(self.r):
            d = vec[0] % ring.p
            out.append(d)
            vec[0] -= d
            vec = ring._shift_down(vec, 1)
        return out

    def balanced_terms(self) -> list:
        """List of (integer, pi-exponent) with small integers, summing to self."""
        ring = self.ring
        if self.u is None:
            return []
        r = self.r
        a, b = divmod(r, ring.e)
        out = []
        for i, c in enumerate(self.u):
            mod = ring._ppow(a + 1 if i < b else a)
            if mod == 1:
                continue
            c %= mod
            if c > mod // 2:
                c -= mod
            if c:
                out.append((c, self.v + i))
        return out

    def to_json(self) -> dict:
        if self.u is None:
            return {"digits": [], "valuation": None if self.v >= INF // 2 else self.v,
                    "precision": 0}
        return {"digits": self.digits(), "valuation": self.v, "precision": self.r}

    def __repr__(self):
        if self.u is None:
            return "0" if self.v >= INF // 2 else f"O(pi^{self.v})"
        return format_scalar(self)

    __str__ = __repr__


def format_scalar(x: PadicScalar) -> str:
    """Text form in the CLI grammar (integers times powers of pi)."""
    terms = x.balanced_terms()
    if not terms:
        return "0"
    parts = []
    for c, k in terms:
        if k == 0:
            body = str(abs(c))
        else:
            powr = "pi" if k == 1 else f"pi^{k}"
            body = powr if abs(c) == 1 else f"{abs(c)}*{powr}"
        parts.append(("-" if c < 0 else "+", body))
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def scalar_from_json(ring: PadicRing, data: dict) -> PadicScalar:
    if not data["digits"]:
        return ring.zero() if data.get("valuation") is None else ring.zero(data["valuation"])
    return ring.from_digits(data["digits"], data["valuation"], data["precision"])


def scalar_arith(a: PadicScalar, b: PadicScalar | None, op: str) -> PadicScalar:
    """Dispatch for {add, sub, mul, inv}; inv insists on a unit of V."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        if a.u is None or a.v != 0:
            raise NonUnit(f"{a!r} is not a unit of V")
        return a.inverse()
    raise DomainError(f"unknown scalar operation {op!r}")


# --------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class TruncationParams:
    p: int = 3
    s: int = 1
    N: int = 12
    lo: int = -30
    hi: int = 30
    K: int | None = None
    m: int = 0
    seed: int = 0
    guard: int = 4  # extra p-adic digits carried internally

    def __post_init__(self):
        if not is_prime(self.p):
            raise DomainError(f"p = {self.p} is not prime")
        if self.s < 1:
            raise DomainError("s must be >= 1")
        if self.N < 1:
            raise DomainError("N must be >= 1")
        if not self.lo <= 0 <= self.hi:
            raise DomainError("window must satisfy lo <= 0 <= hi")
        if self.K is not None and self.K < 0:
            raise DomainError("order cap must be >= 0")
        if self.m < 0:
            raise DomainError("level must be >= 0")

    @property
    def q(self) -> int:
        return self.p**self.s

    @property
    def e(self) -> int:
        return self.p - 1

    @property
    def order(self) -> int:
        return 3 * self.q if self.K is None else self.K

    def ring(self) -> PadicRing:
        return padic_ring(self.p, self.N + self.guard)

    def replace(self, **kw) -> "TruncationParams":
        from dataclasses import replace
        return replace(self, **kw)


# --------------------------------------------------------------------------
# roots of unity


def _lift_unit_root(ring: PadicRing) -> PadicScalar:
    """The unit u with zeta = 1 + pi*u a primitive p-th root of unity.

    Substituting zeta = 1 + pi*u into ((1+y)^p - 1)/y and dividing by p gives
    h(u) = sum_{j<p-1} C(p, j+1)/p * pi^j u^j - u^(p-1), whose reduction mod
    pi is 1 - u^(p-1).  We fix u = 1 mod pi and lift one pi-adic digit at a
    time.
    """
    p = ring.p
    pis = [ring.pi() ** j for j in range(p)]
    coeffs = [ring(math.comb(p, j + 1) // p) * pis[j] for j in range(p - 1)]

    def h(u):
        acc = -(u ** (p - 1))
        upow = ring.one()
        for j in range(p - 1):
            acc = acc + coeffs[j] * upow
            upow = upow * u
        return acc

    u = ring.one()
    target = ring.cap
    for k in range(1, target):
        val = h(u)
        if val.is_zero() or val.v >= target:
            break
        if val.v >= k + 1:
            continue
        step = ring.pi() ** k
        for d in range(1, p):
            cand = u + step * d
            hv = h(cand)
            if hv.is_zero() or hv.v >= k + 1:
                u = cand
                break
        else:  # pragma: no cover - unique lift always exists
            raise PrecisionExhausted("root lifting stalled")
    return u


@lru_cache(maxsize=None)
def _roots_cached(p: int, N: int) -> tuple:
    ring = padic_ring(p, N)
    if p == 2:
        return (ring.one(), ring(-1))
    zeta = ring.one() + ring.pi() * _lift_unit_root(ring)
    roots = [ring.one()]
    for _ in range(p - 1):
        roots.append(roots[-1] * zeta)
    return tuple(roots)


def roots_of_unity(q: int, ring: PadicRing) -> tuple:
    """All q-th roots of unity in V; index 1 is the one congruent to 1 + pi."""
    p = ring.p
    if q != p:
        if q > 1 and q % p == 0 and round(math.log(q, p)) > 1 and p ** round(math.log(q, p)) == q:
            raise Unsupported("q = p^s with s > 1 needs the cyclotomic extension of V")
        raise DomainError(f"q = {q} is not a power of p = {p}")
    return _roots_cached(p, ring.N)


# --------------------------------------------------------------------------
# valuation combinatorics


def _as_tuple(k):
    return tuple(k) if isinstance(k, (tuple, list)) else None


def nu_m(k, p: int, m: int) -> int:
    """The carry count nu_m; additive on multi-indices."""
    t = _as_tuple(k)
    if t is not None:
        return sum(nu_m(ki, p, m) for ki in t)
    if k < 0:
        return 0
    a, r = divmod(k, p ** (m + 1))
    return a if r == 0 else a + 1


def q_km(k, p: int, m: int):
    t = _as_tuple(k)
    if t is not None:
        return tuple(q_km(ki, p, m) for ki in t)
    if k < 0:
        raise DomainError("q_k^(m) needs k >= 0")
    return k // p**m


def digit_sum(k: int, p: int) -> int:
    s = 0
    while k:
        k, r = divmod(k, p)
        s += r
    return s


def vp_factorial(k: int, p: int) -> int:
    if k < 0:
        raise DomainError("factorial of a negative integer")
    return (k - digit_sum(k, p)) // (p - 1)


def val_factorial(k, p: int) -> RationalValuation:
    t = _as_tuple(k)
    v = sum(vp_factorial(ki, p) for ki in t) if t is not None else vp_factorial(k, p)
    return RationalValuation(v * (p - 1), p - 1)


def binom(n: int, k: int) -> int:
    """Generalized binomial coefficient, any integer n and k >= 0."""
    if k < 0:
        return 0
    if n >= 0:
        return math.comb(n, k)
    return (-1) ** k * math.comb(k - n - 1, k)


def val_binomial(n: int, k: int, p: int) -> RationalValuation:
    c = binom(n, k)
    if c == 0:
        return RationalValuation(INF, p - 1)
    return RationalValuation(vp_int(c, p) * (p - 1), p - 1)


def qfactorial_valuation(k: int, p: int, m: int) -> int:
    return vp_factorial(k // p**m, p)


# --------------------------------------------------------------------------
# the five estimates


@dataclass
class EstimationReport:
    passed: bool
    checks: dict = field(default_factory=dict)
    counterexample: dict | None = None

    def __bool__(self):
        return self.passed


def check_estimations(primes: Iterable[int] = (2, 3, 5), kmax: int = 10_000,
                      nmax: int = 3, mmax: int = 4, samples: int = 20_000,
                      seed: int = 0) -> EstimationReport:
    """Pointwise check of the factorial, q!, nu_m, nu_m-gap and binomial bounds.

    One-variable statements are checked for every k <= kmax.  The first three
    bounds are sums of one-variable bounds (the log term only grows with |k|),
    so the exhaustive one-variable pass already implies them for n <= nmax;
    the multi-index forms are additionally evaluated on full small boxes and
    on random samples with entries up to kmax.  The nu_m gap depends only on
    residues modulo p^(m+1) and is checked on every residue tuple when that
    set is small, and by sampling otherwise.
    """
    import numpy as np

    rng = np.random.default_rng(seed)
    report = EstimationReport(True)
    eps = 1e-9

    def fail(name, **witness):
        if report.passed:
            report.passed = False
            report.counterexample = {"inequality": name, **witness}

    for p in primes:
        ks = np.arange(kmax + 1, dtype=np.int64)
        s = np.zeros_like(ks)
        t = ks.copy()
        while t.any():
            s += t % p
            t //= p
        vfact = (ks - s) // (p - 1)
        logk = np.log(ks + 1) / np.log(p)

        def vfac_of(arr):
            return vfact[arr]

        # (1) factorial bounds, one variable
        lo1 = ks / (p - 1) - logk - 1
        hi1 = ks / (p - 1)
        bad = np.nonzero((vfact < lo1 - eps) | (vfact > hi1 + eps))[0]
        if bad.size:
            fail("factorial", p=p, k=int(bad[0]))
        report.checks[f"factorial p={p}"] = int(ks.size)

        for m in range(mmax + 1):
            qk = ks // p**m
            vq = vfact[qk]
            lo2 = ks / (p**m * (p - 1)) - logk - p / (p - 1)
            hi2 = ks / (p**m * (p - 1))
            bad = np.nonzero((vq < lo2 - eps) | (vq > hi2 + eps))[0]
            if bad.size:
                fail("q-factorial", p=p, m=m, k=int(bad[0]))
            P = p ** (m + 1)
            nu = np.where(ks % P == 0, ks // P, ks // P + 1)
            bad = np.nonzero((nu < ks / P - eps) | (nu > ks / P + 1 + eps))[0]
            if bad.size:
                fail("nu bounds", p=p, m=m, l=int(bad[0]))
            report.checks[f"q-factorial/nu p={p} m={m}"] = int(ks.size)

            def nu_of(arr):
                return np.where(arr % P == 0, arr // P, arr // P + 1)

            # multi-index forms on boxes and samples
            for n in range(2, nmax + 1):
                side = 300 if n == 2 else 40
                grids = np.meshgrid(*[np.arange(side)] * n, indexing="ij")
                box = np.stack([g.ravel() for g in grids], axis=1)
                smp = rng.integers(0, kmax + 1, size=(samples, n))
                for arr in (box, smp):
                    tot = arr.sum(axis=1)
                    lg = np.log(tot + 1) / np.log(p)
                    vf = vfac_of(arr).sum(axis=1)
                    if m == 0:
                        badm = (vf < tot / (p - 1) - n * lg - n - eps) | (vf > tot / (p - 1) + eps)
                        if badm.any():
                            i = int(np.argmax(badm))
                            fail("factorial", p=p, k=arr[i].tolist())
                    vq = vfact[arr // p**m].sum(axis=1)
                    badm = (vq < tot / (p**m * (p - 1)) - n * lg - n * p / (p - 1) - eps) | (
                        vq > tot / (p**m * (p - 1)) + eps)
                    if badm.any():
                        i = int(np.argmax(badm))
                        fail("q-factorial", p=p, m=m, k=arr[i].tolist())
                    nv = nu_of(arr).sum(axis=1)
                    badm = (nv < tot / P - eps) | (nv > tot / P + n + eps)
                    if badm.any():
                        i = int(np.argmax(badm))
                        fail("nu bounds", p=p, m=m, l=arr[i].tolist())
                    gap = nv - nu_of(tot)
                    badm = (gap < 0) | (gap > n)
                    if badm.any():
                        i = int(np.argmax(badm))
                        fail("nu gap", p=p, m=m, l=arr[i].tolist())
                # the gap only sees residues mod P
                if P**n <= 2_000_000:
                    grids = np.meshgrid(*[np.arange(P)] * n, indexing="ij")
                    res = np.stack([g.ravel() for g in grids], axis=1)
                    gap = nu_of(res).sum(axis=1) - nu_of(res.sum(axis=1))
                    badm = (gap < 0) | (gap > n)
                    if badm.any():
                        i = int(np.argmax(badm))
                        fail("nu gap", p=p, m=m, l=res[i].tolist())
                report.checks[f"multi-index p={p} m={m} n={n}"] = int(box.shape[0] + samples)

        # (5) binomial valuations, every 1 <= l <= kmax and 0 <= r <= l
        worst_ok = True
        for lstart in range(1, kmax + 1, 500):
            ls = np.arange(lstart, min(lstart + 500, kmax + 1))
            r = np.arange(kmax + 1)
            L, R = np.meshgrid(ls, r, indexing="ij")
            mask = R <= L
            diff = np.where(mask, L - R, 0)
            vb = (s[np.where(mask, R, 0)] + s[diff] - s[L]) // (p - 1)
            bound = p * (np.log(L) / np.log(p) + 1)
            badm = mask & ((vb < 0) | (vb > bound + eps))
            if badm.any():
                i, j = np.argwhere(badm)[0]
                fail("binomial", p=p, l=int(ls[i]), r=int(j))
                worst_ok = False
                break
        report.checks[f"binomial p={p}"] = kmax * (kmax + 1) // 2 if worst_ok else -1
    return report
