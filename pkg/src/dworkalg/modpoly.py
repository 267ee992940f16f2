"""Commutative polynomials over Z/p^N, used by the chain-level oracles."""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Sequence

from .errors import DomainError


class ModPoly:
    """Polynomial in ``nvars`` variables with coefficients in Z/mod.

    Terms map exponent tuples to canonical residues in [0, mod).
    """

    __slots__ = ("nvars", "mod", "terms", "names")

    def __init__(self, nvars: int, mod: int, terms: Mapping | None = None,
                 names: Sequence[str] | None = None):
        self.nvars = nvars
        self.mod = mod
        self.names = tuple(names) if names else tuple(f"v{i}" for i in range(nvars))
        out = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != nvars or any(x < 0 for x in e):
                raise DomainError(f"bad exponent {e}")
            c %= mod
            if c:
                out[e] = (out.get(e, 0) + c) % mod
                if not out[e]:
                    del out[e]
        self.terms = out

    # -- constructors --------------------------------------------------------

    @classmethod
    def const(cls, nvars, mod, c, names=None) -> "ModPoly":
        return cls(nvars, mod, {(0,) * nvars: c}, names)

    @classmethod
    def var(cls, nvars, mod, i, power=1, names=None) -> "ModPoly":
        e = [0] * nvars
        e[i] = power
        return cls(nvars, mod, {tuple(e): 1}, names)

    def _new(self, terms) -> "ModPoly":
        return ModPoly(self.nvars, self.mod, terms, self.names)

    def zero(self) -> "ModPoly":
        return self._new({})

    def one(self) -> "ModPoly":
        return self._new({(0,) * self.nvars: 1})

    # -- arithmetic ------------------------------------------------------------

    def _coerce(self, other) -> "ModPoly":
        if isinstance(other, ModPoly):
            if (other.nvars, other.mod) != (self.nvars, self.mod):
                raise DomainError("polynomials live in different rings")
            return other
        if isinstance(other, int):
            return ModPoly.const(self.nvars, self.mod, other, self.names)
        raise TypeError(f"cannot combine ModPoly with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return self._new(t)

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return self._new({e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return self._new(t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = self.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        try:
            return (self - other).is_zero()
        except (TypeError, DomainError):
            return False

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def constant_term(self) -> int:
        return self.terms.get((0,) * self.nvars, 0)

    def substitute(self, images: Sequence["ModPoly"]) -> "ModPoly":
        """Ring map sending variable i to images[i]."""
        if len(images) != self.nvars:
            raise DomainError("need one image per variable")
        tgt = images[0]
        out = tgt.zero()
        cache: dict = {}
        for e, c in self.terms.items():
            mono = tgt.one() * c
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    if key not in cache:
                        cache[key] = images[i] ** k
                    mono = mono * cache[key]
            out = out + mono
        return out

    def set_zero(self, variables: Iterable[int]) -> "ModPoly":
        vs = set(variables)
        return self._new({e: c for e, c in self.terms.items() if not any(e[i] for i in vs)})

    def divide_exact(self, other: "ModPoly", var: int) -> "ModPoly":
        """Exact division by a polynomial monic in ``var`` (leading term v^n, unit coefficient)."""
        other = self._coerce(other)
        n = max(e[var] for e in other.terms)
        lead = {e: c for e, c in other.terms.items() if e[var] == n}
        if len(lead) != 1 or list(lead)[0] != tuple(n if i == var else 0 for i in range(self.nvars)):
            raise DomainError("divisor must be monic in the chosen variable")
        inv = pow(lead[list(lead)[0]], -1, self.mod)
        rem = self
        quo = self.zero()
        while True:
            top = [e for e in rem.terms if e[var] >= n]
            if not top:
                break
            e = max(top, key=lambda t: t[var])
            c = rem.terms[e] * inv
            shift = tuple(x - (n if i == var else 0) for i, x in enumerate(e))
            mono = self._new({shift: c})
            quo = quo + mono
            rem = rem - mono * other
        if not rem.is_zero():
            raise DomainError("division is not exact")
        return quo

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms):
            c = self.terms[e]
            mono = "*".join(f"{n}^{k}" if k > 1 else n for n, k in zip(self.names, e) if k)
            parts.append(f"{c}*{mono}" if mono and c != 1 else (mono or str(c)))
        return " + ".join(parts)


def monomials(nvars: int, degree: int) -> list:
    """All exponent tuples of total degree ``degree``."""
    if nvars == 0:
        return [()] if degree == 0 else []
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(set(out))
