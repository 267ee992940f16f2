"""Small exact linear algebra: ranks over F_p and over K = V[1/p], Fraction matrices."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .padic_core import PadicScalar


def rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    """Rank of an integer matrix reduced mod p."""
    m = [[c % p for c in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][col], -1, p)
        m[rank] = [c * inv % p for c in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                f = m[i][col]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def rank_padic(rows: Sequence[Sequence[PadicScalar]]) -> int:
    """Rank over the fraction field, pivoting on minimal valuation.

    A column with no entry nonzero at the available precision counts as
    dependent, so the result is a lower bound that is exact whenever the
    pivots stay well inside the working precision.
    """
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for col in range(ncols):
        cands = [(m[i][col].v, i) for i in range(rank, len(m)) if not m[i][col].is_zero()]
        if not cands:
            continue
        _, piv = min(cands)
        m[rank], m[piv] = m[piv], m[rank]
        inv = m[rank][col].inverse()
        for i in range(rank + 1, len(m)):
            if not m[i][col].is_zero():
                f = m[i][col] * inv
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def frac_matmul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> list:
    if a and b and len(a[0]) != len(b):
        raise ValueError("shape mismatch")
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0]))]
            for i in range(len(a))]


def frac_identity(n: int) -> list:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
