from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dworkalg.errors import DomainError, NonUnit, Unsupported
from dworkalg.padic_core import (PadicScalar, TruncationParams, binom, check_estimations, digit_sum,
                                 format_scalar, nu_m, padic_ring, q_km, roots_of_unity, val_binomial,
                                 val_factorial, vp_factorial)

PRIMES = (2, 3, 5, 7)


@pytest.mark.parametrize("p", PRIMES)
def test_pi_relation(p):
    R = padic_ring(p, 10)
    pi = R.pi()
    assert pi * pi ** (p - 2) == R(-p)
    assert pi ** (p - 1) + p == R.zero()


def test_inverse_of_one_and_zero():
    R = padic_ring(3, 8)
    assert R.one().inverse() == R.one()
    with pytest.raises(NonUnit):
        R.zero().inverse()


def test_valuation_in_pi_units():
    R = padic_ring(3, 8)
    x = R.pi() ** 3
    assert x.v == 3
    assert x.valuation().value == Fraction(3, 2)
    assert R(9).valuation().value == 2
    assert R(Fraction(1, 3)).v == -2


def test_square_roots_of_unity():
    R = padic_ring(2, 10)
    assert set(map(repr, roots_of_unity(2, R))) == {repr(R.one()), repr(R(-1))}


@pytest.mark.parametrize("p", (3, 5))
def test_roots_of_unity(p):
    R = padic_ring(p, 10)
    roots = roots_of_unity(p, R)
    total = R.zero()
    for z in roots:
        assert (z ** p).agrees_mod(R.one(), 10)
        total = total + z
    assert total.agrees_mod(R.zero(), 10)
    u = (roots[1] - 1) / R.pi()
    assert u.is_unit()


def test_roots_need_prime_q():
    R = padic_ring(3, 6)
    with pytest.raises(Unsupported):
        roots_of_unity(9, R)
    with pytest.raises(DomainError):
        roots_of_unity(4, R)


def test_nu_m_examples():
    assert nu_m(-3, 3, 0) == 0
    assert nu_m(8, 2, 1) == 2
    assert nu_m(5, 3, 0) == 2
    assert nu_m((5, 8, -1), 3, 0) == 2 + 3
    assert q_km(7, 3, 1) == 2


def test_factorial_and_binomial():
    assert vp_factorial(9, 3) == 4
    assert val_factorial(9, 3).value == 4
    assert val_factorial(9, 3).value <= Fraction(9, 2)
    assert binom(-3, 2) == 6
    assert binom(-1, 3) == -1
    assert val_binomial(9, 3, 3).value == 1  # 84 = 3 * 28
    assert digit_sum(10, 3) == 2


def test_truncation_params_validation():
    with pytest.raises(DomainError):
        TruncationParams(p=4)
    with pytest.raises(DomainError):
        TruncationParams(lo=1)
    assert TruncationParams(p=5).order == 15
    assert TruncationParams(p=5, K=4).order == 4


def test_estimations_small():
    rep = check_estimations((2, 3, 5), kmax=500, nmax=3, mmax=2, samples=500)
    assert rep.passed, rep.counterexample
    assert rep.checks["factorial p=3"] == 501


def test_format_scalar():
    R = padic_ring(3, 6)
    assert format_scalar(R.zero()) == "0"
    assert format_scalar(R(-2)) == "-2"
    assert format_scalar(R.pi() ** 3) == "pi^3"
    assert format_scalar(R(Fraction(1, 3))).startswith("-pi^-2")


# -- ring axioms -------------------------------------------------------------

ints = st.integers(-10**6, 10**6)


@st.composite
def scalars(draw, p=3, N=8):
    R = padic_ring(p, N)
    c = [draw(ints) for _ in range(R.e)]
    return R.from_coeffs(c, draw(st.integers(0, 3)))


@given(scalars(), scalars(), scalars())
def test_ring_axioms(a, b, c):
    n = 6  # compare well inside the precision cap
    assert ((a + b) + c).agrees_mod(a + (b + c), n)
    assert ((a * b) * c).agrees_mod(a * (b * c), n)
    assert (a * (b + c)).agrees_mod(a * b + a * c, n)
    assert (a * b) == (b * a)
    assert (a - a).is_zero()


@given(scalars())
def test_inverse(a):
    if a.is_zero():
        return
    # relative precision survives inversion
    assert (a * a.inverse()).agrees_mod(a.ring.one(), 8 - a.v)


@given(st.sampled_from(PRIMES), ints, ints)
def test_integer_embedding_is_a_homomorphism(p, m, n):
    R = padic_ring(p, 8)
    assert (R(m) + R(n)).agrees_mod(R(m + n), 8)
    assert (R(m) * R(n)).agrees_mod(R(m * n), 8)


@given(st.sampled_from(PRIMES), st.integers(0, 40), st.integers(0, 3))
def test_nu_m_bounds(p, k, m):
    # k / p^(m+1) <= nu_m(k) < k / p^(m+1) + 1
    P = p ** (m + 1)
    assert Fraction(k, P) <= nu_m(k, p, m) < Fraction(k, P) + 1


@given(st.integers(0, 3000), st.sampled_from((2, 3, 5)))
def test_legendre_against_direct_count(k, p):
    direct, t = 0, k
    while t:
        t //= p
        direct += t
    assert vp_factorial(k, p) == direct


@given(scalars())
def test_json_is_stable(a):
    d = a.to_json()
    assert set(d) == {"digits", "valuation", "precision"}
    assert isinstance(a, PadicScalar)
