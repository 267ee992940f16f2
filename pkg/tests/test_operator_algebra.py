import random

import pytest
from hypothesis import given, strategies as st

from dworkalg.dwork import dwork_dual
from dworkalg.errors import DomainError, Overflow
from dworkalg.operator_algebra import (Caps, DiffOp, LaurentPoly, apply, from_level, gauge, op_mul, qfact_int,
                                       to_level, transpose)
from dworkalg.padic_core import TruncationParams, padic_ring

R = padic_ring(3, 10)
CAPS = Caps.uniform(1, -10, 20, 12)


def mono(a, c=1, ring=R, caps=CAPS):
    return LaurentPoly.monomial(ring, (a,), c, caps)


def d(k, ring=R, caps=CAPS):
    return DiffOp.d(ring, 1, 0, k, caps)


def x(n=1, ring=R, caps=CAPS):
    return DiffOp.x(ring, 1, 0, n, caps)


def test_commutation():
    assert op_mul(d(1), x()) == x() * d(1) + DiffOp.identity(R, 1, CAPS)


@pytest.mark.parametrize("k", range(1, 7))
def test_dk_xk_constant_term(k):
    assert op_mul(d(k), x(k)).coeff((0,), (0,)) == R.one()


def test_action_examples():
    assert apply(d(2), mono(5)) == mono(3, 10)
    assert apply(d(2), mono(1)).is_zero()
    assert apply(d(3), mono(-1)) == mono(-4, -1)


def test_level_factorials():
    assert qfact_int(3, 3, 1) == 1
    assert qfact_int(3, 3, 0) == 6
    assert qfact_int(10, 2, 2) == 2


def test_gauge_examples():
    for m in range(3):
        k = 3 ** (m + 1)
        caps = Caps.uniform(1, 0, k, 2)
        P = DiffOp(R, 1, {((k,), (0,)): 3}, caps)
        g = gauge(P, m)
        assert g.member and g.slack == 0
        g = gauge(DiffOp.x(R, 1, 0, k, caps), m)
        assert not g.member and g.slack == -1


def test_dual_operator_member_in_pole_mode():
    params = TruncationParams(p=3, N=8, lo=-6, hi=6, K=6)
    for k in range(3):
        assert gauge(dwork_dual(k, params), params.s, mode="pole-divisor").member


def test_transpose_examples():
    assert transpose(d(1)) == -d(1)
    assert transpose(op_mul(x(), d(2))) == op_mul(x(), d(2)) + d(1)


def test_caps_are_enforced():
    tight = Caps.uniform(1, 0, 3, 2)
    with pytest.raises(Overflow):
        DiffOp.x(R, 1, 0, 4, tight)
    with pytest.raises(Overflow):
        op_mul(DiffOp.x(R, 1, 0, 2, tight), DiffOp.x(R, 1, 0, 2, tight))


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        apply(d(1), LaurentPoly.monomial(R, (1, 1), 1, Caps.uniform(2, 0, 4, 4)))


def test_text_form():
    P = op_mul(x(2), d(2)) - x().scale(2) + R.pi()
    assert repr(P) == "pi - 2*x + x^2*dx^[2]"
    # -3 = pi^2 when p = 3
    assert repr(x().scale(-3)) == "pi^2*x"


# -- properties --------------------------------------------------------------

terms = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(-9, 9), max_size=4)


def op_from(t):
    return DiffOp(R, 1, {((a,), (b,)): c for (a, b), c in t.items() if c}, CAPS)


@given(terms, terms, st.dictionaries(st.integers(-3, 6), st.integers(-9, 9), max_size=4))
def test_action_compatibility(tp, tq, tf):
    P, Q = op_from(tp), op_from(tq)
    f = LaurentPoly(R, 1, {(a,): c for a, c in tf.items() if c}, CAPS)
    assert apply(op_mul(P, Q), f) == apply(P, apply(Q, f))


@given(terms, terms, terms)
def test_associativity(ta, tb, tc):
    A, B, C = op_from(ta), op_from(tb), op_from(tc)
    assert op_mul(op_mul(A, B), C) == op_mul(A, op_mul(B, C))


@given(terms, terms)
def test_transpose_antihomomorphism(ta, tb):
    A, B = op_from(ta), op_from(tb)
    assert transpose(transpose(A)) == A
    assert transpose(op_mul(A, B)) == op_mul(transpose(B), transpose(A))


@given(terms, st.integers(0, 2))
def test_level_round_trip(t, m):
    P = op_from(t)
    assert from_level(R, 1, to_level(P, m), m, CAPS, P.names) == P


def test_level_round_trip_random_many():
    rng = random.Random(0)
    for _ in range(50):
        P = op_from({(rng.randint(0, 4), rng.randint(0, 8)): rng.randint(-9, 9) for _ in range(4)})
        m = rng.randint(0, 3)
        assert from_level(R, 1, to_level(P, m), m, CAPS, P.names) == P


@given(st.integers(0, 10**6), st.integers(0, 2))
def test_gauge_of_product(seed, m):
    # observed defect slack(P) + slack(Q) - slack(PQ) is 0 here; the allowance is d = 1
    from dworkalg.padic_core import nu_m

    rng = random.Random(seed)
    ring = padic_ring(3, 14)
    caps = Caps.uniform(1, 0, 16, 16)

    def member():
        terms = {}
        for _ in range(3):
            a, b = rng.randint(0, 4), rng.randint(0, 3)
            terms[((a,), (b,))] = ring(3 ** nu_m(a, 3, m) * rng.choice([1, 2, 4, 5]))
        return DiffOp(ring, 1, terms, caps)

    P, Q = member(), member()
    defect = gauge(P, m).slack + gauge(Q, m).slack - gauge(op_mul(P, Q), m).slack
    assert defect <= 1
