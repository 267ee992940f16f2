import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dworkalg import weyl_dagger as wd
from dworkalg.errors import DomainError
from dworkalg.operator_algebra import Caps, DiffOp, op_mul
from dworkalg.padic_core import TruncationParams, nu_m

PARAMS = TruncationParams(p=3, N=10)
R = PARAMS.ring()
CAPS = Caps.uniform(2, 0, 10, 14)
NAMES = ("x", "y")
G = wd._gens(R, CAPS)


def elt(terms, caps=CAPS):
    return wd.DaggerElt(DiffOp(R, 2, terms, caps, NAMES))


def pi_pow(k):
    return R.pi() ** k


# -- gauges ------------------------------------------------------------------

@pytest.mark.parametrize("m", range(3))
def test_gauge_examples(m):
    for l in (1, 3, 9, 10):
        P = elt({((l, 0), (0, 0)): R(3 ** nu_m(l, 3, m))})
        g = P.gauge(m)
        assert g.member and g.slack == 0
    assert elt({((0, 0), (0, 3)): R.one()}).gauge(m).member
    g = elt({((1, 0), (0, 0)): R.one()}).gauge(m)
    assert not g.member and g.slack == -1


def test_gauge_without_x():
    P = elt({((0, 1), (0, 0)): R.one()})
    assert not wd.gauge_dagger(P, 0, "F").member  # bare y is not overconvergent
    assert not wd.gauge_dagger(elt({((1, 0), (0, 0)): R(3)}), 0, "F").member  # x is forbidden


# -- the decomposition of p^nu x^l -------------------------------------------

@pytest.mark.parametrize("m", range(3))
def test_formula_S_identity(m):
    caps = Caps.uniform(2, 0, 32, 34)
    for l in range(1, 31):
        assert wd.formula_S_identity(l, m, R, caps), l


def test_formula_S_first_cases():
    S, Rl = wd.build_S_R(1, 0, R, CAPS)
    # x = 3 x / 3, nu_0(1) = 1: p x = (p/pi) (D + d_y)
    assert S.op == G["one"].scale(R(3) / R.pi())
    assert Rl.op == G["dy"].scale(R(3) / R.pi())
    _, R2 = wd.build_S_R(2, 0, R, CAPS)
    assert R2.op == DiffOp.d(R, 2, 1, 2, CAPS, NAMES).scale(R(3) * 2 / pi_pow(2))


def test_coeff_c_sign_and_domain():
    for l in range(1, 8):
        for r in range(1, l + 1):
            for s in range(r):
                c = wd.coeff_c(l, r, s, 0, R)
                assert not c.is_zero()
    with pytest.raises(DomainError):
        wd.coeff_c(3, 0, 0, 0, R)
    with pytest.raises(DomainError):
        wd.coeff_c(3, 2, 2, 0, R)


def test_coeff_c_sign_explicit():
    # l=3: c(1,0) = p^nu/pi^3 * 3 * 2!, c(2,0) carries the opposite sign
    lead = R(3 ** nu_m(3, 3, 0)) * R(6) * R.pi() ** -3
    assert wd.coeff_c(3, 1, 0, 0, R) == lead
    assert wd.coeff_c(3, 2, 0, 0, R) == -lead
    assert wd.coeff_c(3, 2, 1, 0, R) == R(3 ** nu_m(3, 3, 0)) * R(3) * R.pi() ** -2


@pytest.mark.parametrize("p,m", [(2, 0), (2, 1), (3, 0), (3, 2)])
def test_c_bound_scalar_route(p, m):
    assert wd.check_c_bound(20, p, m).passed


def test_c_bound_grid_matches_scalar_route():
    for p in (2, 3):
        for m in range(3):
            a = wd.check_c_bound(25, p, m).witness
            b = wd.c_valuation_grid(25, p, m).witness
            assert list(a["at"]) == b["at"]
            assert abs(a["min_gap"] - b["min_gap"]) < 1e-9


def test_jump_constants():
    assert [wd.jump_constant(3, m) for m in range(3)] == [Fraction(7501, 1000), Fraction(8501, 1000),
                                                          Fraction(9501, 1000)]


# -- division ----------------------------------------------------------------

def test_division_examples():
    div = wd.divide_dirac(elt({((1, 0), (0, 0)): R.one()}))
    assert div.Q.op == G["one"].scale(pi_pow(-1)).with_caps(div.Q.op.caps)
    assert div.R.op == G["dy"].scale(pi_pow(-1)).with_caps(div.R.op.caps)
    div = wd.divide_dirac(wd.DaggerElt(G["dy"]))
    assert div.Q.op.is_zero() and div.R.op == G["dy"].with_caps(div.R.op.caps)
    div = wd.divide_dirac(elt({((2, 0), (0, 0)): R.one()}))
    c = div.Q.op.caps
    want_Q = (G["dy"].scale(pi_pow(-2)) + G["x"].scale(pi_pow(-1))).with_caps(c)
    assert div.Q.op == want_Q
    assert div.R.op == DiffOp.d(R, 2, 1, 2, CAPS, NAMES).scale(R(2) * pi_pow(-2)).with_caps(div.R.op.caps)


def test_division_methods_agree_and_certify():
    rng = random.Random(7)
    for it in range(30):
        m = it % 3
        P = wd.random_global(PARAMS, rng, member_level=m)
        a = wd.divide_dirac(P, m)
        b = wd.divide_dirac(P, m, method="closed")
        assert wd.division_exact(P, a) and wd.division_exact(P, b)
        assert a.certified and b.certified
        assert a.Q.op == b.Q.op.with_caps(a.Q.op.caps.join(b.Q.op.caps))


def test_division_rejects_chart_input():
    with pytest.raises(DomainError):
        wd.divide_iterative(wd.to_chart(wd.DaggerElt(G["x"]), "u1v0"))
    with pytest.raises(DomainError):
        wd.divide_dirac(wd.DaggerElt(G["x"]), method="nope")


def test_kernel():
    zero = elt({})
    assert wd.kernel_test(zero).passed
    one = wd.DaggerElt(G["one"])
    assert wd.kernel_test(one).passed
    assert wd.kernel_test(wd.DaggerElt(wd.dirac(R, CAPS))).passed


@given(st.integers(0, 10**6))
def test_kernel_random(seed):
    Q = wd.random_global(PARAMS, random.Random(seed), terms=3)
    assert wd.kernel_test(Q).passed


@given(st.integers(0, 10**6), st.integers(0, 2))
def test_division_invariants(seed, m):
    P = wd.random_global(PARAMS, random.Random(seed), terms=3, member_level=m)
    div = wd.divide_dirac(P, m)
    assert wd.division_exact(P, div) and div.R.in_B2() and div.certified


# -- charts ------------------------------------------------------------------

@pytest.mark.parametrize("chart", ("u1v0", "u1v1"))
def test_chart_ideal_identity(chart):
    assert wd.ideal_identity(R, Caps.uniform(2, -6, 6, 8), chart)


@pytest.mark.parametrize("chart", ("u1v0", "u1v1"))
def test_chart_division(chart):
    caps = Caps.uniform(2, -6, 6, 8)
    pi = wd.DaggerElt(DiffOp.scalar(R, 2, R.pi(), caps, wd.CHARTS[chart]), chart)
    Q, Rm = wd.divide_chart(pi)
    assert Q.op.is_zero() and Rm.op == pi.op.with_caps(Rm.op.caps)
    rng = random.Random(11)
    for _ in range(5):
        P = wd.to_chart(wd.random_global(PARAMS, rng, terms=3, amax=2, bmax=2), chart)
        Q, Rm = wd.divide_chart(P)
        assert wd.chart_division_exact(P, Q, Rm) and wd.in_infinity_prime(Rm)
        assert wd.conditional_membership(Q)


def test_chart_consistent_with_global_division():
    x = wd.DaggerElt(DiffOp.x(R, 2, 0, 1, Caps.uniform(2, 0, 6, 8), NAMES))
    div = wd.divide_dirac(x)
    Qc, Rc = wd.divide_chart(wd.to_chart(x, "u1v0"))
    # global Q D = (Q x) D' and x = 1/x'
    Qt = wd.to_chart(div.Q, "u1v0").op
    xs = DiffOp.x(R, 2, 0, -1, Qt.caps, ("x'", "t"))
    assert op_mul(Qt, xs) == Qc.op.with_caps(Qt.caps.join(Qc.op.caps))


def test_lah_expansion():
    caps = Caps.uniform(2, -12, 12, 8)
    names = wd.CHARTS["u1v0"]
    base = op_mul(DiffOp.x(R, 2, 0, 2, caps, names), DiffOp.d(R, 2, 0, 1, caps, names)).scale(-1)
    power = DiffOp.identity(R, 2, caps, names)
    fact = 1
    for n in range(1, 5):
        power = op_mul(power, base)
        fact *= n
        assert wd.lah_dx(n, R, caps, names, 0).scale(fact) == power


def test_chart_transport_is_multiplicative():
    rng = random.Random(5)
    for _ in range(5):
        A = wd.random_global(PARAMS, rng, terms=2, amax=2, bmax=2)
        B = wd.random_global(PARAMS, rng, terms=2, amax=2, bmax=2)
        lhs = wd.to_chart(wd.DaggerElt(op_mul(A.op, B.op)), "u1v1").op
        rhs = op_mul(wd.to_chart(A, "u1v1").op, wd.to_chart(B, "u1v1").op)
        assert lhs == rhs.with_caps(lhs.caps.join(rhs.caps))


# -- eps' and the Fourier quotient -------------------------------------------

def test_epsilon_prime_examples():
    e = wd.epsilon_prime(wd.DaggerElt(G["dy"])).op
    assert e == G["x"].scale(-R.pi()).with_caps(e.caps)
    e = wd.epsilon_prime(wd.DaggerElt(G["dx"])).op
    assert e == (G["dx"] - G["y"].scale(R.pi())).with_caps(e.caps)
    assert wd.epsilon_prime(wd.DaggerElt(G["dy"] + G["x"].scale(R.pi()))).op.is_zero()


def _drop_dy(op):
    # normal form modulo the left ideal A_2 d_y
    return DiffOp(op.ring, 2, {k: c for k, c in op.terms.items() if k[1][1] == 0}, op.caps, op.names)


def test_epsilon_prime_is_not_multiplicative():
    # eps'(d_y y) = 1 - pi x y but eps'(d_y) eps'(y) = -pi x y
    dy, y = G["dy"], G["y"]
    lhs = wd.epsilon_prime(wd.DaggerElt(op_mul(dy, y))).op
    assert lhs == (G["one"] - op_mul(G["x"], y).scale(R.pi())).with_caps(lhs.caps)
    e = op_mul(wd.epsilon_prime(wd.DaggerElt(dy)).op, wd.epsilon_prime(wd.DaggerElt(y)).op)
    assert lhs != e.with_caps(lhs.caps.join(e.caps))


@given(st.integers(0, 10**6))
def test_epsilon_prime_left_linear(seed):
    # eps'(A B) = eps'(phi(A) eps'(B)), phi the twist automorphism
    rng = random.Random(seed)
    A = wd.random_global(PARAMS, rng, terms=2, amax=2, bmax=1)
    B = wd.random_global(PARAMS, rng, terms=2, amax=2, bmax=1)
    lhs = wd.epsilon_prime(wd.DaggerElt(op_mul(A.op, B.op))).op
    phiA = wd.twist_automorphism(A).op
    eB = wd.epsilon_prime(B).op
    caps = lhs.caps.join(phiA.caps).join(eB.caps)
    assert lhs.with_caps(caps) == _drop_dy(op_mul(phiA.with_caps(caps), eB.with_caps(caps)))


@given(st.integers(0, 10**6))
def test_epsilon_prime_kills_coboundaries(seed):
    P = wd.random_global(PARAMS, random.Random(seed), terms=2, amax=2, bmax=2)
    assert wd.epsilon_prime(wd.kpi_differential(P)).op.is_zero()


def test_fourier_examples():
    one = wd.fourier_reduce(wd.DaggerElt(G["one"]))
    assert one == DiffOp.identity(R, 1, one.caps, ("y",))
    r = wd.fourier_reduce(wd.DaggerElt(G["x"].scale(R.pi())))
    assert r == DiffOp.d(R, 1, 0, 1, r.caps, ("y",))
    assert wd.fourier_reduce(wd.DaggerElt(op_mul(G["dx"], G["y"] ** 3))).is_zero()


def test_fourier_left_form_fails():
    # reduce(pi x P) = reduce(d_y P) is false for P = d_x; the right form holds
    P = G["dx"]
    left = wd.fourier_reduce(wd.DaggerElt(op_mul(G["x"].scale(R.pi()), P)))
    other = wd.fourier_reduce(wd.DaggerElt(op_mul(G["dy"], P)))
    assert left != other.with_caps(left.caps.join(other.caps))
    assert left == DiffOp.scalar(R, 1, -R.pi(), left.caps, ("y",))
    right = wd.fourier_reduce(wd.DaggerElt(op_mul(P, G["x"].scale(R.pi()))))
    assert right.is_zero() and wd.fourier_reduce(wd.DaggerElt(op_mul(P, G["dy"]))).is_zero()


@given(st.integers(0, 10**6))
def test_fourier_relations(seed):
    P = wd.random_global(PARAMS, random.Random(seed), terms=3, amax=3, bmax=2).op.with_caps(CAPS)
    D = wd.dirac(R, CAPS)
    assert wd.fourier_reduce(wd.DaggerElt(op_mul(G["dx"], P))).is_zero()
    assert wd.fourier_reduce(wd.DaggerElt(op_mul(P, D))).is_zero()
    a = wd.fourier_reduce(wd.DaggerElt(op_mul(P, G["x"].scale(R.pi()))))
    b = wd.fourier_reduce(wd.DaggerElt(op_mul(P, G["dy"])))
    assert a == b.with_caps(a.caps.join(b.caps))


def test_fourier_rank():
    rep = wd.fourier_rank(PARAMS)
    assert rep.passed and rep.witness == {"rank": 15, "cells": 15}


def test_other_prime():
    params = TruncationParams(p=2, N=10)
    rng = random.Random(2)
    for m in range(3):
        P = wd.random_global(params, rng, member_level=m)
        div = wd.divide_dirac(P, m)
        assert wd.division_exact(P, div) and div.certified
