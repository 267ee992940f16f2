import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dworkalg import canonical_iso as ci
from dworkalg.dwork import dwork_dual
from dworkalg.errors import Ambiguous, DomainError
from dworkalg.modpoly import ModPoly
from dworkalg.operator_algebra import Caps, DiffOp, LaurentPoly, apply
from dworkalg.padic_core import TruncationParams, binom, roots_of_unity

MOD = 9
X = ModPoly.var(2, MOD, 0, 1, ("x", "y"))
Y = ModPoly.var(2, MOD, 1, 1, ("x", "y"))

SMALL = TruncationParams(p=3, N=8, lo=-6, hi=12)


# -- Koszul complexes --------------------------------------------------------

def test_koszul_principal():
    K = ci.koszul_build([ModPoly.var(1, MOD, 0, 1, ("x",))])
    assert K.is_regular() and K.d_squared_zero()


def test_koszul_two_variables():
    K = ci.koszul_build([X, Y])
    assert K.d_squared_zero()
    assert all(h == 0 for h in K.graded_homology().values())


def test_koszul_rejects_non_regular():
    with pytest.raises(DomainError):
        ci.koszul_build([X, X])
    assert ci.KoszulComplex([X * Y, X]).graded_homology()[(1, 2)] == 1


def test_unit_triangular_change_is_regular():
    rng = random.Random(0)
    for _ in range(5):
        a = rng.randrange(MOD)
        assert ci.KoszulComplex([X + Y * a, Y]).is_regular()


def test_chain_map_examples():
    one, zero = X.one(), X.zero()
    gamma = ci.koszul_compare([X, Y], [X, Y], [[one, zero], [zero, one]])
    assert gamma.commutes()
    assert gamma.top_coefficient() == one
    assert gamma.image(1, {(0,): one}) == {(0,): one}
    x1 = ModPoly.var(1, MOD, 0, 1, ("x",))
    f = x1 + 2
    gamma = ci.koszul_compare([x1], [f * x1], [[f]])
    assert gamma.commutes() and gamma.top_coefficient() == f
    with pytest.raises(DomainError):
        ci.koszul_compare([x1], [x1], [[f]])


def test_laplace_det():
    G = [[X, Y], [Y + 1, X * 2]]
    assert ci.laplace_det(G) == X * X * 2 - Y * (Y + 1)


# -- iota/alpha --------------------------------------------------------------

def test_iota_alpha_on_identity_functional():
    model = ci.FiniteFlatModel("identity", 1, 27)
    y = model.y(0)
    model.z_images = [y]
    G = [[y.one()]]
    assert ci.iota_alpha(y.one(), G, model) == ci.iota_alpha_chain(y.one(), G, model)
    assert ci.iota_alpha(y.one(), G, model).constant_term() == 1


def test_iota_alpha_diagonal():
    model = ci.FiniteFlatModel("identity", 2, 27, nparams=1)
    t = ModPoly.var(3, 27, 2, 1, model._ynames())
    f1, f2 = t + 1, t * t + 2
    ys = [model.y(0), model.y(1)]
    model.z_images = [f1 * ys[0], f2 * ys[1]]
    G = [[f1, model.ring_Y()], [model.ring_Y(), f2]]
    phi = t + 3
    want = model.bar(phi * f1 * f2)
    assert ci.iota_alpha(phi, G, model) == want == ci.iota_alpha_chain(phi, G, model)


@given(st.integers(0, 10**6), st.sampled_from(("identity", "frobenius")), st.sampled_from((1, 2)))
def test_iota_alpha_routes_agree(seed, kind, d):
    rng = random.Random(seed)
    if kind == "identity":
        model = ci.FiniteFlatModel("identity", d, 27, nparams=1)
        G = ci.random_unit_G(model, rng)
        ys = [model.y(i) for i in range(d)]
        model.z_images = [sum((G[i][j] * ys[j] for j in range(d)), model.ring_Y()) for i in range(d)]
    else:
        model = ci.FiniteFlatModel("frobenius", d, 27, q=3, nparams=1)
        G = ci.frobenius_G(model, rng)
    phi = ci.random_functional(model, rng)
    assert ci.iota_alpha(phi, G, model) == ci.iota_alpha_chain(phi, G, model)


# -- mu ----------------------------------------------------------------------

@pytest.mark.parametrize("q", (2, 3, 5))
def test_mu_composite_matches_closed_form(q):
    rep = ci.compare_mu(q)
    assert rep.passed, rep.checks


@pytest.mark.parametrize("q", (2, 3))
def test_mu_two_dimensional(q):
    assert ci.compare_mu(q, 2).passed


@pytest.mark.parametrize("q,sign", [(2, -1), (3, 1), (5, 1)])
def test_mu_factor_sign(q, sign):
    # (Hx^-(q-1))'(d'x^(q-1)) and the leading coefficient of F in powers of d'x
    comp = ci.mu_via_composite(q)
    assert comp["factor_sign"] == sign == comp["leading_coeff"]


def test_mu_of_dx():
    one = LaurentPoly.constant(SMALL.ring(), 1, 1, Caps.uniform(1, -6, 12, 12))
    elt = ci.mu_M(one, "m", SMALL)
    vol, gen, func = elt.factors
    assert (vol.value, gen.value) == ("dx'", "m")
    H2 = dwork_dual(2, SMALL)
    for j in range(10):
        f = LaurentPoly.monomial(SMALL.ring(), (j,), 1, func.value.caps)
        assert apply(func.value, f).agrees_mod(apply(H2.with_caps(func.value.caps), f), 8)
    assert str(elt).startswith("dx' (x)_O_X' m")


def test_mu_nu_round_trip():
    rng = random.Random(1)
    caps = Caps.uniform(1, SMALL.lo, SMALL.hi, SMALL.hi)
    for _ in range(20):
        f = LaurentPoly(SMALL.ring(), 1, {(rng.randint(0, 4),): rng.randint(-20, 20) for _ in range(3)}, caps)
        back = ci.nu_N(ci.nu_input_from_mu(ci.mu_M(f, "m", SMALL)), SMALL)
        assert back.factors[0].value.agrees_mod(f, 8)
        assert back.factors[2].value == "m"


def test_nu_rejects_wrong_shape():
    one = LaurentPoly.constant(SMALL.ring(), 1, 1, Caps.uniform(1, -6, 12, 12))
    with pytest.raises(DomainError):
        ci.nu_N(ci.mu_M(one, "m", SMALL), SMALL)


@pytest.mark.parametrize("k", range(3))
def test_functional_identity(k):
    assert ci.mu_functional_identity(SMALL, k)


# -- chi and xi0 -------------------------------------------------------------

def _one_f(params=SMALL):
    return LaurentPoly.constant(params.ring(), 1, 1, Caps.uniform(1, params.lo, params.hi, params.hi), ("y",))


def _one_P(params=SMALL):
    return DiffOp.identity(params.ring(), 1, Caps.uniform(1, params.lo, params.hi, params.hi), ("y'",))


def test_chi_basic_instance():
    elt = ci.chi(_one_f(), _one_P(), 2, SMALL)
    fn, op, dual, vol = elt.factors
    assert [a for a, _ in fn.value] == [(0,)]
    H2 = dwork_dual(2, SMALL)
    for j in range(10):
        f = LaurentPoly.monomial(SMALL.ring(), (j,), 1, op.value.caps)
        assert apply(op.value.renamed(("x",)), f).agrees_mod(apply(H2.with_caps(op.value.caps), f), 8)
    assert (dual.value, vol.value) == ("(dy)^v", "dx")
    with pytest.raises(DomainError):
        ci.chi(_one_f(), _one_P(), 3, SMALL)


def test_chi_linearity():
    c1 = ci.chi(_one_f().scale(7), _one_P(), 1, SMALL)
    c2 = ci.chi(_one_f(), _one_P(), 1, SMALL)
    assert c1.factors[1].value.agrees_mod(c2.factors[1].value.scale(7), 8)


def test_xi0_basic_instance():
    elt = ci.xi0(0, _one_P(), "m", SMALL)
    assert [a for a, _ in elt.factors[4].value] == [(2,)]
    assert elt.factors[5].value == "m"
    assert elt.seps == ("O_Y", "O_Y", "O_X", "D_X", "O_X")


def test_xi0_is_linear_in_P():
    ring = SMALL.ring()
    caps = Caps.uniform(1, SMALL.lo, SMALL.hi, SMALL.hi)
    d = DiffOp.d(ring, 1, 0, 1, caps, ("y'",))
    a = ci.xi0(1, d + _one_P(), "m", SMALL).factors[1].value
    b = ci.xi0(1, d, "m", SMALL).factors[1].value + ci.xi0(1, _one_P(), "m", SMALL).factors[1].value
    assert a.agrees_mod(b, 8)


@pytest.mark.parametrize("l", (0, 1, 2))
def test_chi_route_recombines_to_xi0(l):
    ring = SMALL.ring()
    caps = Caps.uniform(1, SMALL.lo, SMALL.hi, SMALL.hi)
    P = DiffOp.d(ring, 1, 0, 1, caps, ("y'",))
    x0 = ci.xi0(l, P, "m", SMALL)
    w = ci.partition_weights(SMALL)
    assert [str(v) for v in w] == ["1", "0", "0"]
    terms = [(w[k], ci.xi0_intermediate(l, P, "m", k, SMALL)) for k in range(3)]
    assert ci.recombine(terms, 8).agrees(x0, 8)


def test_partition_weights():
    assert [str(v) for v in ci.partition_weights(SMALL, 1)] == ["0", "1", "0"]
    # Hx^-1(x^4) = x^3 is not a scalar
    with pytest.raises(DomainError):
        ci.partition_weights(SMALL, 4)


def test_move_function_rules():
    elt = ci.xi0_intermediate(0, _one_P(), "m", 1, SMALL)
    moved = elt.move_function(0, 4)
    assert [a for a, _ in moved.factors[4].value] == [(2,)]  # x^(q-k-1) x^k = x^(q-1)
    bad = ci.StructuredElt(elt.factors, ("O_Y", "O_Y", "O_X", "O_Y", "O_X"), elt.space)
    with pytest.raises(DomainError):
        bad.move_function(0, 4)
    with pytest.raises(DomainError):
        elt.move_function(1, 4)


# -- scalar identities -------------------------------------------------------

@pytest.mark.parametrize("p", (2, 3, 5))
def test_ts_identity(p):
    rep = ci.ts_identity(TruncationParams(p=p, N=8))
    assert rep.passed, rep.checks


def test_ts_display_with_zeta_minus_one_is_not_one():
    rep = ci.ts_identity(TruncationParams(p=3, N=8))
    assert rep.witness["literal_equals_1"] is False


@pytest.mark.parametrize("p", (2, 3, 5))
def test_binomial_identity(p):
    rep = ci.binomial_identity(TruncationParams(p=p, N=8))
    assert rep.passed, rep.checks


def test_binomial_identity_with_one_minus_zeta_fails():
    params = TruncationParams(p=3, N=8)
    ring = params.ring()
    total = ring.zero()
    for z in roots_of_unity(3, ring):
        for k in range(80):
            total = total + (1 - z) ** k * binom(-3, k)
    assert not (total / 3).agrees_mod(ring.one(), 8)


# -- twists ------------------------------------------------------------------

def test_twist_examples():
    psi = ci.FrobeniusScalar(Fraction(1), 3)
    assert ci.twist(psi, 1).value == Fraction(1, 3)
    assert ci.twist(psi, 2).twist == 2
    assert (ci.twist(psi, 1) * ci.twist(psi, 1)).value == ci.twist(psi, 2).value


def test_commute_up_to():
    I = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    two = [[Fraction(2), Fraction(0)], [Fraction(0), Fraction(2)]]
    assert ci.commute_up_to([I], [I]) == 1
    assert ci.commute_up_to([I, I], [two]) == 2
    assert ci.commute_up_to([I], [[[Fraction(1), Fraction(1)], [Fraction(0), Fraction(1)]]]) is None
    Z = [[Fraction(0)] * 2] * 2
    with pytest.raises(Ambiguous):
        ci.commute_up_to([Z], [Z])


@pytest.mark.parametrize("d,q", [(1, 2), (1, 3), (2, 2), (2, 3)])
def test_frobenius_twist_ratio(d, q):
    rep = ci.frobenius_twist_ratio(d, q)
    assert rep.passed and rep.witness["ratio"] == str(q ** d)
