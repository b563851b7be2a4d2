"""Graded algebra layer: wedge, d, contraction nesting, brackets, pullback."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from framecalc.extcalc import (
    Chart,
    Form,
    MultiVector,
    contract_factors,
    exterior_derivative,
    interior_product,
    is_locally_hamiltonian,
    lie_bracket,
    lie_derivative,
    pullback,
    schouten_nijenhuis,
    volume_forms,
    wedge,
)
from framecalc.symcore import Poly, random_polynomial


def base_chart(n: int) -> Chart:
    return Chart([(f"x{m}", "x", (m,)) for m in range(n)])


CH3 = base_chart(3)
CH4 = base_chart(4)


def dxs(ch):
    return [Form.d_coord(ch, v) for v in ch.role_vars("x")]


def dels(ch):
    return [MultiVector.basis_vector(ch, v) for v in ch.role_vars("x")]


def rand_poly(ch, seed, degree=2):
    return random_polynomial(list(ch.role_vars("x")), degree, seed, space=ch)


def rand_form(ch, degree, seed):
    """Random form of the given degree with polynomial coefficients."""
    rng = random.Random(seed)
    out = Form.zero(ch, degree)
    diffs = dxs(ch)
    n = len(diffs)
    import itertools

    for keys in itertools.combinations(range(n), degree):
        term = Form(ch, 0, {(): rand_poly(ch, rng.randrange(2**31))})
        for k in keys:
            term = wedge(term, diffs[k])
        out = out + term
    return out


def rand_vector(ch, seed):
    rng = random.Random(seed)
    out = MultiVector.zero(ch, 1)
    for b in dels(ch):
        out = out + b.scale(rand_poly(ch, rng.randrange(2**31)))
    return out


# --- the sign anchor runs before everything else ---------------------------


def test_contraction_nesting_sign_anchor():
    # (d_x ^ d_y) _| (dx ^ dy) = +1: the first factor contracts innermost.
    dx, dy, _ = dxs(CH3)
    ex, ey, _ = dels(CH3)
    got = interior_product(ex.wedge(ey), wedge(dx, dy))
    assert got == Form(CH3, 0, {(): Poly.const(1, CH3)})
    # iterated route must agree
    assert contract_factors([ex, ey], wedge(dx, dy)) == got


# --- wedge ------------------------------------------------------------------


def test_wedge_self_annihilates():
    dx = dxs(CH3)[0]
    assert wedge(dx, dx).is_zero()


def test_wedge_anticommutes_in_degree_one():
    dx, dy, _ = dxs(CH3)
    assert wedge(dx, dy) == -wedge(dy, dx)


def test_top_wedge_is_volume():
    diffs = dxs(CH4)
    top = diffs[0]
    for f in diffs[1:]:
        top = wedge(top, f)
    beta, _, _ = volume_forms(CH4)
    assert top == beta


def test_wedge_degree_overflow_is_zero():
    beta, _, _ = volume_forms(CH3)
    assert wedge(beta, dxs(CH3)[0]).is_zero()


# --- exterior derivative ----------------------------------------------------


def test_d_of_x_dy():
    dx, dy, _ = dxs(CH3)
    x = CH3.poly_var("x0")
    assert exterior_derivative(dy.scale(x)) == wedge(dx, dy)


def test_d_squared_zero_spot():
    al = rand_form(CH3, 1, 77)
    assert exterior_derivative(exterior_derivative(al)).is_zero()


# --- interior product -------------------------------------------------------


def test_vector_contraction_basic():
    dx, dy, _ = dxs(CH3)
    ex = dels(CH3)[0]
    assert interior_product(ex, wedge(dx, dy)) == dy


def test_contraction_degree_overflow():
    dx = dxs(CH3)[0]
    ex, ey, _ = dels(CH3)
    assert interior_product(ex.wedge(ey), dx).is_zero()


def test_double_contraction_equal_index_zero():
    beta, beta_mu, _ = volume_forms(CH3)
    ex = dels(CH3)[0]
    assert interior_product(ex, beta_mu[0]).is_zero()


# --- volume form families ---------------------------------------------------


def test_first_dual_leg_n3():
    # contraction of the first base direction out of the volume form
    _, beta_mu, _ = volume_forms(CH3)
    _, dy, dz = dxs(CH3)
    assert beta_mu[0] == wedge(dy, dz)


def test_second_dual_legs_match_nested_contraction():
    for ch in (CH3, CH4):
        beta, beta_mu, beta_munu = volume_forms(ch)
        vs = dels(ch)
        n = ch.dim
        for mu in range(n):
            for nu in range(n):
                want = interior_product(vs[mu], beta_mu[nu])
                assert beta_munu[(mu, nu)] == want
                # wedge route: (d_nu ^ d_mu) _| beta, first factor innermost
                alt = interior_product(vs[nu].wedge(vs[mu]), beta)
                assert beta_munu[(mu, nu)] == alt


def test_one_form_wedge_second_dual_leg_identity():
    # dx^a ^ beta_{rn} = delta^a_r beta_n - delta^a_n beta_r
    for ch in (CH3, CH4):
        diffs = dxs(ch)
        _, beta_mu, beta_munu = volume_forms(ch)
        n = ch.dim
        for a in range(n):
            for r in range(n):
                for nu in range(n):
                    lhs = wedge(diffs[a], beta_munu[(r, nu)])
                    rhs = Form.zero(ch, n - 1)
                    if a == r:
                        rhs = rhs + beta_mu[nu]
                    if a == nu:
                        rhs = rhs - beta_mu[r]
                    assert lhs == rhs


# --- Lie bracket and derivative ---------------------------------------------


def test_lie_bracket_coordinate_fields_commute():
    ex, ey, _ = dels(CH3)
    assert lie_bracket(ex, ey).is_zero()


def test_lie_bracket_weighted_field():
    ex, ey, _ = dels(CH3)
    x = CH3.poly_var("x0")
    assert lie_bracket(ey.scale(x), ex) == -ey


def test_lie_bracket_degree_guard():
    ex, ey, _ = dels(CH3)
    with pytest.raises(ValueError):
        lie_bracket(ex.wedge(ey), ex)


def test_lie_derivative_basic():
    _, dy, _ = dxs(CH3)
    ex = dels(CH3)[0]
    x = CH3.poly_var("x0")
    assert lie_derivative(ex, dy.scale(x)) == dy


def test_lie_derivative_product_rule():
    v = rand_vector(CH3, 3)
    al = rand_form(CH3, 1, 4)
    ga = rand_form(CH3, 1, 5)
    lhs = lie_derivative(v, wedge(al, ga))
    rhs = wedge(lie_derivative(v, al), ga) + wedge(al, lie_derivative(v, ga))
    assert lhs == rhs


# --- Schouten bracket --------------------------------------------------------


def test_schouten_reduces_to_lie():
    v = rand_vector(CH3, 21)
    w = rand_vector(CH3, 22)
    assert schouten_nijenhuis(v, w) == lie_bracket(v, w)


def test_schouten_anchor_sign():
    ex, ey, ez = dels(CH3)
    x = CH3.poly_var("x0")
    got = schouten_nijenhuis(ey.scale(x), ex.wedge(ez))
    assert got == -(ey.wedge(ez))


def decomposable(ch, degree, seed):
    rng = random.Random(seed)
    out = None
    for _ in range(degree):
        v = rand_vector(ch, rng.randrange(2**31))
        out = v if out is None else out.wedge(v)
    return out


def test_schouten_graded_antisymmetry():
    for s in range(5):
        U = decomposable(CH3, 2, 100 + s)
        V = rand_vector(CH3, 200 + s)
        lhs = schouten_nijenhuis(U, V)
        rhs = schouten_nijenhuis(V, U).scale(
            Fraction(-((-1) ** ((U.degree - 1) * (V.degree - 1))))
        )
        assert lhs == rhs


def test_schouten_graded_leibniz():
    # [U, V ^ W] = [U, V] ^ W + (-1)^((p-1) q) V ^ [U, W]
    for s in range(5):
        U = decomposable(CH3, 2, 300 + s)
        V = rand_vector(CH3, 400 + s)
        W = rand_vector(CH3, 500 + s)
        p, q = U.degree, V.degree
        lhs = schouten_nijenhuis(U, V.wedge(W))
        rhs = schouten_nijenhuis(U, V).wedge(W) + V.wedge(
            schouten_nijenhuis(U, W)
        ).scale(Fraction((-1) ** ((p - 1) * q)))
        assert lhs == rhs


def test_schouten_graded_jacobi():
    # shifted degrees d = deg - 1; cyclic identity with signs (-1)^(d1 d3)
    for s in range(3):
        A = rand_vector(CH3, 600 + s)
        B = rand_vector(CH3, 700 + s)
        C = decomposable(CH3, 2, 800 + s)
        d1, d2, d3 = A.degree - 1, B.degree - 1, C.degree - 1
        t1 = schouten_nijenhuis(A, schouten_nijenhuis(B, C)).scale(
            Fraction((-1) ** (d1 * d3))
        )
        t2 = schouten_nijenhuis(B, schouten_nijenhuis(C, A)).scale(
            Fraction((-1) ** (d2 * d1))
        )
        t3 = schouten_nijenhuis(C, schouten_nijenhuis(A, B)).scale(
            Fraction((-1) ** (d3 * d2))
        )
        total = t1 + t2 + t3
        assert total.is_zero()


def test_schouten_degree_zero_rules():
    f = rand_poly(CH3, 31)
    U = decomposable(CH3, 2, 32)
    fU = MultiVector(CH3, 0, {(): f})
    lhs = schouten_nijenhuis(fU, U)
    rhs = schouten_nijenhuis(U, fU).scale(Fraction((-1) ** U.degree))
    assert lhs == rhs


# --- pullback ----------------------------------------------------------------


def test_pullback_identity():
    al = rand_form(CH3, 2, 41)
    ident = {v: Poly.variable(v, CH3) for v in CH3.role_vars("x")}
    assert pullback(ident, al, CH3) == al


def test_pullback_killing_coordinate():
    dx, dy, _ = dxs(CH3)
    al = wedge(dx, dy)
    images = {CH3.var("x0"): Poly.zero(CH3)}
    assert pullback(images, al, CH3).is_zero()


def test_pullback_commutes_with_d_spot():
    tgt = Chart([("u", "x", (0,)), ("v", "x", (1,))])
    pu, pv = tgt.poly_var("u"), tgt.poly_var("v")
    images = {
        CH3.var("x0"): pu * pu,
        CH3.var("x1"): pu * pv + pv,
        CH3.var("x2"): pv * pv * pv,
    }
    al = rand_form(CH3, 1, 55)
    lhs = pullback(images, exterior_derivative(al), tgt)
    rhs = exterior_derivative(pullback(images, al, tgt))
    assert lhs == rhs


# --- local Hamiltonicity helper ----------------------------------------------


def test_locally_hamiltonian_residuals():
    dx, dy, _ = dxs(CH3)
    ex, ey, ez = dels(CH3)
    om = wedge(dx, dy)
    assert is_locally_hamiltonian(ex, om).is_zero()
    x = CH3.poly_var("x0")  # contraction gives x0 dy, whose d is dx^dy
    bad = ex.scale(x)
    assert not is_locally_hamiltonian(bad, om).is_zero()


# --- randomized properties ----------------------------------------------------

seeds = st.integers(min_value=0, max_value=2**31 - 1)


@settings(max_examples=24, deadline=None, derandomize=True)
@given(seeds, st.integers(min_value=0, max_value=2))
def test_d_squared_always_zero(seed, degree):
    al = rand_form(CH3, degree, seed)
    assert exterior_derivative(exterior_derivative(al)).is_zero()


@settings(max_examples=24, deadline=None, derandomize=True)
@given(seeds, seeds, seeds)
def test_contraction_graded_derivation(s1, s2, s3):
    v = rand_vector(CH3, s1)
    al = rand_form(CH3, 1, s2)
    ga = rand_form(CH3, 2, s3)
    lhs = interior_product(v, wedge(al, ga))
    rhs = wedge(interior_product(v, al), ga) + wedge(
        al, interior_product(v, ga)
    ).scale(Fraction((-1) ** al.degree))
    assert lhs == rhs


@settings(max_examples=24, deadline=None, derandomize=True)
@given(seeds, seeds, seeds)
def test_wedge_associative_and_graded_commutative(s1, s2, s3):
    a = rand_form(CH4, 1, s1)
    b = rand_form(CH4, 1, s2)
    c = rand_form(CH4, 2, s3)
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))
    assert wedge(a, c) == wedge(c, a)  # (-1)^(1*2) = +1
    assert wedge(a, b) == -wedge(b, a)


@settings(max_examples=24, deadline=None, derandomize=True)
@given(seeds)
def test_pullback_commutes_with_d(seed):
    tgt = Chart([("u", "x", (0,)), ("v", "x", (1,))])
    rng = random.Random(seed)
    uv = list(tgt.role_vars("x"))
    images = {
        v: random_polynomial(uv, 2, rng.randrange(2**31), space=tgt)
        for v in CH3.role_vars("x")
    }
    al = rand_form(CH3, 1, rng.randrange(2**31))
    assert pullback(images, exterior_derivative(al), tgt) == exterior_derivative(
        pullback(images, al, tgt)
    )


@settings(max_examples=10, deadline=None, derandomize=True)
@given(seeds)
def test_cartan_formula_consistency(seed):
    v = rand_vector(CH3, seed)
    al = rand_form(CH3, 2, seed + 1)
    lhs = lie_derivative(v, al)
    rhs = exterior_derivative(interior_product(v, al)) + interior_product(
        v, exterior_derivative(al)
    )
    assert lhs == rhs
