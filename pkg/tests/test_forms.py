import random
from fractions import Fraction
from itertools import combinations, permutations

import pytest
from hypothesis import given, strategies as st

from ndga import forms, scalar
from ndga.forms import (
    Connection, FormError, MatrixForm,
    basis_one_form, brute_force_flatness_order, connection_from_coefficients,
    curvature, exterior_d, identity_form, is_n_flat, minimal_flatness_order,
    nabla_apply, nabla_power, ordered_pairings, pairing_flatness_certificate,
    pairing_power_form, pairing_sum, scalar_form, tensor_connection, wedge,
    wedge_power, zero_form,
)
from ndga.scalar import ZERO, var

x1, x2 = var(1), var(2)

E11 = ((1, 0), (0, 0))
E12 = ((0, 1), (0, 0))


def rotation_connection():
    return connection_from_coefficients(4, {1: ((x2,),), 2: ((scalar.negate(x1),),)})


def triangular_connection():
    return connection_from_coefficients(4, {1: E11, 2: E12})


def random_polynomial_connection(rng, base_dim=4, fiber_dim=2, max_terms=2):
    def poly():
        terms = []
        for _ in range(max_terms):
            c = rng.randint(-2, 2)
            if c:
                terms.append(scalar.mul(c, var(rng.randint(1, base_dim))))
        return scalar.add(*terms) if terms else ZERO

    coefficients = {
        i: tuple(tuple(poly() for _ in range(fiber_dim)) for _ in range(fiber_dim))
        for i in range(1, base_dim + 1)
    }
    return connection_from_coefficients(base_dim, coefficients)


# ------------------------------------------------------------------
# wedge
# ------------------------------------------------------------------

def test_wedge_antisymmetry_of_basis_forms():
    a, b = basis_one_form(3, 1), basis_one_form(3, 2)
    assert (wedge(a, b) + wedge(b, a)).is_structurally_zero()
    assert wedge(a, a).is_structurally_zero()


def test_wedge_matrix_product():
    # (E11 dx1) ^ (E12 dx2) = E12 dx1^dx2 because E11 E12 = E12
    a = MatrixForm(2, (2, 2), {(1,): E11})
    b = MatrixForm(2, (2, 2), {(2,): E12})
    product = wedge(a, b)
    assert product.components() == [((1, 2), forms.matrix_of(E12))]


def test_identity_is_a_two_sided_unit():
    one = identity_form(3, 2)
    a = MatrixForm(3, (2, 2), {(1,): E11, (2, 3): ((x1, 0), (0, x2))})
    assert wedge(one, a) == a
    assert wedge(a, one) == a


@given(st.data())
def test_wedge_graded_commutativity_scalar_fiber(data):
    rng = random.Random(data.draw(st.integers(min_value=0, max_value=10**6)))
    n = 3

    def random_scalar_form(degree):
        comps = {}
        for index in combinations(range(1, n + 1), degree):
            c = rng.randint(-2, 2)
            if c:
                comps[index] = scalar.mul(c, var(rng.randint(1, n)))
        return MatrixForm(n, (1, 1), {i: ((e,),) for i, e in comps.items()})

    p = data.draw(st.integers(min_value=0, max_value=2))
    q = data.draw(st.integers(min_value=0, max_value=2))
    a, b = random_scalar_form(p), random_scalar_form(q)
    sign = -1 if (p * q) % 2 else 1
    assert (wedge(a, b) - wedge(b, a).scale(sign)).is_structurally_zero()


def test_wedge_associativity():
    rng = random.Random(5)
    conn = random_polynomial_connection(rng)
    F = curvature(conn)
    left = wedge(wedge(F, conn.form), F)
    right = wedge(F, wedge(conn.form, F))
    assert (left - right).is_zero()


# ------------------------------------------------------------------
# exterior derivative
# ------------------------------------------------------------------

def test_exterior_d_of_scalar_one_form():
    a = scalar_form(2, {(1,): x2})
    d = exterior_d(a)
    assert d.components() == [((1, 2), ((scalar.rational(-1),),))]


def test_d_squared_is_zero():
    rng = random.Random(9)
    for _ in range(5):
        f = scalar.add(*[
            scalar.mul(rng.randint(-3, 3), var(rng.randint(1, 3)), var(rng.randint(1, 3)))
            for _ in range(3)
        ])
        form = scalar_form(3, {(): f})
        assert exterior_d(exterior_d(form)).is_structurally_zero()


def test_graded_leibniz():
    rng = random.Random(13)
    n = 3
    for _ in range(5):
        deg_a = rng.randint(0, 2)
        comps_a = {i: ((scalar.mul(rng.randint(-2, 2), var(rng.randint(1, n))),),)
                   for i in combinations(range(1, n + 1), deg_a)}
        comps_b = {i: ((scalar.mul(rng.randint(-2, 2), var(rng.randint(1, n))),),)
                   for i in combinations(range(1, n + 1), rng.randint(0, 2))}
        a = MatrixForm(n, (1, 1), comps_a)
        b = MatrixForm(n, (1, 1), comps_b)
        lhs = exterior_d(wedge(a, b))
        sign = -1 if deg_a % 2 else 1
        rhs = wedge(exterior_d(a), b) + wedge(a, exterior_d(b)).scale(sign)
        assert (lhs - rhs).is_zero()


def test_d_convention_on_rotation_field():
    # d(x2 dx1 - x1 dx2) = -2 dx1^dx2 under the dx^j ^ dx^i component rule
    conn = rotation_connection()
    d = exterior_d(conn.form)
    assert d.component((1, 2)) == ((scalar.rational(-2),),)


# ------------------------------------------------------------------
# curvature, covariant powers, flatness
# ------------------------------------------------------------------

def test_zero_connection_curvature():
    conn = connection_from_coefficients(3, {})
    assert curvature(conn).is_structurally_zero()


def test_rotation_curvature_magnitude():
    F = curvature(rotation_connection())
    entry = F.component((1, 2))[0][0]
    assert entry in (scalar.rational(2), scalar.rational(-2))
    assert wedge_power(F, 2).is_zero()


def test_triangular_curvature_is_e12():
    F = curvature(triangular_connection())
    assert F.components() == [((1, 2), forms.matrix_of(E12))]


def test_nabla_is_d_for_zero_connection():
    conn = connection_from_coefficients(3, {}, )
    alpha = MatrixForm(3, (1, 1), {(1,): ((scalar.mul(x1, x2),),)})
    assert nabla_apply(conn, alpha) == exterior_d(alpha)


def test_nabla_squared_equals_curvature_action():
    rng = random.Random(21)
    conn = random_polynomial_connection(rng)
    F = curvature(conn)
    alpha = MatrixForm(4, (2, 1), {
        (): ((x1,), (scalar.mul(x2, var(3)),)),
        (3,): ((scalar.ONE,), (ZERO,)),
    })
    assert (nabla_power(conn, alpha, 2) - wedge(F, alpha)).is_zero()


def test_triangular_annihilates_dx1_section():
    conn = triangular_connection()
    alpha = MatrixForm(4, (2, 1), {(1,): ((scalar.ONE,), (ZERO,))})
    assert nabla_power(conn, alpha, 2).is_zero()


@pytest.mark.parametrize("n,expected", [(2, False), (3, False), (4, True), (5, True)])
def test_rotation_flatness_orders(n, expected):
    assert is_n_flat(rotation_connection(), n) is expected


@pytest.mark.parametrize("n,expected", [(2, False), (3, False), (4, True)])
def test_triangular_flatness_orders(n, expected):
    assert is_n_flat(triangular_connection(), n) is expected


def test_zero_connection_flat_for_all_orders():
    conn = connection_from_coefficients(4, {})
    assert all(is_n_flat(conn, n) for n in range(2, 9))


def test_minimal_orders():
    assert minimal_flatness_order(rotation_connection()) == 4
    assert minimal_flatness_order(triangular_connection()) == 4


def test_brute_force_agrees_with_certificates():
    rng = random.Random(2024)
    for _ in range(4):
        conn = random_polynomial_connection(rng)
        assert brute_force_flatness_order(conn, 8) == minimal_flatness_order(conn, 8)


def test_block_connections_are_flat_beyond_the_block():
    # curvature supported on the first two coordinates: 2N-flat for N > 2
    conn = connection_from_coefficients(6, {
        1: ((x2, ZERO), (ZERO, x1)),
        2: ((scalar.mul(x1, x2), x1), (ZERO, x2)),
    })
    F = curvature(conn)
    for index, _ in F.components():
        assert set(index) <= {1, 2}
    assert is_n_flat(conn, 6)
    assert is_n_flat(conn, 8)


# ------------------------------------------------------------------
# ordered pairings and the expansion of curvature powers
# ------------------------------------------------------------------

def _oracle_permutation_sign(seq):
    sign = 1
    items = list(seq)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[i] > items[j]:
                sign = -sign
    return sign


def test_pairing_of_two_elements():
    [p] = ordered_pairings({1, 2})
    assert p.pairs == ((1, 2),) and p.sign == 1


def test_pairings_of_four_elements():
    got = {(p.pairs, p.sign) for p in ordered_pairings({1, 2, 3, 4})}
    assert got == {
        (((1, 2), (3, 4)), 1),
        (((1, 3), (2, 4)), -1),
        (((1, 4), (2, 3)), 1),
    }
    for p in ordered_pairings({1, 2, 3, 4}):
        flattened = [x for pair in p.pairs for x in pair]
        assert p.sign == _oracle_permutation_sign(flattened)


def test_pairing_count_for_six():
    assert len(ordered_pairings(range(1, 7))) == 15


def test_pairing_sum_zero_components():
    total = pairing_sum({}, (1, 2, 3, 4), 2)
    assert all(e == ZERO for row in total for e in row)


def test_pairing_sum_single_component_vanishes_at_k2():
    # only F_12 nonzero: every pairing of {1,2,3,4} uses a zero factor
    comps = {(1, 2): forms.matrix_of(((scalar.rational(-2),),))}
    total = pairing_sum(comps, (1, 2, 3, 4), 1)
    assert total == forms.matrix_of(((ZERO,),))


def test_pairing_power_form_matches_wedge_power():
    rng = random.Random(77)
    conn = random_polynomial_connection(rng)
    F = curvature(conn)
    for k in (1, 2):
        assert (pairing_power_form(F, k) - wedge_power(F, k)).is_zero()


def test_certificate_on_rotation_connection():
    ok, failures = pairing_flatness_certificate(rotation_connection(), 2)
    assert ok and not failures
    ok1, failures1 = pairing_flatness_certificate(rotation_connection(), 1)
    assert not ok1 and failures1 == [(1, 2)]


def test_certificate_for_flat_connection():
    ok, failures = pairing_flatness_certificate(connection_from_coefficients(4, {}), 1)
    assert ok and not failures


def test_certificate_matches_is_n_flat_on_random_connections():
    rng = random.Random(31)
    for _ in range(3):
        conn = random_polynomial_connection(rng)
        for k in (1, 2):
            ok, _ = pairing_flatness_certificate(conn, k)
            assert ok == is_n_flat(conn, 2 * k)


# ------------------------------------------------------------------
# tensor connections
# ------------------------------------------------------------------

def test_tensor_of_zero_connections():
    z = connection_from_coefficients(3, {})
    t = tensor_connection(z, z)
    assert t.form.is_structurally_zero()
    assert t.fiber_dim == 1


def test_tensor_of_flat_connections_is_flat():
    flat = connection_from_coefficients(4, {1: ((scalar.ONE,),)})
    assert minimal_flatness_order(flat) == 2
    t = tensor_connection(flat, flat)
    assert is_n_flat(t, 2)
    assert is_n_flat(t, 3)


def test_tensor_of_rotation_with_itself():
    # the curvature doubles and its square still vanishes: the measured
    # order is 4, well inside the additive bound 4 + 4 - 1 = 7
    t = tensor_connection(rotation_connection(), rotation_connection())
    F = curvature(t)
    assert F.component((1, 2))[0][0] in (scalar.rational(4), scalar.rational(-4))
    assert minimal_flatness_order(t, 8) == 4
    assert is_n_flat(t, 7)


def test_tensor_fiber_dimensions_multiply():
    t = tensor_connection(triangular_connection(), triangular_connection())
    assert t.fiber_dim == 4
    assert minimal_flatness_order(t, 8) == brute_force_flatness_order(t, 8)


def test_tensor_base_mismatch():
    with pytest.raises(FormError):
        tensor_connection(
            connection_from_coefficients(3, {}),
            connection_from_coefficients(4, {}),
        )


# ------------------------------------------------------------------
# connection files
# ------------------------------------------------------------------

def test_parse_connection_round_trip(data_path):
    conn = forms.load_connection(data_path("rotation.conn"))
    assert conn.base_dim == 4 and conn.fiber_dim == 1
    assert conn.coefficient(1) == ((x2,),)
    assert conn.coefficient(2) == ((scalar.negate(x1),),)
    assert conn.coefficient(3) == ((ZERO,),)


def test_parse_connection_errors():
    with pytest.raises(forms.ConnectionFileError, match="line 1"):
        forms.parse_connection("fiber 2\nbase 4\n")
    with pytest.raises(forms.ConnectionFileError, match="line 4"):
        forms.parse_connection("base 2\nfiber 1\nomega 1\nsin(\n")
    with pytest.raises(forms.ConnectionFileError, match="out of range"):
        forms.parse_connection("base 2\nfiber 1\nomega 5\n0\n")


def test_connection_requires_degree_one():
    with pytest.raises(FormError):
        Connection(MatrixForm(2, (1, 1), {(1, 2): ((x1,),)}))
