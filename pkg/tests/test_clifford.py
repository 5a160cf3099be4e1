from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clifford_szego.clifford import (
    Multivector,
    Paravector,
    SignatureError,
    algebra,
    blade_sign,
    conjugate,
    gp_arrays,
    left_matrix,
    multivector_inverse,
    norm,
    paravector_inverse,
    random_multivector,
    scalar_product,
)

ms = st.integers(1, 3)
small = st.integers(-9, 9)


def mv(m, data, exact=False):
    dim = algebra(m).dim
    vals = data.draw(st.lists(small, min_size=dim, max_size=dim))
    if exact:
        dens = data.draw(st.lists(st.integers(1, 6), min_size=dim, max_size=dim))
        return Multivector(m, [Fraction(v, d) for v, d in zip(vals, dens)], exact=True)
    return Multivector(m, [float(v) / 4 for v in vals])


def test_generators_square_to_minus_one():
    for m in (1, 2, 3):
        for i in range(1, m + 1):
            e = Multivector.blade(m, [i], exact=True)
            assert e * e == Multivector.scalar(m, -1, exact=True)


def test_quaternion_table():
    # Cl_02 is the quaternions with i = e1, j = e2, k = e12
    i, j = Multivector.blade(2, [1]), Multivector.blade(2, [2])
    k = Multivector.blade(2, [1, 2])
    assert i * j == k
    assert j * k == i
    assert k * i == j
    assert k * k == Multivector.scalar(2, -1.0)


def _quat(c):
    # (1, e1, e2, e12) -> numpy quaternion components (w, x, y, z)
    return np.array([c[0], c[1], c[2], c[3]])


def _hamilton(p, q):
    w1, x1, y1, z1 = p
    w2, x2, y2, z2 = q
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def test_product_matches_hamilton_oracle(rng):
    for _ in range(20):
        a, b = rng.standard_normal(4), rng.standard_normal(4)
        np.testing.assert_allclose(gp_arrays(a, b, 2), _hamilton(_quat(a), _quat(b)), atol=1e-14)


def test_m1_is_complex_numbers(rng):
    for _ in range(10):
        a, b = rng.standard_normal(2), rng.standard_normal(2)
        p = (a[0] + 1j * a[1]) * (b[0] + 1j * b[1])
        np.testing.assert_allclose(gp_arrays(a, b, 1), [p.real, p.imag], atol=1e-14)


def test_blade_sign_examples():
    # e2 e1 = -e1 e2, e1 e12 = -e2, e12 e12 = -1
    assert blade_sign(2, 1) == -1
    assert blade_sign(1, 2) == 1
    assert blade_sign(1, 3) == -1
    assert blade_sign(3, 3) == -1


@given(st.data(), ms)
def test_associativity_exact(data, m):
    a, b, c = (mv(m, data, exact=True) for _ in range(3))
    assert (a * b) * c == a * (b * c)


@given(st.data(), ms)
def test_distributivity_exact(data, m):
    a, b, c = (mv(m, data, exact=True) for _ in range(3))
    assert a * (b + c) == a * b + a * c
    assert (b + c) * a == b * a + c * a


@given(st.data(), ms)
def test_conjugation_is_anti_automorphism(data, m):
    a, b = mv(m, data, exact=True), mv(m, data, exact=True)
    assert conjugate(a * b) == conjugate(b) * conjugate(a)
    assert conjugate(conjugate(a)) == a


@given(st.data(), ms)
def test_scalar_product_is_coefficient_dot(data, m):
    a, b = mv(m, data, exact=True), mv(m, data, exact=True)
    assert scalar_product(a, b) == sum(x * y for x, y in zip(a.coeffs, b.coeffs))
    assert scalar_product(a, b) == scalar_product(b, a)


@given(st.data(), ms)
def test_exact_and_float_agree(data, m):
    a, b = mv(m, data, exact=True), mv(m, data, exact=True)
    np.testing.assert_allclose((a * b).coeffs.astype(float), (a.to_float() * b.to_float()).coeffs, atol=1e-12)


@given(st.data(), ms)
def test_paravector_norm_multiplicative(data, m):
    z = data.draw(st.lists(st.floats(-3, 3), min_size=m + 1, max_size=m + 1))
    w = data.draw(st.lists(st.floats(-3, 3), min_size=m + 1, max_size=m + 1))
    x, y = Paravector(z).to_multivector(), Paravector(w).to_multivector()
    assert norm(x * y) == pytest.approx(norm(x) * norm(y), rel=1e-12, abs=1e-12)


def test_paravector_inverse_exact():
    z = Paravector([Fraction(1, 2), Fraction(-3, 4), Fraction(2, 5)])
    prod = z.to_multivector() * paravector_inverse(z).to_multivector()
    assert prod == Multivector.scalar(2, 1, exact=True)


def test_multivector_inverse_and_left_matrix(rng):
    for m in (1, 2, 3):
        a = random_multivector(m, rng)
        b = random_multivector(m, rng)
        np.testing.assert_allclose(left_matrix(a.coeffs, m) @ b.coeffs, (a * b).coeffs, atol=1e-12)
        one = a * multivector_inverse(a)
        np.testing.assert_allclose(one.coeffs, np.eye(algebra(m).dim)[0], atol=1e-10)


def test_signature_mismatch_raises():
    with pytest.raises(SignatureError):
        Multivector.blade(2, [1]) * Multivector.blade(3, [1])


def test_bad_generator_and_dimension():
    with pytest.raises(ValueError):
        Multivector.blade(2, [3])
    with pytest.raises(ValueError):
        algebra(0)


def test_paravector_projection():
    a = Multivector.from_dict(2, {(): 1.0, (1,): 2.0, (1, 2): 0.5})
    assert not a.is_paravector()
    with pytest.raises(ValueError):
        Paravector.from_multivector(a)
    p = Paravector([1.0, 2.0, -1.0])
    assert Paravector.from_multivector(p.to_multivector()).components.tolist() == [1.0, 2.0, -1.0]
    assert p.conj().components.tolist() == [1.0, -2.0, 1.0]
