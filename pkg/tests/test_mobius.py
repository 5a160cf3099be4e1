import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clifford_szego.clifford import gp_arrays, paravector_arrays
from clifford_szego.mobius import (
    NonUniqueNearestPoint,
    SingularPointError,
    VahlenMatrix,
    apply,
    automorphy_factor,
    compose,
    conformal_scale,
    fd_jacobian,
    helper_map,
    inverse,
    inversion_maps,
    nearest_boundary_point,
    paravector_factorization,
    validate,
)
from clifford_szego.quadrature import BoundarySurface

coords = st.floats(-0.7, 0.7)


def direct_helper(z, C, r0):
    # r0 (z - C)^{-1} = r0 conj(z - C) / |z - C|^2
    x = z - C
    return r0 * np.r_[x[0], -x[1:]] / (x @ x)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_helper_matches_direct_formula(m, rng):
    V = helper_map(m)
    C = np.zeros(m + 1)
    C[1] = 2.0
    for z in rng.uniform(-0.6, 0.6, size=(10, m + 1)):
        np.testing.assert_allclose(apply(V, z), direct_helper(z, C, 0.5), atol=1e-14)


def test_helper_image_sphere():
    S = BoundarySurface(2, vahlen=helper_map(2))
    c, r = S.image_sphere()
    np.testing.assert_allclose(c, [0.0, 1 / 3, 0.0], atol=1e-14)
    assert r == pytest.approx(1 / 6, abs=1e-14)
    pts = S.boundary_map(np.random.default_rng(0).normal(size=(50, 3)) / 1.0)
    # boundary_map expects unit directions
    U = np.random.default_rng(1).normal(size=(50, 3))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    pts = S.boundary_map(U)
    np.testing.assert_allclose(np.linalg.norm(pts - c, axis=1), 1 / 6, atol=1e-13)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_validate_standard_maps(m):
    t = np.linspace(0.1, 0.4, m + 1)
    for V in (VahlenMatrix.identity(m), VahlenMatrix.translation(t), VahlenMatrix.dilation(m, 2.5)):
        assert validate(V).ok
    H = helper_map(m)
    diag = validate(H)
    assert diag.pseudo_determinant == pytest.approx(-1.0)
    assert diag["pseudo_determinant"].passed is False
    assert validate(H, allow_reflection=True).ok


def test_validate_rejects_bad_determinant():
    V = VahlenMatrix.from_entries(2, 2.0, 0.0, 0.0, 1.0)
    assert not validate(V).ok


def test_inverse_and_compose(rng):
    m = 2
    H = helper_map(m)
    T = VahlenMatrix.translation(np.array([0.1, -0.2, 0.3]))
    D = VahlenMatrix.dilation(m, 0.7)
    z = rng.uniform(-0.5, 0.5, size=(8, 3))
    np.testing.assert_allclose(apply(inverse(H), apply(H, z)), z, atol=1e-13)
    HT = compose(H, compose(T, D))
    np.testing.assert_allclose(apply(HT, z), apply(H, apply(T, apply(D, z))), atol=1e-13)
    I = compose(H, inverse(H))
    np.testing.assert_allclose(apply(I, z), z, atol=1e-13)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_conformality(m, rng):
    H = helper_map(m)
    for z in rng.uniform(-0.6, 0.6, size=(4, m + 1)):
        J = fd_jacobian(H, z)
        s = conformal_scale(H, z)
        np.testing.assert_allclose(J.T @ J, s**2 * np.eye(m + 1), atol=1e-8)


def test_pole_raises():
    H = helper_map(2)
    with pytest.raises(SingularPointError):
        apply(H, np.array([0.0, 2.0, 0.0]))


def test_automorphy_factor_identity_and_translation(rng):
    z = rng.uniform(-1, 1, size=(5, 3))
    for V in (VahlenMatrix.identity(2), VahlenMatrix.translation(np.array([0.3, 0.0, 1.0]))):
        A = automorphy_factor(V, z, 3)
        np.testing.assert_allclose(A, np.tile([1.0, 0, 0, 0], (5, 1)))


def test_inversion_maps():
    C = np.array([0.0, 2.0, 0.0])
    r0 = 0.5
    i_P, j_P = inversion_maps(C, C, r0)
    u = np.array([[0.3, 0.4, 0.0], [0.0, 0.0, 0.5], [-0.5, 0.0, 0.0]])
    on_sphere = C + u
    np.testing.assert_allclose(np.linalg.norm(apply(i_P, on_sphere) - C, axis=1), r0, atol=1e-14)
    z = np.array([[0.2, 0.1, -0.3]])
    np.testing.assert_allclose(apply(j_P, apply(i_P, z))[0], direct_helper(z[0], C, r0), atol=1e-14)
    assert validate(i_P, allow_reflection=True).ok
    assert validate(j_P).ok
    with pytest.raises(ValueError):
        inversion_maps(C, C, 0.0)


def test_helper_center_must_be_outside():
    with pytest.raises(ValueError):
        helper_map(2, np.array([0.0, 0.5, 0.0]))


def test_nearest_boundary_point_ball():
    B = BoundarySurface.ball(2)
    z = np.array([0.3, 0.4, 0.0])
    tb = nearest_boundary_point(B, z)
    np.testing.assert_allclose(tb.P, [0.6, 0.8, 0.0])
    assert tb.delta == pytest.approx(0.5)
    np.testing.assert_allclose(tb.C, 1.5 * tb.P)
    assert tb.check() < 1e-12
    with pytest.raises(NonUniqueNearestPoint):
        nearest_boundary_point(B, np.zeros(3))


def test_nearest_boundary_point_on_image():
    S = BoundarySurface(2, vahlen=helper_map(2))
    c, r = S.image_sphere()
    z = c + np.array([0.05, 0.03, -0.02])
    tb = nearest_boundary_point(S, z)
    expected = c + r * (z - c) / np.linalg.norm(z - c)
    np.testing.assert_allclose(tb.P, expected, atol=1e-6)


def test_dict_round_trip():
    H = helper_map(3)
    H2 = VahlenMatrix.from_dict(H.to_dict())
    z = np.array([0.1, 0.2, -0.1, 0.05])
    np.testing.assert_array_equal(apply(H, z), apply(H2, z))


@given(st.lists(coords, min_size=3, max_size=3), st.lists(coords, min_size=3, max_size=3))
def test_factorization_of_paravector_products(p, q):
    m = 2
    p, q = np.array(p) + np.r_[1.0, 0, 0], np.array(q) + np.r_[0, 1.0, 0]
    x = gp_arrays(paravector_arrays(p, m), paravector_arrays(q, m), m)
    f = paravector_factorization(x, m)
    assert f is not None
    prod = paravector_arrays(f[0], m)
    for g in f[1:]:
        prod = gp_arrays(prod, paravector_arrays(g, m), m)
    np.testing.assert_allclose(prod, x, atol=1e-9)
