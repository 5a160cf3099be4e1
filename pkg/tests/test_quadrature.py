from math import pi

import numpy as np
import pytest

from clifford_szego.mobius import VahlenMatrix, helper_map
from clifford_szego.monogenic import fueter_variable
from clifford_szego.quadrature import (
    BoundarySurface,
    focused_sphere_quadrature,
    hardy_inner_product,
    hardy_norm,
    sphere_quadrature,
    transport_quadrature,
)


@pytest.mark.parametrize("m, area", [(1, 2 * pi), (2, 4 * pi), (3, 2 * pi**2)])
def test_sphere_area(m, area):
    rule = sphere_quadrature(m, 6)
    assert rule.integrate(np.ones(len(rule))) == pytest.approx(area, rel=1e-14)
    assert np.allclose(np.linalg.norm(rule.nodes, axis=1), 1.0)
    assert np.all(rule.weights > 0)


@pytest.mark.parametrize("m, k, value", [
    (2, 2, 4 * pi / 3), (2, 4, 4 * pi / 5), (3, 2, pi**2 / 2), (1, 2, pi), (1, 4, 3 * pi / 4),
])
def test_monomial_moments(m, k, value):
    rule = sphere_quadrature(m, 8)
    assert rule.integrate(rule.nodes[:, 0] ** k) == pytest.approx(value, rel=1e-13)
    assert rule.integrate(rule.nodes[:, -1] ** k) == pytest.approx(value, rel=1e-13)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_polynomial_exactness(m, rng):
    lo, hi = sphere_quadrature(m, 8), sphere_quadrature(m, 30)
    for _ in range(5):
        e = rng.integers(0, 3, size=m + 1)
        while e.sum() > 8:
            e = rng.integers(0, 3, size=m + 1)
        f = lambda x: np.prod(x**e, axis=1)
        assert lo.integrate(f(lo.nodes)) == pytest.approx(hi.integrate(f(hi.nodes)), abs=1e-13)


def test_scaled_sphere():
    rule = sphere_quadrature(2, 4, radius=0.5, center=[1.0, 0, 0])
    assert rule.integrate(np.ones(len(rule))) == pytest.approx(pi)
    np.testing.assert_allclose(np.linalg.norm(rule.nodes - [1.0, 0, 0], axis=1), 0.5)


@pytest.mark.parametrize("m", [1, 2])
def test_focused_rule(m):
    d = np.ones(m + 1) / np.sqrt(m + 1)
    rule = focused_sphere_quadrature(m, d, 1e-3)
    area = 2 * pi if m == 1 else 4 * pi
    assert rule.integrate(np.ones(len(rule))) == pytest.approx(area, rel=1e-12)
    # nearly singular integrand 1/|x - (1 + eps) d|^2 integrates stably
    g = lambda x: 1 / np.sum((x - 1.001 * d) ** 2, axis=1)
    ref = focused_sphere_quadrature(m, d, 1e-3, per_panel=32, n_azimuth=96)
    assert rule.integrate(g(rule.nodes)) == pytest.approx(ref.integrate(g(ref.nodes)), rel=1e-8)
    with pytest.raises(ValueError):
        focused_sphere_quadrature(3, np.ones(4), 1e-2)


def test_transported_rule_area():
    S = BoundarySurface(2, vahlen=helper_map(2))
    tr = S.quadrature(40, method="transport")
    assert tr.integrate(np.ones(len(tr))) == pytest.approx(4 * pi / 36, rel=1e-8)
    native = S.quadrature(10)
    assert native.integrate(np.ones(len(native))) == pytest.approx(S.area(), rel=1e-13)
    with pytest.raises(ValueError):
        S.quadrature(10, method="other")


def test_transport_through_translation_is_exact():
    rule = sphere_quadrature(2, 6)
    T = VahlenMatrix.translation(np.array([0.5, -0.2, 0.1]))
    moved = transport_quadrature(rule, T)
    np.testing.assert_allclose(moved.nodes, rule.nodes + [0.5, -0.2, 0.1])
    np.testing.assert_allclose(moved.weights, rule.weights)


def test_surface_geometry(rng):
    S = BoundarySurface(2, vahlen=helper_map(2))
    pts = S.sample_interior(100, 0.8, rng)
    assert np.all(S.contains(pts))
    assert np.all(S.relative_radius(pts) <= 0.8 + 1e-12)
    assert np.all(S.boundary_distance(pts) > 0)
    assert not S.contains(np.array([0.0, 0.6, 0.0]))[0]
    np.testing.assert_allclose(S.to_base(S.from_base(pts)), pts, atol=1e-13)
    S2 = BoundarySurface.from_descriptor(S.descriptor())
    np.testing.assert_allclose(S2.image_sphere()[0], S.image_sphere()[0])


def test_pole_inside_base_ball_rejected():
    with pytest.raises(ValueError):
        BoundarySurface(2, radius=2.5, vahlen=helper_map(2))
    with pytest.raises(ValueError):
        BoundarySurface(2, radius=0.0)


def test_hardy_norms():
    rule = sphere_quadrature(2, 10)
    assert hardy_norm(lambda x: np.tile([1.0, 0, 0, 0], (len(x), 1)), rule) == pytest.approx(np.sqrt(4 * pi))
    Z1 = fueter_variable(1, 2).to_float()
    # |Z1|^2 = z0^2 + z1^2, integral 8 pi / 3
    ip = hardy_inner_product(Z1.evaluate, Z1.evaluate, rule)
    assert ip[0] == pytest.approx(8 * pi / 3)
    np.testing.assert_allclose(ip[1:], 0, atol=1e-14)
