import csv
from fractions import Fraction
from math import atanh, pi

import numpy as np
import pytest

from clifford_szego.mobius import VahlenMatrix, helper_map, inverse
from clifford_szego.monogenic import fueter_polynomial, fueter_variable
from clifford_szego.metric import (
    FamilySpec,
    NonScalarDiagonal,
    PathPolyline,
    SzegoMetric,
    blowup_scan,
    build_grid,
    caratheodory_lower_bound,
    caratheodory_transform_check,
    distance,
    intertwining_residual_translation,
    k2_candidate,
    metric_comparison,
    path_length,
    point_rows,
    pseudo_invariance_residual,
    write_csv,
)
from clifford_szego.quadrature import BoundarySurface
from clifford_szego.szego import build_kernel
from clifford_szego.calculus import DomainError


@pytest.fixture(scope="module")
def disk_metric(kernel_disk_n24):
    return SzegoMetric(kernel_disk_n24)


@pytest.fixture(scope="module")
def ball_metric():
    return SzegoMetric(build_kernel(BoundarySurface.ball(2), 10))


def test_disk_density(disk_metric, rng):
    z = BoundarySurface.ball(1).sample_interior(20, 0.5, rng)
    r2 = np.sum(z * z, axis=1)
    np.testing.assert_allclose(disk_metric.lam(z), 1 / (2 * pi * (1 - r2)), rtol=1e-7)
    np.testing.assert_allclose(disk_metric.checked_lam(z), disk_metric.lam(z))


def test_disk_curvature(disk_metric):
    z = np.array([[0.0, 0.0], [0.2, -0.1], [0.0, 0.4]])
    np.testing.assert_allclose(disk_metric.curvature(z), -16 * pi**2, rtol=1e-4)


def test_ball_curvature_closed_form(ball_metric):
    # lambda = 1/(4 pi (1-r^2)^2): Delta log lambda = (12 - 4 r^2)/(1 - r^2)^2
    z = np.array([[0.0, 0.0, 0.0], [0.2, 0.1, 0.0], [0.0, 0.0, -0.3]])
    r2 = np.sum(z * z, axis=1)
    oracle = -16 * pi**2 * (12 - 4 * r2) * (1 - r2) ** 2
    np.testing.assert_allclose(ball_metric.curvature(z), oracle, rtol=1e-4)
    rep = ball_metric.curvature_report(z)
    assert np.all(rep["sign_stable"])


def test_gram_form_forms(ball_metric, rng):
    z = BoundarySurface.ball(2).sample_interior(4, 0.6, rng)
    l4 = ball_metric.gram_form(z)
    assert np.all(l4["algebraic"] > 0)
    np.testing.assert_allclose(l4["norm"], l4["algebraic"], rtol=1e-8)
    M = ball_metric.m_element(z[0])
    assert np.max(np.abs(M(z[:1]))) < 1e-12 * np.max(np.abs(M(np.zeros((1, 3)))) + 1)


def test_nonscalar_guard(ball_metric):
    class Fake:
        def diagonal(self, z):
            return np.array([[1.0, 0.5, 0.0, 0.0]])

    fake = SzegoMetric.__new__(SzegoMetric)
    fake.kernel = Fake()
    with pytest.raises(NonScalarDiagonal):
        fake.checked_lam(np.zeros(3))
    assert ball_metric.nonscalar_residual(np.zeros((1, 3)))[0] < 1e-12


def test_radial_path_length(disk_metric):
    r = 0.6
    path = PathPolyline(np.array([[0.0, 0.0], [r, 0.0]]))
    assert path_length(disk_metric, path, refine=8) == pytest.approx(atanh(r) / (2 * pi), rel=1e-7)
    assert path_length(lambda p: np.ones(len(p)), path) == pytest.approx(r)


def test_distance_properties(disk_metric):
    a, b, c = np.array([0.3, 0.1]), np.array([-0.2, 0.4]), np.array([0.0, -0.4])
    grid = build_grid(disk_metric, 0.1)
    dab = distance(disk_metric, a, b, grid=grid)
    dba = distance(disk_metric, b, a, grid=grid)
    assert dab.value == pytest.approx(dba.value, rel=1e-12)
    np.testing.assert_allclose(dab.path.vertices, dba.path.vertices[::-1])
    assert dab.value <= dab.straight_value + 1e-15
    assert distance(disk_metric, a, a).value == 0.0
    ia, ib, ic = (grid.nearest(p) for p in (a, b, c))
    assert grid.node_distance(ia, ic) <= grid.node_distance(ia, ib) + grid.node_distance(ib, ic) + 1e-14
    # straight radial segment through the centre is a geodesic of the disk metric
    d = distance(disk_metric, np.array([-0.5, 0.0]), np.array([0.5, 0.0]))
    assert d.value == pytest.approx(2 * atanh(0.5) / (2 * pi), rel=1e-6)
    with pytest.raises(DomainError):
        distance(disk_metric, a, np.array([1.2, 0.0]))


def test_caratheodory_estimates(ball2):
    z = np.array([0.1, 0.2, 0.0])
    est = caratheodory_lower_bound(ball2, z, FamilySpec(k2_directions=2, k2_offsets=(0.1,)))
    assert est.value > 0
    assert est.value == max(c.ratio for c in est.candidates)
    small = caratheodory_lower_bound(ball2, z, FamilySpec(combination=False))
    assert est.value >= small.value
    with pytest.raises(ValueError):
        caratheodory_lower_bound(ball2, z, FamilySpec(fueter=False, combination=False))


def test_k2_grows_toward_boundary(ball2):
    u = np.array([1.0, 0.0, 0.0])
    near = k2_candidate(ball2, 0.95 * u)
    far = k2_candidate(ball2, 0.5 * u)
    assert near.ratio > far.ratio > 0
    scan = blowup_scan(ball2, u, np.logspace(-3, -1, 5))
    assert scan["monotone"]
    assert scan["slope"] == pytest.approx(-1.0, abs=0.05)


def test_transform_check_identity_and_helper(ball2):
    z = np.array([0.1, -0.2, 0.1])
    rep = caratheodory_transform_check(VahlenMatrix.identity(2), z, ball2, ball2, order=20)
    assert rep["gap"] == pytest.approx(0.0, abs=1e-12)
    H = helper_map(2)
    G = BoundarySurface(2, vahlen=H)
    from clifford_szego.mobius import apply

    rep = caratheodory_transform_check(inverse(H), apply(H, z), G, ball2, order=30)
    assert rep["gap"] >= 0


def test_pseudo_invariance_translation(kernel_ball2_n6, rng):
    t = np.array([0.3, 0.0, -0.2])
    V = VahlenMatrix.translation(t)
    Kt = build_kernel(BoundarySurface(2, vahlen=V), 6, 14)
    z = BoundarySurface.ball(2).sample_interior(10, 0.7, rng)
    assert pseudo_invariance_residual(V, z, kernel_ball2_n6, Kt).max() < 1e-12
    I = VahlenMatrix.identity(2)
    assert pseudo_invariance_residual(I, z, kernel_ball2_n6, kernel_ball2_n6).max() == 0.0


@pytest.mark.parametrize("p", [2, 3])
def test_intertwining_exact_under_translation(p):
    f = fueter_polynomial((1, 1), 2) + fueter_variable(2, 2) * fueter_variable(1, 2)
    res = intertwining_residual_translation([Fraction(1, 3), 0, Fraction(-1, 2)], f,
                                            [Fraction(1, 5), Fraction(1, 7), 0], p)
    assert res["exact_equal"]
    assert res["abs"] == 0.0


def test_metric_comparison_fields(ball_metric):
    out = metric_comparison(ball_metric, np.array([0.1, 0.0, 0.1]))
    assert out["lambda_star_unrooted"] == pytest.approx(out["lambda_star"] ** 2)
    assert out["gap_lambda"] == pytest.approx(out["lambda"] - out["dC_lower"])


def test_point_rows_csv(tmp_path, disk_metric):
    rows = point_rows(disk_metric, np.array([[0.0, 0.0], [0.1, 0.2]]))
    path = tmp_path / "rows.csv"
    write_csv(rows, path)
    back = list(csv.DictReader(open(path)))
    assert [k for k in back[0]] == ["z0", "z1", "lambda", "curvature", "gram_form", "gram_form_norm"]
    assert float(back[0]["lambda"]) == pytest.approx(1 / (2 * pi))
    with pytest.raises(ValueError):
        write_csv([], path)
