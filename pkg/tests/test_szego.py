import json
from math import pi

import numpy as np
import pytest

from clifford_szego.clifford import gp_arrays
from clifford_szego.mobius import VahlenMatrix
from clifford_szego.monogenic import fueter_bank
from clifford_szego.quadrature import BoundarySurface
from clifford_szego.szego import (
    CacheMismatchError,
    RankDeficiencyError,
    TruncatedSzegoKernel,
    build_kernel,
    gram_matrix,
    orthonormalize,
    transformation_residual,
)


def random_monogenic(N, m, rng):
    bank = fueter_bank(N, m)
    C = rng.standard_normal((len(bank), 2**m))
    return lambda p: np.sum(gp_arrays(bank.evaluate(p), C[None], m), axis=1)


def test_origin_value(kernel_ball2_n8):
    k = kernel_ball2_n8(np.zeros(3), np.zeros(3))[0]
    assert k[0] == pytest.approx(1 / (4 * pi), rel=1e-13)
    np.testing.assert_allclose(k[1:], 0, atol=1e-15)


def test_ball_diagonal_closed_form(kernel_ball2_n8, rng):
    z = BoundarySurface.ball(2).sample_interior(30, 0.3, rng)
    r2 = np.sum(z * z, axis=1)
    np.testing.assert_allclose(kernel_ball2_n8.lam(z), 1 / (4 * pi * (1 - r2) ** 2), rtol=1e-5)


def test_disk_oracle(kernel_disk_n24, rng):
    z = BoundarySurface.ball(1).sample_interior(20, 0.5, rng)
    w = BoundarySurface.ball(1).sample_interior(20, 0.5, rng)
    k = kernel_disk_n24(z, w)
    zc, wc = z[:, 0] + 1j * z[:, 1], w[:, 0] + 1j * w[:, 1]
    oracle = 1 / (2 * pi * (1 - zc * np.conj(wc)))
    np.testing.assert_allclose(k[:, 0] + 1j * k[:, 1], oracle, rtol=1e-6)


@pytest.mark.parametrize("surface", ["ball2", "image2"])
def test_reproduces_polynomials_up_to_degree(surface, request, rng):
    S = request.getfixturevalue(surface)
    K = build_kernel(S, 5)
    f = random_monogenic(5, 2, rng)
    z = S.sample_interior(6, 0.7, rng)
    out = K.reproduce(f, z)
    assert np.max(np.abs(out - f(z))) / np.max(np.abs(f(z))) < 1e-11


def test_gram_report_and_matrix(kernel_ball2_n6):
    g = kernel_ball2_n6.basis.gram
    assert g.scalar_residual < 1e-12
    assert g.nonscalar_residual < 1e-12
    assert g.dropped == 0
    G = gram_matrix(kernel_ball2_n6.basis, kernel_ball2_n6.rule())
    np.testing.assert_allclose(G[..., 0], np.eye(len(kernel_ball2_n6.basis)), atol=1e-12)


def test_basis_size_real_mode():
    # C(N+m, m) Fueter polynomials, each with 2^m right coefficients
    K = build_kernel(BoundarySurface.ball(2), 3)
    assert len(K.basis) == 10 * 4


@pytest.mark.parametrize("surface", ["ball2", "image2"])
def test_clifford_mode_matches_real_mode(surface, request, rng):
    S = request.getfixturevalue(surface)
    Kr = build_kernel(S, 4)
    Kc = build_kernel(S, 4, mode="clifford")
    z = S.sample_interior(5, 0.6, rng)
    w = S.sample_interior(5, 0.6, rng)
    np.testing.assert_allclose(Kc(z, w), Kr(z, w), atol=1e-10 * np.abs(Kr(z, z)).max())
    assert Kc.basis.gram.nonscalar_residual < 1e-10


def test_hermitian_symmetry(kernel_ball2_n6, rng):
    z = BoundarySurface.ball(2).sample_interior(5, 0.6, rng)
    w = BoundarySurface.ball(2).sample_interior(5, 0.6, rng)
    a = kernel_ball2_n6(z, w)
    b = kernel_ball2_n6(w, z)
    conj_b = b * np.array([1.0, -1, -1, -1])
    np.testing.assert_allclose(a, conj_b, atol=1e-14)
    M = kernel_ball2_n6.matrix(z, w)
    np.testing.assert_allclose(np.einsum("iid->id", M), a, atol=1e-15)


def test_cache_round_trip(tmp_path, ball2):
    K = build_kernel(ball2, 3, cache_dir=str(tmp_path))
    files = list(tmp_path.iterdir())
    assert len(files) == 1 and K.cache_key() in files[0].name
    K2 = build_kernel(ball2, 3, cache_dir=str(tmp_path))
    z = np.array([[0.1, 0.2, -0.3]])
    np.testing.assert_array_equal(K(z, z), K2(z, z))
    data = json.loads(files[0].read_text())
    for field, value in (("N", 4), ("scale", 2.0)):
        bad = dict(data, **{field: value})
        files[0].write_text(json.dumps(bad))
        with pytest.raises(CacheMismatchError, match="cache key"):
            TruncatedSzegoKernel.load(files[0])


def test_cache_key_depends_on_setup(ball2, image2):
    keys = {build_kernel(S, 2, q).cache_key() for S in (ball2, image2) for q in (6, 8)}
    assert len(keys) == 4


def test_order_check(ball2):
    with pytest.raises(ValueError):
        build_kernel(ball2, 6, 12)
    with pytest.raises(ValueError):
        orthonormalize(ball2, 2, ball2.quadrature(6), mode="complex")


def test_rank_budget(ball2):
    # an order-2 rule cannot separate degree-4 polynomials
    with pytest.raises(RankDeficiencyError):
        orthonormalize(ball2, 4, ball2.quadrature(2), max_dropped=0)


def test_tail_check(kernel_ball2_n8):
    t = kernel_ball2_n8.tail_check(np.array([0.2, 0.1, 0.0]))
    assert len(t["blocks"]) == 9
    assert t["blocks"][0] == 0.0
    assert all(r < 1 for r in t["ratios"][2:])
    assert t["partial_sums"][-1] == pytest.approx(sum(t["blocks"]))


def test_transformation_residual_identity_and_translation(kernel_ball2_n6, rng):
    z = BoundarySurface.ball(2).sample_interior(5, 0.5, rng)
    w = BoundarySurface.ball(2).sample_interior(5, 0.5, rng)
    K = kernel_ball2_n6
    assert np.max(np.abs(transformation_residual(K, K, VahlenMatrix.identity(2), z, w))) == 0.0
    t = np.array([0.4, -0.2, 0.1])
    S = BoundarySurface(2, vahlen=VahlenMatrix.translation(t))
    Kt = build_kernel(S, 6, 14)
    res = transformation_residual(K, Kt, VahlenMatrix.translation(t), z, w)
    assert np.max(np.abs(res)) < 1e-12
