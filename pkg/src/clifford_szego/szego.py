"""Truncated Szegő kernels built from orthonormalized Fueter polynomials.

The kernel is ``K(z, w) = s * sum_k phi_k(z) conj(phi_k(w))`` where the
``phi_k`` are orthonormal in the boundary Hardy space of a surface.  Two
orthonormalization modes are available:

``"real"``
    Gram-Schmidt over the real span of ``V_alpha e_A`` with the real inner
    product ``Sc(f, g)``.  Each Clifford direction is then counted once per
    blade, so the series carries ``s = 2**-m``.
``"clifford"``
    Gram-Schmidt over the right Clifford module spanned by the ``V_alpha``,
    with Clifford-valued projection coefficients and normalization by the
    inverse square root of ``(u, u)``; here ``s = 1``.

All basis polynomials are evaluated in normalized variables
``u = (z - c)/r`` where ``(c, r)`` is the bounding sphere of the surface,
which keeps Gram matrices well conditioned on small image domains.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .clifford import algebra, conj_arrays, gp_arrays, left_matrix
from .mobius import VahlenMatrix, apply, automorphy_factor
from .monogenic import PolynomialBank, fueter_bank, fueter_indices
from .quadrature import BoundarySurface, QuadratureRule

DROP_TOL = 1e-10
CACHE_VERSION = 1


class CacheMismatchError(ValueError):
    """A kernel cache file whose key or contents do not check out."""


class RankDeficiencyError(RuntimeError):
    """Too many generators became dependent during orthonormalization."""


def _right_matrices(q: np.ndarray, m: int) -> np.ndarray:
    """Matrices of ``x -> x q`` for a stack of multivectors ``q (..., dim)``."""
    alg = algebra(m)
    dim = alg.dim
    q = np.asarray(q, dtype=float)
    out = np.zeros(q.shape[:-1] + (dim, dim))
    rows = np.arange(dim)
    for j in range(dim):
        # (e_i q_j e_j) -> sign(i, j) at index i ^ j
        out[..., rows ^ j, rows] += alg.sign_table[:, j] * q[..., j : j + 1]
    return out


def _mgs_pass(A: np.ndarray, T: np.ndarray, ref: float, drop_tol: float, alive: np.ndarray):
    n = A.shape[1]
    for k in range(n):
        if not alive[k]:
            continue
        nrm = np.linalg.norm(A[:, k])
        if nrm < drop_tol * ref:
            alive[k] = False
            A[:, k] = 0.0
            T[:, k] = 0.0
            continue
        A[:, k] /= nrm
        T[:, k] /= nrm
        if k + 1 < n:
            proj = A[:, k] @ A[:, k + 1 :]
            A[:, k + 1 :] -= np.outer(A[:, k], proj)
            T[:, k + 1 :] -= np.outer(T[:, k], proj)


def mgs_real(values: np.ndarray, weights: np.ndarray, drop_tol: float = DROP_TOL):
    """Modified Gram-Schmidt (two passes) on real generators given by node values.

    ``values`` has shape ``(n_nodes, n_gen, dim)``.  Returns the coefficient
    matrix ``T (n_gen, n_kept)`` with orthonormal ``sum_j g_j T[j, k]`` and the
    boolean mask of kept generators.
    """
    n_nodes, n_gen, dim = values.shape
    A = (np.sqrt(weights)[:, None, None] * values).transpose(0, 2, 1).reshape(n_nodes * dim, n_gen).copy()
    ref = float(np.max(np.linalg.norm(A, axis=0)))
    T = np.eye(n_gen)
    alive = np.ones(n_gen, dtype=bool)
    _mgs_pass(A, T, ref, drop_tol, alive)
    _mgs_pass(A, T, 1.0, drop_tol, alive)
    return T[:, alive], alive


def _inv_sqrt_element(g: np.ndarray, m: int) -> np.ndarray:
    """``g^{-1/2}`` for a Hermitian positive multivector via its left matrix."""
    L = left_matrix(g, m)
    L = (L + L.T) / 2
    vals, vecs = np.linalg.eigh(L)
    if vals.min() <= 0:
        raise np.linalg.LinAlgError("Gram element is not positive definite")
    S = (vecs / np.sqrt(vals)) @ vecs.T
    return S[:, 0]


def mgs_clifford(values: np.ndarray, weights: np.ndarray, m: int, drop_tol: float = DROP_TOL):
    """Gram-Schmidt in the right Clifford module spanned by node values ``(n_nodes, n_gen, dim)``.

    Returns ``Q (n_gen, n_kept, dim)`` with ``psi_k = sum_j g_j Q[j, k]``.
    """
    n_nodes, n_gen, dim = values.shape
    w = weights[:, None]
    ref = float(np.sqrt(np.max(np.einsum("n,njd->j", weights, values**2))))
    kept_vals = []
    kept_coef = []
    alive = np.ones(n_gen, dtype=bool)
    for j in range(n_gen):
        u = values[:, j, :].copy()
        coef = np.zeros((n_gen, dim))
        coef[j, 0] = 1.0
        for _ in range(2):
            for psi, qc in zip(kept_vals, kept_coef):
                c = np.sum(w * gp_arrays(conj_arrays(psi, m), u, m), axis=0)
                u -= gp_arrays(psi, c, m)
                coef -= gp_arrays(qc, c, m)
        nrm = np.sqrt(np.sum(weights * np.sum(u * u, axis=1)))
        if nrm < drop_tol * ref:
            alive[j] = False
            continue
        g = np.sum(w * gp_arrays(conj_arrays(u, m), u, m), axis=0)
        h = _inv_sqrt_element(g, m)
        kept_vals.append(gp_arrays(u, h, m))
        kept_coef.append(gp_arrays(coef, h, m))
    Q = np.stack(kept_coef, axis=1) if kept_coef else np.zeros((n_gen, 0, dim))
    return Q, alive


@dataclass
class GramReport:
    scalar_residual: float
    nonscalar_residual: float
    dropped: int
    size: int

    def to_dict(self) -> dict:
        return {"scalar_residual": self.scalar_residual, "nonscalar_residual": self.nonscalar_residual,
                "dropped": self.dropped, "size": self.size}


@dataclass
class HardyBasis:
    """Orthonormal functions ``phi_k = sum_alpha V_alpha(u) Q[alpha, k]`` with ``u = (z - c)/r``."""

    m: int
    N: int
    mode: str
    center: np.ndarray
    scale: float
    coeffs: np.ndarray
    degrees: np.ndarray
    gram: GramReport
    rule_descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        self._bank = fueter_bank(self.N, self.m, self.center, self.scale)
        self._dbank = fueter_bank(self.N, self.m, self.center, self.scale, derivative=True)
        n_alpha, n_basis, dim = self.coeffs.shape
        R = _right_matrices(self.coeffs, self.m)  # (alpha, k, out, in)
        self._M = R.transpose(0, 3, 1, 2).reshape(n_alpha * dim, n_basis * dim)

    @property
    def kernel_scale(self) -> float:
        return 2.0 ** (-self.m) if self.mode == "real" else 1.0

    def __len__(self) -> int:
        return self.coeffs.shape[1]

    def _combine(self, bank: PolynomialBank, points) -> np.ndarray:
        V = bank.evaluate(points)
        n = V.shape[0]
        dim = V.shape[2]
        return (V.reshape(n, -1) @ self._M).reshape(n, -1, dim)

    def values(self, points) -> np.ndarray:
        """``phi_k(z)`` with shape ``(n_points, n_basis, dim)``."""
        return self._combine(self._bank, points)

    def derivative_values(self, points) -> np.ndarray:
        """``phi_k'(z) = Dbar phi_k(z)``."""
        return self._combine(self._dbank, points)


def orthonormalize(surface: BoundarySurface, N: int, rule: QuadratureRule, mode: str = "real",
                   drop_tol: float = DROP_TOL, normalize: bool = True, max_dropped: int | None = None) -> HardyBasis:
    """Orthonormal Hardy basis from Fueter polynomials of degree <= ``N`` on ``surface``."""
    m = surface.m
    if mode not in ("real", "clifford"):
        raise ValueError(f"unknown orthonormalization mode {mode!r}")
    if normalize:
        center, scale = surface.image_sphere()
    else:
        center, scale = np.zeros(m + 1), 1.0
    bank = fueter_bank(N, m, center, scale)
    degs = np.array([len(a) for a in fueter_indices(N, m)])
    V = bank.evaluate(rule.nodes)  # (nodes, alpha, dim)
    dim = algebra(m).dim
    if mode == "real":
        # generator (alpha, A) -> V_alpha e_A
        R = _right_matrices(np.eye(dim), m)  # (A, out, in)
        vals = np.einsum("nai,Aoi->naAo", V, R).reshape(V.shape[0], -1, dim)
        T, alive = mgs_real(vals, rule.weights, drop_tol)
        coeffs = T.reshape(len(degs), dim, -1).transpose(0, 2, 1)
        gen_deg = np.repeat(degs, dim)
    else:
        coeffs, alive = mgs_clifford(V, rule.weights, m, drop_tol)
        gen_deg = degs
    kept_deg = gen_deg[alive]
    dropped = int((~alive).sum())
    if max_dropped is not None and dropped > max_dropped:
        raise RankDeficiencyError(f"{dropped} generators dropped (budget {max_dropped})")
    basis = HardyBasis(m, N, mode, np.asarray(center, float), float(scale), coeffs, kept_deg,
                       GramReport(0.0, 0.0, dropped, coeffs.shape[1]), dict(rule.descriptor))
    basis.gram = gram_report(basis, rule)
    return basis


def gram_matrix(basis: HardyBasis, rule: QuadratureRule) -> np.ndarray:
    """Clifford Gram matrix ``(phi_j, phi_k)`` with shape ``(n, n, dim)``."""
    m = basis.m
    P = basis.values(rule.nodes)
    Pc = conj_arrays(P, m)
    out = np.zeros((len(basis), len(basis), algebra(m).dim))
    for j in range(len(basis)):
        out[j] = rule.integrate(gp_arrays(Pc[:, j : j + 1, :], P, m))
    return out


def gram_report(basis: HardyBasis, rule: QuadratureRule) -> GramReport:
    m = basis.m
    P = basis.values(rule.nodes)
    n, k, dim = P.shape
    A = (np.sqrt(rule.weights)[:, None, None] * P).transpose(0, 2, 1).reshape(n * dim, k)
    G = A.T @ A
    scal = float(np.max(np.abs(G - np.eye(k)))) if k else 0.0
    # non-scalar parts of (phi_j, phi_j); the off-diagonal ones are only constrained in clifford mode
    sel = range(k) if basis.mode == "real" else range(0)
    nons = 0.0
    for j in sel:
        g = rule.integrate(gp_arrays(conj_arrays(P[:, j], m), P[:, j], m))
        nons = max(nons, float(np.linalg.norm(g[1:])))
    if basis.mode == "clifford" and k:
        Gc = gram_matrix(basis, rule)
        target = np.zeros_like(Gc)
        target[np.arange(k), np.arange(k), 0] = 1.0
        scal = float(np.max(np.abs(Gc[..., 0] - target[..., 0])))
        nons = float(np.max(np.linalg.norm(Gc[..., 1:], axis=-1)))
    return GramReport(scal, nons, basis.gram.dropped if basis.gram else 0, k)


# -- the kernel ----------------------------------------------------------------------------


@dataclass
class KernelDerivatives:
    K: np.ndarray
    K_z: np.ndarray
    K_zbar: np.ndarray
    K_zbarz: np.ndarray


class TruncatedSzegoKernel:
    """Series kernel on ``surface`` from a :class:`HardyBasis`."""

    def __init__(self, surface: BoundarySurface, basis: HardyBasis, quad_order: int):
        self.surface = surface
        self.basis = basis
        self.quad_order = int(quad_order)

    @property
    def m(self) -> int:
        return self.surface.m

    @property
    def N(self) -> int:
        return self.basis.N

    def rule(self) -> QuadratureRule:
        return self.surface.quadrature(self.quad_order)

    def _pair(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        m = self.m
        return self.basis.kernel_scale * np.sum(gp_arrays(A, conj_arrays(B, m), m), axis=1)

    def __call__(self, z, w) -> np.ndarray:
        """``K(z_p, w_p)`` for paired point arrays, shape ``(n, dim)``."""
        z = np.atleast_2d(z)
        w = np.atleast_2d(w)
        return self._pair(self.basis.values(z), self.basis.values(w))

    def matrix(self, z, w) -> np.ndarray:
        """``K(z_i, w_j)`` for all pairs, shape ``(n_z, n_w, dim)``."""
        m = self.m
        A = self.basis.values(np.atleast_2d(z))
        B = conj_arrays(self.basis.values(np.atleast_2d(w)), m)
        out = np.zeros((A.shape[0], B.shape[0], A.shape[2]))
        for i in range(A.shape[0]):
            out[i] = self.basis.kernel_scale * np.sum(gp_arrays(A[i][None], B, m), axis=1)
        return out

    def diagonal(self, z) -> np.ndarray:
        """``K(z, z)`` as multivectors."""
        return self(z, z)

    def lam(self, z) -> np.ndarray:
        """Scalar part of the diagonal: ``s * sum_k |phi_k(z)|^2``."""
        P = self.basis.values(np.atleast_2d(z))
        return self.basis.kernel_scale * np.sum(P * P, axis=(1, 2))

    def derivatives(self, z, w) -> KernelDerivatives:
        z = np.atleast_2d(z)
        w = np.atleast_2d(w)
        Pz, Pw = self.basis.values(z), self.basis.values(w)
        Dz, Dw = self.basis.derivative_values(z), self.basis.derivative_values(w)
        return KernelDerivatives(self._pair(Pz, Pw), self._pair(Dz, Pw), self._pair(Pz, Dw), self._pair(Dz, Dw))

    def reproduce(self, f, z, rule: QuadratureRule | None = None) -> np.ndarray:
        """``int K(z, w) f(w) dS(w)`` by quadrature; ``f`` maps node arrays to values."""
        rule = self.rule() if rule is None else rule
        m = self.m
        z = np.atleast_2d(z)
        fv = f(rule.nodes)
        Pn = conj_arrays(self.basis.values(rule.nodes), m)  # (nodes, k, dim)
        # c_k = (phi_k, f)
        c = rule.integrate(gp_arrays(Pn, fv[:, None, :], m))  # (k, dim)
        Pz = self.basis.values(z)
        return self.basis.kernel_scale * np.sum(gp_arrays(Pz, c[None], m), axis=1)

    def tail_check(self, z) -> dict:
        """Block sums of ``s |phi_k'(z)|^2`` by polynomial degree, with successive ratios."""
        D = self.basis.derivative_values(np.atleast_2d(z))[0]
        mags = self.basis.kernel_scale * np.sum(D * D, axis=1)
        blocks = [float(mags[self.basis.degrees == d].sum()) for d in range(self.N + 1)]
        ratios = [blocks[d + 1] / blocks[d] if blocks[d] > 0 else float("nan") for d in range(self.N)]
        return {"blocks": blocks, "partial_sums": list(np.cumsum(blocks)), "ratios": ratios}

    # -- cache ---------------------------------------------------------------------------

    def cache_key(self) -> str:
        return cache_key(self.surface, self.N, self.quad_order, self.basis.mode)

    def to_dict(self) -> dict:
        b = self.basis
        return {
            "version": CACHE_VERSION,
            "key": self.cache_key(),
            "m": self.m,
            "N": self.N,
            "mode": b.mode,
            "surface": self.surface.descriptor(),
            "quadrature": {"kind": "product_gauss", "order": self.quad_order},
            "center": [float(x) for x in b.center],
            "scale": b.scale,
            "degrees": b.degrees.tolist(),
            "shape": list(b.coeffs.shape),
            "coefficients": " ".join(f"{x:.17g}" for x in b.coeffs.ravel()),
            "gram": b.gram.to_dict(),
        } | {"digest": _content_digest(b.coeffs, b.center, b.scale, b.degrees)}

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "TruncatedSzegoKernel":
        surface = BoundarySurface.from_descriptor(data["surface"])
        shape = tuple(data["shape"])
        coeffs = np.array([float(x) for x in data["coefficients"].split()]).reshape(shape)
        g = data["gram"]
        basis = HardyBasis(int(data["m"]), int(data["N"]), data["mode"], np.asarray(data["center"], float),
                           float(data["scale"]), coeffs, np.asarray(data["degrees"], int),
                           GramReport(g["scalar_residual"], g["nonscalar_residual"], g["dropped"], g["size"]))
        k = cls(surface, basis, int(data["quadrature"]["order"]))
        if k.cache_key() != data.get("key"):
            raise CacheMismatchError("kernel cache key does not match its setup")
        if _content_digest(coeffs, basis.center, basis.scale, basis.degrees) != data.get("digest"):
            raise CacheMismatchError("kernel cache key digest does not match the stored basis")
        return k

    @classmethod
    def load(cls, path) -> "TruncatedSzegoKernel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def cache_key(surface: BoundarySurface, N: int, quad_order: int, mode: str) -> str:
    payload = json.dumps({"v": CACHE_VERSION, "surface": surface.descriptor(), "N": N,
                          "order": quad_order, "mode": mode}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _content_digest(coeffs, center, scale, degrees) -> str:
    h = hashlib.sha256()
    for a in (np.asarray(coeffs, float), np.asarray(center, float), np.array([scale], float),
              np.asarray(degrees, np.int64)):
        h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()[:16]


def build_kernel(surface: BoundarySurface, N: int, quad_order: int | None = None, mode: str = "real",
                 cache_dir: str | None = None) -> TruncatedSzegoKernel:
    """Orthonormalize and wrap; reuse ``cache_dir/<key>.json`` when present."""
    if quad_order is None:
        quad_order = 2 * N + 2
    if quad_order < 2 * N + 2:
        raise ValueError("quadrature order must be at least 2N + 2")
    path = None
    if cache_dir:
        path = os.path.join(cache_dir, f"szego-{cache_key(surface, N, quad_order, mode)}.json")
        if os.path.exists(path):
            return TruncatedSzegoKernel.load(path)
    rule = surface.quadrature(quad_order)
    basis = orthonormalize(surface, N, rule, mode)
    kernel = TruncatedSzegoKernel(surface, basis, quad_order)
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        kernel.save(path)
    return kernel


def kernel_eval(K: TruncatedSzegoKernel, z, w) -> np.ndarray:
    return K(z, w)


def kernel_derivatives(K: TruncatedSzegoKernel, z, w) -> KernelDerivatives:
    return K.derivatives(z, w)


def reproduce(K: TruncatedSzegoKernel, f, z, rule: QuadratureRule | None = None) -> np.ndarray:
    return K.reproduce(f, z, rule)


def tail_check(K: TruncatedSzegoKernel, z) -> dict:
    return K.tail_check(z)


def transformation_residual(K_G: TruncatedSzegoKernel, K_Gstar: TruncatedSzegoKernel, V: VahlenMatrix,
                            z, zeta) -> np.ndarray:
    """``K_G(z, zeta) - A(z) K_{G*}(Tz, T zeta) conj(A(zeta))`` with ``A = conj(cz+d)/|cz+d|^{m+1}``."""
    m = K_G.m
    z = np.atleast_2d(z)
    zeta = np.atleast_2d(zeta)
    lhs = K_G(z, zeta)
    Az = automorphy_factor(V, z, m + 1)
    Azeta = conj_arrays(automorphy_factor(V, zeta, m + 1), m)
    rhs = gp_arrays(gp_arrays(Az, K_Gstar(apply(V, z), apply(V, zeta)), m), Azeta, m)
    return lhs - rhs


__all__ = [
    "CacheMismatchError",
    "GramReport",
    "HardyBasis",
    "KernelDerivatives",
    "RankDeficiencyError",
    "TruncatedSzegoKernel",
    "build_kernel",
    "cache_key",
    "gram_matrix",
    "kernel_derivatives",
    "kernel_eval",
    "mgs_clifford",
    "mgs_real",
    "orthonormalize",
    "reproduce",
    "tail_check",
    "transformation_residual",
]
