"""Möbius maps of R^{m+1} in Vahlen form.

A map is stored as four multivector coefficient arrays and acts by
``T(z) = (a z + b)(c z + d)^{-1}``.  Composition is the matrix product and the
inverse is the adjugate ``[[d~, -b~], [-c~, a~]]`` divided by the
pseudo-determinant ``a d~ - b c~``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .clifford import (
    algebra,
    conj_arrays,
    extract_paravector_arrays,
    gp_arrays,
    off_paravector_mass,
    paravector_arrays,
    reverse_arrays,
)

TOL = 1e-9


class SingularPointError(ValueError):
    """Evaluation at (or numerically at) the pole of a Möbius map."""


class NonUniqueNearestPoint(ValueError):
    """The nearest boundary point is not unique (e.g. the centre of a ball)."""


def _as_mv(x, m: int) -> np.ndarray:
    dim = algebra(m).dim
    if np.isscalar(x):
        out = np.zeros(dim)
        out[0] = float(x)
        return out
    arr = np.asarray(x, dtype=float)
    if arr.shape == (dim,):
        return arr.copy()
    if arr.shape == (m + 1,):
        return paravector_arrays(arr, m)
    raise ValueError(f"cannot read {arr.shape} as a multivector of Cl_0{m}")


@dataclass(frozen=True)
class VahlenMatrix:
    """Coefficients ``a, b, c, d`` as dense ``2**m`` arrays.

    ``factors`` optionally lists explicit paravector factorizations of the
    entries, keyed by ``"a"``..``"d"``, which lets :func:`validate` check that
    each entry is a product of paravectors.
    """

    m: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    factors: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_entries(cls, m: int, a, b, c, d, factors=None) -> "VahlenMatrix":
        return cls(m, _as_mv(a, m), _as_mv(b, m), _as_mv(c, m), _as_mv(d, m), dict(factors or {}))

    @classmethod
    def identity(cls, m: int) -> "VahlenMatrix":
        return cls.from_entries(m, 1, 0, 0, 1)

    @classmethod
    def translation(cls, t) -> "VahlenMatrix":
        t = np.asarray(t, dtype=float)
        return cls.from_entries(len(t) - 1, 1, t, 0, 1)

    @classmethod
    def dilation(cls, m: int, s: float) -> "VahlenMatrix":
        r = np.sqrt(s)
        return cls.from_entries(m, r, 0, 0, 1 / r)

    def entries(self):
        return self.a, self.b, self.c, self.d

    def pseudo_determinant(self) -> np.ndarray:
        m = self.m
        return gp_arrays(self.a, reverse_arrays(self.d, m), m) - gp_arrays(self.b, reverse_arrays(self.c, m), m)

    def denominator(self, z) -> np.ndarray:
        """``c z + d`` at points ``(n, m+1)``."""
        zz = paravector_arrays(np.atleast_2d(z), self.m)
        return gp_arrays(self.c, zz, self.m) + self.d

    def to_dict(self) -> dict:
        return {"m": self.m, "a": self.a.tolist(), "b": self.b.tolist(),
                "c": self.c.tolist(), "d": self.d.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "VahlenMatrix":
        m = int(data["m"])
        return cls(m, *(np.asarray(data[k], dtype=float) for k in "abcd"))


# -- validation ------------------------------------------------------------------------


def paravector_factorization(x: np.ndarray, m: int, tol: float = TOL):
    """Split ``x`` into at most two paravector factors, or return ``None``.

    A single factor works when ``x`` is a paravector.  Otherwise we look for a
    paravector ``p`` with ``conj(p) x`` a paravector: that condition is linear
    in ``p``, so the candidates form the null space of a small matrix.
    """
    x = np.asarray(x, dtype=float)
    scale = max(np.linalg.norm(x), 1.0)
    if off_paravector_mass(x, m) <= tol * scale:
        return [extract_paravector_arrays(x, m)]
    basis = np.eye(m + 1)
    cols = []
    for k in range(m + 1):
        pk = conj_arrays(paravector_arrays(basis[k], m), m)
        prod = gp_arrays(pk, x, m)
        cols.append(_off_components(prod, m))
    L = np.stack(cols, axis=1)
    _, s, vt = np.linalg.svd(L)
    rank = int(np.sum(s > tol * scale))
    if rank == m + 1:
        return None
    p = vt[-1]
    q = gp_arrays(conj_arrays(paravector_arrays(p, m), m), x, m) / np.dot(p, p)
    if off_paravector_mass(q, m) > 1e3 * tol * scale:
        return None
    return [p, extract_paravector_arrays(q, m)]


def _off_components(a: np.ndarray, m: int) -> np.ndarray:
    keep = np.ones(a.shape[-1], dtype=bool)
    keep[list(algebra(m).paravector_index)] = False
    return a[..., keep]


@dataclass
class ConstraintCheck:
    name: str
    passed: bool | None
    residual: float
    note: str = ""


@dataclass
class VahlenDiagnostics:
    checks: list[ConstraintCheck]
    pseudo_determinant: float

    @property
    def ok(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def __getitem__(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _inverse_mv(x: np.ndarray, m: int) -> np.ndarray:
    """Inverse of a paravector product: ``conj(x) / (x conj(x))``."""
    xx = gp_arrays(x, conj_arrays(x, m), m)
    return conj_arrays(x, m) / xx[0]


def validate(V: VahlenMatrix, tol: float = TOL, allow_reflection: bool = False) -> VahlenDiagnostics:
    """Check the three Vahlen conditions and report residuals.

    (i) entries are paravector products: verified against supplied factor
    lists, else by a two-factor search; anything else is ``passed=None``.
    (ii) pseudo-determinant equal to 1 (or -1 with ``allow_reflection``).
    (iii) ``a c^{-1}`` and ``c^{-1} d`` paravectors if ``c != 0``, otherwise
    ``b d^{-1}``.
    """
    m = V.m
    checks = []
    worst = 0.0
    undecided = []
    for name, x in zip("abcd", V.entries()):
        if np.linalg.norm(x) <= tol:
            continue
        if name in V.factors:
            prod = _as_mv(1.0, m)
            for f in V.factors[name]:
                fm = _as_mv(f, m)
                worst = max(worst, off_paravector_mass(fm, m))
                prod = gp_arrays(prod, fm, m)
            worst = max(worst, float(np.linalg.norm(prod - x)))
        elif paravector_factorization(x, m, tol) is None:
            undecided.append(name)
    if undecided:
        checks.append(ConstraintCheck("paravector_products", None, worst,
                                      f"no factorization found for {','.join(undecided)} (not checkable)"))
    else:
        checks.append(ConstraintCheck("paravector_products", bool(worst <= tol), worst))

    delta = V.pseudo_determinant()
    off = float(np.linalg.norm(delta[1:]))
    det = float(delta[0])
    targets = (1.0, -1.0) if allow_reflection else (1.0,)
    res = min(abs(det - t) for t in targets) + off
    checks.append(ConstraintCheck("pseudo_determinant", bool(res <= tol), res,
                                  "" if det > 0 else "orientation reversing (det -1)"))

    a, b, c, d = V.entries()
    if np.linalg.norm(c) > tol:
        ci = _inverse_mv(c, m)
        r = max(off_paravector_mass(gp_arrays(a, ci, m), m), off_paravector_mass(gp_arrays(ci, d, m), m))
    else:
        r = off_paravector_mass(gp_arrays(b, _inverse_mv(d, m), m), m)
    checks.append(ConstraintCheck("paravector_quotients", bool(r <= tol), float(r)))
    return VahlenDiagnostics(checks, det)


# -- action --------------------------------------------------------------------------


def apply(V: VahlenMatrix, z, tol: float = 1e-12, return_residual: bool = False):
    """``(a z + b)(c z + d)^{-1}`` at points of shape ``(n, m+1)`` or ``(m+1,)``."""
    m = V.m
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    pts = np.atleast_2d(z)
    zz = paravector_arrays(pts, m)
    num = gp_arrays(V.a, zz, m) + V.b
    den = gp_arrays(V.c, zz, m) + V.d
    nd = np.sum(den * den, axis=-1)
    if np.any(nd <= tol**2):
        raise SingularPointError("c z + d vanishes: point at the pole of the map")
    out = gp_arrays(num, conj_arrays(den, m), m) / nd[:, None]
    para = extract_paravector_arrays(out, m)
    if return_residual:
        resid = off_paravector_mass(out, m) / np.maximum(np.linalg.norm(out, axis=-1), 1e-300)
        return (para[0] if single else para), (resid[0] if single else resid)
    return para[0] if single else para


def compose(V1: VahlenMatrix, V2: VahlenMatrix) -> VahlenMatrix:
    """Matrix for ``V1 o V2``."""
    if V1.m != V2.m:
        raise ValueError("signature mismatch")
    m = V1.m

    def g(x, y):
        return gp_arrays(x, y, m)

    a1, b1, c1, d1 = V1.entries()
    a2, b2, c2, d2 = V2.entries()
    return VahlenMatrix(m, g(a1, a2) + g(b1, c2), g(a1, b2) + g(b1, d2),
                        g(c1, a2) + g(d1, c2), g(c1, b2) + g(d1, d2))


def inverse(V: VahlenMatrix) -> VahlenMatrix:
    m = V.m
    delta = V.pseudo_determinant()
    if np.linalg.norm(delta[1:]) > 1e-9 * max(1.0, abs(delta[0])) or abs(delta[0]) < 1e-14:
        raise ValueError("pseudo-determinant is not an invertible scalar")
    s = 1.0 / delta[0]
    a, b, c, d = V.entries()
    return VahlenMatrix(m, s * reverse_arrays(d, m), -s * reverse_arrays(b, m),
                        -s * reverse_arrays(c, m), s * reverse_arrays(a, m))


def conformal_scale(V: VahlenMatrix, z) -> np.ndarray:
    """Linear magnification ``|Delta| / |c z + d|^2`` (``1/|cz+d|^2`` when normalized)."""
    den = V.denominator(z)
    det = abs(V.pseudo_determinant()[0])
    out = det / np.sum(den * den, axis=-1)
    return out[0] if np.ndim(z) == 1 else out


def automorphy_factor(V: VahlenMatrix, z, p: int) -> np.ndarray:
    """``conj(c z + d) / |c z + d|^p`` as multivectors ``(n, 2**m)``."""
    den = V.denominator(z)
    r = np.linalg.norm(den, axis=-1)
    out = conj_arrays(den, V.m) / r[:, None] ** p
    return out[0] if np.ndim(z) == 1 else out


def fd_jacobian(V: VahlenMatrix, z, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of :func:`apply` at a single point."""
    z = np.asarray(z, dtype=float)
    n = len(z)
    J = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        J[:, k] = (apply(V, z + e) - apply(V, z - e)) / (2 * h)
    return J


# -- inversion maps used for boundary estimates -----------------------------------------


@dataclass(frozen=True)
class TangentBallData:
    P: np.ndarray
    C: np.ndarray
    r0: float
    delta: float

    def check(self, tol: float = 1e-9) -> float:
        return abs(float(np.linalg.norm(self.P - self.C)) - self.r0)


def inversion_maps(P, C, r0: float) -> tuple[VahlenMatrix, VahlenMatrix]:
    """``(i_P, j_P)`` for the ball of radius ``r0`` about ``C``.

    ``i_P(z) = C + r0^2 (z - C)^{-1}`` and ``j_P(w) = (w - C)/r0``, so that
    ``j_P(i_P(z)) = r0 (z - C)^{-1}``.  ``P`` is carried for bookkeeping only.
    """
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    C = np.asarray(C, dtype=float)
    m = len(C) - 1
    Cm = paravector_arrays(C, m)
    CC = gp_arrays(Cm, Cm, m)
    one = _as_mv(1.0, m)
    i_P = VahlenMatrix(m, Cm / r0, (r0**2 * one - CC) / r0, one / r0, -Cm / r0,
                       factors={"a": [C / r0], "c": [_unit(m) / r0], "d": [-C / r0]})
    s = np.sqrt(r0)
    j_P = VahlenMatrix(m, one / s, -Cm / s, np.zeros_like(one), s * one,
                       factors={"a": [_unit(m) / s], "b": [-C / s], "d": [s * _unit(m)]})
    return i_P, j_P


def _unit(m: int) -> np.ndarray:
    e = np.zeros(m + 1)
    e[0] = 1.0
    return e


def default_helper_center(m: int) -> np.ndarray:
    C = np.zeros(m + 1)
    C[1] = 2.0
    return C


def helper_map(m: int, C=None, r0: float = 0.5) -> VahlenMatrix:
    """Bounded Möbius example ``z -> r0 (z - C)^{-1}`` with ``C`` outside the unit ball."""
    C = default_helper_center(m) if C is None else np.asarray(C, dtype=float)
    if np.linalg.norm(C) <= 1.0:
        raise ValueError("helper centre must lie outside the closed unit ball")
    i_P, j_P = inversion_maps(C, C, r0)
    return compose(j_P, i_P)


# -- nearest boundary point ---------------------------------------------------------------


def nearest_boundary_point(surface, z, r0: float = 0.5, n_samples: int = 4000,
                           seed: int = 0, tol: float = 1e-9) -> TangentBallData:
    """Closest point ``P`` of ``surface`` to interior ``z`` plus the external ball data.

    ``surface`` must provide ``kind``, ``center``, ``radius`` and
    ``boundary_map(u)`` sending unit vectors of the base sphere to the surface.
    """
    z = np.asarray(z, dtype=float)
    if surface.kind == "sphere":
        v = z - surface.center
        nv = np.linalg.norm(v)
        if nv < tol:
            raise NonUniqueNearestPoint("every boundary point is nearest to the centre")
        P = surface.center + surface.radius * v / nv
    else:
        P = _nearest_by_search(surface, z, n_samples, seed, tol)
    delta = float(np.linalg.norm(z - P))
    if delta <= 0:
        raise ValueError("z lies on the boundary")
    C = P + r0 * (P - z) / delta
    return TangentBallData(P, C, float(r0), delta)


def _fibonacci_directions(n: int, dim: int, seed: int) -> np.ndarray:
    if dim == 2:
        t = 2 * np.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    if dim == 3:
        k = np.arange(n) + 0.5
        phi = np.arccos(1 - 2 * k / n)
        theta = np.pi * (1 + 5**0.5) * k
        return np.stack([np.cos(phi), np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta)], axis=1)
    u = np.random.default_rng(seed).normal(size=(n, dim))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def _nearest_by_search(surface, z, n_samples: int, seed: int, tol: float) -> np.ndarray:
    dim = len(z)
    U = _fibonacci_directions(n_samples, dim, seed)
    pts = surface.boundary_map(U)
    dist = np.linalg.norm(pts - z, axis=1)
    order = np.argsort(dist)

    def objective(u):
        u = u / np.linalg.norm(u)
        p = surface.boundary_map(u[None, :])[0]
        return float(np.sum((p - z) ** 2))

    best = None
    starts = [order[0]]
    # a second, well separated start exposes competing minima
    far = [k for k in order[1:50] if np.linalg.norm(U[k] - U[order[0]]) > 0.5]
    if far:
        starts.append(far[0])
    results = []
    for k in starts:
        res = minimize(objective, U[k], method="BFGS", options={"gtol": 1e-14})
        u = res.x / np.linalg.norm(res.x)
        results.append((res.fun, u))
    results.sort(key=lambda t: t[0])
    best = results[0]
    if len(results) > 1:
        f0, u0 = results[0]
        f1, u1 = results[1]
        if abs(np.sqrt(f1) - np.sqrt(f0)) <= tol * max(1.0, np.sqrt(f0)) and np.linalg.norm(u1 - u0) > 1e-3:
            raise NonUniqueNearestPoint("two separated boundary points are equally close")
    return surface.boundary_map(best[1][None, :])[0]


__all__ = [
    "NonUniqueNearestPoint",
    "SingularPointError",
    "TangentBallData",
    "VahlenDiagnostics",
    "VahlenMatrix",
    "apply",
    "automorphy_factor",
    "compose",
    "conformal_scale",
    "default_helper_center",
    "fd_jacobian",
    "helper_map",
    "inverse",
    "inversion_maps",
    "nearest_boundary_point",
    "paravector_factorization",
    "validate",
]
