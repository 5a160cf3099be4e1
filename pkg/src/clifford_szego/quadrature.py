"""Boundary surfaces and quadrature rules on spheres and their Möbius images."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .clifford import conj_arrays, gp_arrays
from .mobius import VahlenMatrix, apply, conformal_scale, inverse


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes on a surface with positive weights that already include the area element."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    descriptor: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def m(self) -> int:
        return self.nodes.shape[1] - 1

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Weighted sum over the first axis of ``values``."""
        return np.tensordot(self.weights, values, axes=(0, 0))


def _unit_sphere(m: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on S^m embedded in R^{m+1}, polynomially exact to ``order``."""
    if m == 1:
        n = order + 1
        t = 2 * np.pi * np.arange(n) / n
        return np.stack([np.cos(t), np.sin(t)], axis=1), np.full(n, 2 * np.pi / n)
    sub_nodes, sub_weights = _unit_sphere(m - 1, order)
    nt = order // 2 + 1
    a = (m - 2) / 2
    if a == 0:
        t, wt = roots_legendre(nt)
    else:
        t, wt = roots_jacobi(nt, a, a)
    s = np.sqrt(1 - t**2)
    nodes = np.concatenate(
        [t[:, None, None] * np.ones((1, len(sub_weights), 1)),
         s[:, None, None] * sub_nodes[None, :, :]], axis=2).reshape(-1, m + 1)
    weights = (wt[:, None] * sub_weights[None, :]).reshape(-1)
    return nodes, weights


def sphere_quadrature(m: int, order: int, radius: float = 1.0, center=None) -> QuadratureRule:
    """Product Gauss rule on the sphere of the given radius, exact for degree <= ``order``.

    For m = 2 this is Gauss-Legendre in ``cos`` of the polar angle times the
    uniform azimuthal rule; for m = 1 the uniform rule with ``order + 1`` nodes.
    """
    if order < 0:
        raise ValueError("quadrature order must be non-negative")
    c = np.zeros(m + 1) if center is None else np.asarray(center, dtype=float)
    nodes, weights = _unit_sphere(m, order)
    return QuadratureRule(c + radius * nodes, weights * radius**m, order,
                          {"kind": "sphere", "m": m, "order": order, "radius": radius, "center": c.tolist()})


def _rotation_to(direction: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose first column is ``direction`` (Householder)."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    e = np.zeros_like(d)
    e[0] = 1.0
    v = e - d
    if np.linalg.norm(v) < 1e-14:
        return np.eye(len(d))
    v /= np.linalg.norm(v)
    return np.eye(len(d)) - 2 * np.outer(v, v)


def _graded_panels(delta: float, max_width: float = np.pi / 8) -> np.ndarray:
    edges = [0.0]
    h = max(delta, 1e-8) / 2
    while edges[-1] < np.pi:
        step = min(h, max_width)
        edges.append(min(np.pi, edges[-1] + step))
        h *= 2
    return np.array(edges)


def focused_sphere_quadrature(m: int, direction, delta: float, radius: float = 1.0, center=None,
                              per_panel: int = 16, n_azimuth: int = 48) -> QuadratureRule:
    """Rule graded toward ``center + radius*direction`` for nearly singular integrands.

    The angle from the focus direction is split into panels that double in
    width away from the focus, starting at ``delta/2``; each panel carries a
    Gauss-Legendre rule.  Supported for m in {1, 2}.
    """
    if m not in (1, 2):
        raise ValueError("focused rules are implemented for m in {1, 2}")
    c = np.zeros(m + 1) if center is None else np.asarray(center, dtype=float)
    edges = _graded_panels(delta / radius)
    x, w = roots_legendre(per_panel)
    psi = np.concatenate([(b - a) / 2 * x + (a + b) / 2 for a, b in zip(edges[:-1], edges[1:])])
    wpsi = np.concatenate([(b - a) / 2 * w for a, b in zip(edges[:-1], edges[1:])])
    if m == 1:
        ang = np.concatenate([psi, -psi])
        wang = np.concatenate([wpsi, wpsi])
        local = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        weights = wang * radius
    else:
        phi = 2 * np.pi * np.arange(n_azimuth) / n_azimuth
        P, F = np.meshgrid(psi, phi, indexing="ij")
        local = np.stack([np.cos(P), np.sin(P) * np.cos(F), np.sin(P) * np.sin(F)], axis=-1).reshape(-1, 3)
        weights = (wpsi[:, None] * np.sin(psi)[:, None] * np.full((1, n_azimuth), 2 * np.pi / n_azimuth)).reshape(-1)
        weights = weights * radius**2
    R = _rotation_to(direction)
    nodes = c + radius * local @ R.T
    return QuadratureRule(nodes, weights, -1,
                          {"kind": "focused", "m": m, "delta": delta, "direction": np.asarray(direction).tolist()})


def transport_quadrature(rule: QuadratureRule, V: VahlenMatrix) -> QuadratureRule:
    """Push a rule through ``V``: nodes mapped, weights times ``scale^m``."""
    m = rule.m
    nodes = apply(V, rule.nodes)
    weights = rule.weights * conformal_scale(V, rule.nodes) ** m
    desc = dict(rule.descriptor)
    desc["transport"] = V.to_dict()
    return QuadratureRule(nodes, weights, rule.order, desc)


@dataclass(frozen=True)
class BoundarySurface:
    """A sphere, optionally pushed forward by a Möbius map whose pole lies outside it."""

    m: int
    center: np.ndarray = None
    radius: float = 1.0
    vahlen: VahlenMatrix | None = None

    def __post_init__(self):
        c = np.zeros(self.m + 1) if self.center is None else np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", c)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.vahlen is not None:
            pole = self.pole()
            if pole is not None and np.linalg.norm(pole - c) <= self.radius:
                raise ValueError("the pole of the Möbius map lies in the closed base ball")

    @classmethod
    def ball(cls, m: int, radius: float = 1.0, center=None) -> "BoundarySurface":
        return cls(m, center, radius)

    @property
    def kind(self) -> str:
        return "sphere" if self.vahlen is None else "mobius_image"

    def pole(self):
        """Point where ``c z + d`` vanishes, or ``None`` for affine maps."""
        V = self.vahlen
        if np.linalg.norm(V.c) < 1e-14:
            return None
        from .mobius import _inverse_mv
        from .clifford import extract_paravector_arrays

        return -extract_paravector_arrays(gp_arrays(_inverse_mv(V.c, self.m), V.d, self.m), self.m)

    @cached_property
    def _inverse(self):
        return None if self.vahlen is None else inverse(self.vahlen)

    def to_base(self, z) -> np.ndarray:
        return np.asarray(z, float) if self.vahlen is None else apply(self._inverse, z)

    def from_base(self, u) -> np.ndarray:
        return np.asarray(u, float) if self.vahlen is None else apply(self.vahlen, u)

    def boundary_map(self, u) -> np.ndarray:
        """Unit directions of the base sphere -> boundary points."""
        return self.from_base(self.center + self.radius * np.atleast_2d(u))

    def quadrature(self, order: int, method: str = "native") -> QuadratureRule:
        """Rule on the surface.

        ``"native"`` places a product rule directly on the surface, which is
        itself a sphere, so polynomial integrands stay exact.  ``"transport"``
        pushes the base-sphere rule through the map instead.
        """
        if self.vahlen is None or method == "native":
            c, r = self.image_sphere()
            return sphere_quadrature(self.m, order, r, c)
        if method != "transport":
            raise ValueError(f"unknown quadrature method {method!r}")
        rule = sphere_quadrature(self.m, order, self.radius, self.center)
        return transport_quadrature(rule, self.vahlen)

    def focused_quadrature(self, point, delta: float, **kw) -> QuadratureRule:
        """Graded rule focused at a boundary ``point``; ``delta`` is measured in the base sphere."""
        u = self.to_base(np.asarray(point, float)) - self.center
        rule = focused_sphere_quadrature(self.m, u, delta, self.radius, self.center, **kw)
        return rule if self.vahlen is None else transport_quadrature(rule, self.vahlen)

    def relative_radius(self, z) -> np.ndarray:
        """``|u - center| / radius`` of the base preimage ``u``; < 1 inside."""
        u = np.atleast_2d(self.to_base(z))
        return np.linalg.norm(u - self.center, axis=-1) / self.radius

    def contains(self, z, clearance: float = 0.0) -> np.ndarray:
        z = np.atleast_2d(z)
        if self.vahlen is None:
            return np.linalg.norm(z - self.center, axis=-1) < self.radius - clearance
        c, r = self.image_sphere()
        inside = self.relative_radius(z) < 1
        return inside & (np.linalg.norm(z - c, axis=-1) < r - clearance)

    @cached_property
    def _image_sphere(self):
        if self.vahlen is None:
            return self.center, self.radius
        # a Möbius image of a sphere avoiding the pole is a sphere: fit one
        dirs = np.eye(self.m + 1)
        pts = self.boundary_map(np.concatenate([dirs, -dirs, [np.ones(self.m + 1) / np.sqrt(self.m + 1)]]))
        A = np.concatenate([2 * pts, np.ones((len(pts), 1))], axis=1)
        rhs = np.sum(pts**2, axis=1)
        sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
        c = sol[:-1]
        r = float(np.sqrt(sol[-1] + c @ c))
        return c, r

    def image_sphere(self) -> tuple[np.ndarray, float]:
        """Centre and radius of the surface itself (exact for Möbius images of spheres)."""
        return self._image_sphere

    def boundary_distance(self, z) -> np.ndarray:
        c, r = self.image_sphere()
        return r - np.linalg.norm(np.atleast_2d(z) - c, axis=-1)

    def area(self) -> float:
        from math import gamma, pi

        _, r = self.image_sphere()
        return 2 * pi ** ((self.m + 1) / 2) / gamma((self.m + 1) / 2) * r**self.m

    def sample_interior(self, n: int, max_relative_radius: float, rng: np.random.Generator) -> np.ndarray:
        """Images of points uniformly drawn from the base ball of relative radius ``max_relative_radius``."""
        dim = self.m + 1
        g = rng.normal(size=(n, dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        rad = max_relative_radius * rng.uniform(size=(n, 1)) ** (1 / dim)
        return self.from_base(self.center + self.radius * rad * g)

    def descriptor(self) -> dict:
        out = {"kind": self.kind, "m": self.m, "center": self.center.tolist(), "radius": self.radius}
        if self.vahlen is not None:
            out["vahlen"] = self.vahlen.to_dict()
        return out

    @classmethod
    def from_descriptor(cls, data: dict) -> "BoundarySurface":
        V = VahlenMatrix.from_dict(data["vahlen"]) if data.get("vahlen") else None
        return cls(int(data["m"]), np.asarray(data["center"], float), float(data["radius"]), V)


def hardy_inner_product(f, g, rule: QuadratureRule) -> np.ndarray:
    """``sum_k w_k conj(f(x_k)) g(x_k)``; ``f``, ``g`` are callables or node values."""
    m = rule.m
    fv = f(rule.nodes) if callable(f) else np.asarray(f)
    gv = g(rule.nodes) if callable(g) else np.asarray(g)
    return rule.integrate(gp_arrays(conj_arrays(fv, m), gv, m))


def hardy_norm(f, rule: QuadratureRule) -> float:
    fv = f(rule.nodes) if callable(f) else np.asarray(f)
    return float(np.sqrt(rule.integrate(np.sum(fv * fv, axis=-1))))


__all__ = [
    "BoundarySurface",
    "QuadratureRule",
    "focused_sphere_quadrature",
    "hardy_inner_product",
    "hardy_norm",
    "sphere_quadrature",
    "transport_quadrature",
]
