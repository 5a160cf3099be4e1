"""Concrete left-monogenic families.

Fueter variables ``Z_i = z_i - z_0 e_i`` and their symmetrized products span
the homogeneous left-monogenic polynomials; the Cauchy kernel
``conj(x)/|x|^{m+1}`` and its ``Dbar`` derivatives supply boundary-peaking
test functions.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial

import numpy as np

from .calculus import FieldHandle, MultivectorPolynomial, monomials
from .clifford import algebra, conj_arrays, exact, paravector_arrays


@lru_cache(maxsize=None)
def fueter_variable(i: int, m: int) -> MultivectorPolynomial:
    """``Z_i = z_i - z_0 e_i`` as an exact polynomial."""
    if not 1 <= i <= m:
        raise ValueError(f"Fueter variable index {i} outside 1..{m}")
    return MultivectorPolynomial.from_terms(
        m,
        [(_unit_exp(m, i), {(): 1}), (_unit_exp(m, 0), {(i,): -1})],
    )


def _unit_exp(m: int, k: int) -> tuple:
    e = [0] * (m + 1)
    e[k] = 1
    return tuple(e)


def _counts(alpha, m: int) -> tuple:
    c = Counter(alpha)
    if any(not 1 <= i <= m for i in c):
        raise ValueError(f"labels in {alpha} must lie in 1..{m}")
    return tuple(c.get(i, 0) for i in range(1, m + 1))


@lru_cache(maxsize=None)
def _ordered_sum(counts: tuple, m: int) -> MultivectorPolynomial:
    """Sum over the distinct orderings of the multiset ``counts`` of Z products."""
    if sum(counts) == 0:
        return MultivectorPolynomial.constant(m, 1)
    out = MultivectorPolynomial(m)
    for i, c in enumerate(counts, start=1):
        if c:
            rest = list(counts)
            rest[i - 1] -= 1
            out = out + _ordered_sum(tuple(rest), m) * fueter_variable(i, m)
    return out


@lru_cache(maxsize=None)
def _fueter_by_counts(counts: tuple, m: int) -> MultivectorPolynomial:
    k = sum(counts)
    mult = 1
    for c in counts:
        mult *= factorial(c)
    return _ordered_sum(counts, m).scale(exact(mult) / factorial(k))


def fueter_polynomial(alpha, m: int) -> MultivectorPolynomial:
    """Symmetrized product ``V_alpha = (1/|alpha|!) sum_sigma Z_{a_sigma(1)} ... Z_{a_sigma(k)}``.

    ``alpha`` lists the labels of the Fueter variables, e.g. ``(1, 1, 2)`` for
    the symmetrization of ``Z_1 Z_1 Z_2``.  The empty tuple gives ``1``.
    """
    return _fueter_by_counts(_counts(alpha, m), m)


def fueter_indices(N: int, m: int) -> list[tuple]:
    """All label multisets of size <= N, by degree then lexicographically."""
    out = []
    for k in range(N + 1):
        out.extend(combinations_with_replacement(range(1, m + 1), k))
    return out


@dataclass(frozen=True)
class BasisElement:
    alpha: tuple
    blade: int
    polynomial: MultivectorPolynomial

    @property
    def degree(self) -> int:
        return len(self.alpha)


def basis_up_to_degree(N: int, m: int) -> list[BasisElement]:
    """Real spanning set ``V_alpha e_A`` ordered by degree, alpha, then blade."""
    out = []
    for alpha in fueter_indices(N, m):
        v = fueter_polynomial(alpha, m)
        for a in range(algebra(m).dim):
            out.append(BasisElement(alpha, a, v.blade_right(a)))
    return out


class PolynomialBank:
    """Float evaluation of many polynomials sharing one monomial table.

    Points are mapped to ``u = (z - center) / scale`` before evaluation, so a
    bank built from ``V_alpha`` evaluates ``V_alpha((z - center)/scale)``.
    """

    def __init__(self, polys: list[MultivectorPolynomial], m: int,
                 center=None, scale: float = 1.0):
        self.m = m
        self.center = np.zeros(m + 1) if center is None else np.asarray(center, dtype=float)
        self.scale = float(scale)
        exps = sorted({e for p in polys for e in p.terms})
        if not exps:
            exps = [(0,) * (m + 1)]
        index = {e: k for k, e in enumerate(exps)}
        self.exps = np.array(exps, dtype=int)
        dim = algebra(m).dim
        coef = np.zeros((len(polys), len(exps), dim))
        for j, p in enumerate(polys):
            for e, c in p.terms.items():
                coef[j, index[e]] = c.astype(float)
        self.coef = coef

    def __len__(self) -> int:
        return self.coef.shape[0]

    def evaluate(self, points) -> np.ndarray:
        """Values with shape ``(n_points, n_polys, 2**m)``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        u = (pts - self.center) / self.scale
        mono = monomials(u, self.exps)
        return np.einsum("pt,jtd->pjd", mono, self.coef, optimize=True)


def fueter_bank(N: int, m: int, center=None, scale: float = 1.0, derivative: bool = False) -> PolynomialBank:
    """Bank of ``V_alpha`` (or ``Dbar V_alpha`` w.r.t. ``z``) for ``|alpha| <= N``."""
    from .calculus import dirac

    polys = [fueter_polynomial(a, m) for a in fueter_indices(N, m)]
    if derivative:
        polys = [dirac(p, bar=True) for p in polys]
    bank = PolynomialBank(polys, m, center, scale)
    if derivative:
        # chain rule for u = (z - center) / scale
        bank.coef /= bank.scale
    return bank


# -- Cauchy kernel ---------------------------------------------------------------------


class PoleError(ValueError):
    """Evaluation at the pole of a kernel."""


@dataclass(frozen=True)
class CauchyKernelSpec:
    pole: np.ndarray
    normalization: float = 1.0

    @property
    def m(self) -> int:
        return len(self.pole) - 1


def _offsets(spec: CauchyKernelSpec, z) -> np.ndarray:
    x = np.atleast_2d(np.asarray(z, dtype=float)) - np.asarray(spec.pole, dtype=float)
    if np.any(np.sum(x * x, axis=-1) == 0):
        raise PoleError("evaluation at the pole of the Cauchy kernel")
    return x


def cauchy_kernel(spec: CauchyKernelSpec, z) -> np.ndarray:
    """``conj(z - w0) / |z - w0|^{m+1}`` at points ``(n, m+1)``."""
    m = spec.m
    x = _offsets(spec, z)
    r = np.linalg.norm(x, axis=-1)[:, None]
    return spec.normalization * conj_arrays(paravector_arrays(x, m), m) / r ** (m + 1)


def cauchy_kernel_dbar(spec: CauchyKernelSpec, z) -> np.ndarray:
    """``Dbar K = 2 d0 K = 2 (|x|^2 - (m+1) x0 conj(x)) / |x|^{m+3}``."""
    m = spec.m
    x = _offsets(spec, z)
    r2 = np.sum(x * x, axis=-1)[:, None]
    xbar = conj_arrays(paravector_arrays(x, m), m)
    scal = np.zeros_like(xbar)
    scal[:, 0] = r2[:, 0]
    out = (scal - (m + 1) * x[:, :1] * xbar) / r2 ** ((m + 3) / 2)
    return 2 * spec.normalization * out


def cauchy_kernel_dbar2(spec: CauchyKernelSpec, z) -> np.ndarray:
    """``Dbar^2 K = 4 d0^2 K``, fully differentiated.

    ``4 (m+1) [ -(2 x0 + conj x)/|x|^{m+3} + (m+3) x0^2 conj(x)/|x|^{m+5} ]``.
    """
    m = spec.m
    x = _offsets(spec, z)
    r2 = np.sum(x * x, axis=-1)[:, None]
    x0 = x[:, :1]
    xbar = conj_arrays(paravector_arrays(x, m), m)
    two_x0 = np.zeros_like(xbar)
    two_x0[:, 0] = 2 * x0[:, 0]
    out = -(two_x0 + xbar) / r2 ** ((m + 3) / 2) + (m + 3) * x0**2 * xbar / r2 ** ((m + 5) / 2)
    return 4 * (m + 1) * spec.normalization * out


def cauchy_kernel_dbar2_printed(spec: CauchyKernelSpec, z) -> np.ndarray:
    """The commonly quoted shortcut ``4 [-(m+1) conj(x)/|x|^{m+3}]``.

    Agrees with :func:`cauchy_kernel_dbar2` only where ``x0 = 0``.
    """
    m = spec.m
    x = _offsets(spec, z)
    r2 = np.sum(x * x, axis=-1)[:, None]
    xbar = conj_arrays(paravector_arrays(x, m), m)
    return -4 * (m + 1) * spec.normalization * xbar / r2 ** ((m + 3) / 2)


def cauchy_field(spec: CauchyKernelSpec, guard=None) -> FieldHandle:
    return FieldHandle(spec.m, lambda p: cauchy_kernel(spec, p), guard)


@dataclass(frozen=True)
class K2Spec:
    """Test function ``Dbar K(z - w0) - Dbar K(p0 - w0)``, zero at ``p0``."""

    pole: np.ndarray
    zero_point: np.ndarray
    normalization: float = 1.0
    cauchy: CauchyKernelSpec = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "cauchy", CauchyKernelSpec(np.asarray(self.pole, float), self.normalization))

    @property
    def m(self) -> int:
        return len(self.pole) - 1

    def offset(self) -> np.ndarray:
        return cauchy_kernel_dbar(self.cauchy, self.zero_point)[0]

    def __call__(self, z) -> np.ndarray:
        return cauchy_kernel_dbar(self.cauchy, z) - self.offset()

    def dbar(self, z) -> np.ndarray:
        """``Dbar K2`` in closed form."""
        return cauchy_kernel_dbar2(self.cauchy, z)


def k2_test_function(spec: K2Spec, guard=None) -> FieldHandle:
    return FieldHandle(spec.m, spec, guard)


def shifted_fueter(i: int, m: int, zero_point) -> MultivectorPolynomial:
    """``Z_i(z) - Z_i(p)``: degree one, monogenic, vanishing at ``p``; ``Dbar = -2 e_i``."""
    p = [exact(float(v)) for v in zero_point]
    z = fueter_variable(i, m)
    return z - MultivectorPolynomial.constant(m, z(p))


def polynomial_field(p: MultivectorPolynomial, center=None, scale: float = 1.0) -> FieldHandle:
    bank = PolynomialBank([p.to_float() if p.exact else p], p.m, center, scale)
    return FieldHandle(p.m, lambda pts: bank.evaluate(pts)[:, 0, :])


def monomial_count(N: int, m: int) -> int:
    return len(fueter_indices(N, m))


__all__ = [
    "BasisElement",
    "CauchyKernelSpec",
    "K2Spec",
    "PoleError",
    "PolynomialBank",
    "basis_up_to_degree",
    "cauchy_field",
    "cauchy_kernel",
    "cauchy_kernel_dbar",
    "cauchy_kernel_dbar2",
    "cauchy_kernel_dbar2_printed",
    "fueter_bank",
    "fueter_indices",
    "fueter_polynomial",
    "fueter_variable",
    "k2_test_function",
    "monomials",
    "shifted_fueter",
]
