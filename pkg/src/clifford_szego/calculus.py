"""Differential operators on Clifford-valued functions of a paravector.

Two function representations are supported:

* :class:`MultivectorPolynomial` -- exact (rational) or float polynomials in
  ``z0, ..., zm`` with multivector coefficients; derivatives are exact.
* :class:`FieldHandle` -- an arbitrary evaluator, differentiated with central
  differences of order two.

Monomials are real valued, so ``c * z**alpha == z**alpha * c`` and the
coefficient side only matters once the operators multiply by generators.
Left operators multiply by ``e_i`` on the left, right operators on the right.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable

import numpy as np

from .clifford import EXACT_TYPES, algebra, blade_left_arrays, blade_right_arrays, conj_arrays, exact as to_exact, gp_arrays

DEFAULT_STEP = 1e-4
DEFAULT_STEP_SECOND = 1e-3


class DomainError(ValueError):
    """Evaluation or finite-difference stencil outside the guarded region."""


def _blade_vector(m: int, index: int, exact: bool) -> np.ndarray:
    v = np.zeros(algebra(m).dim, dtype=object if exact else float)
    if exact:
        v[:] = to_exact(0)
        v[index] = to_exact(1)
    else:
        v[index] = 1.0
    return v


class MultivectorPolynomial:
    """Finite sum ``sum_alpha c_alpha z**alpha`` with multivector ``c_alpha``.

    ``terms`` maps exponent tuples of length ``m+1`` to coefficient arrays of
    length ``2**m``.  Zero coefficients are pruned.
    """

    __slots__ = ("m", "exact", "terms")

    def __init__(self, m: int, terms: dict | None = None, exact: bool = True):
        self.m = m
        self.exact = exact
        self.terms: dict[tuple, np.ndarray] = {}
        for exp, coeff in (terms or {}).items():
            self._accumulate(tuple(int(e) for e in exp), np.asarray(coeff))

    def _accumulate(self, exp: tuple, coeff: np.ndarray) -> None:
        if len(exp) != self.m + 1:
            raise ValueError(f"exponent {exp} has wrong length for m={self.m}")
        c = self.terms.get(exp)
        c = coeff.copy() if c is None else c + coeff
        if all(v == 0 for v in c):
            self.terms.pop(exp, None)
        else:
            self.terms[exp] = c

    # constructors
    @classmethod
    def constant(cls, m: int, coeff, exact: bool = True) -> "MultivectorPolynomial":
        c = np.asarray(coeff, dtype=object if exact else float)
        if c.ndim == 0:
            c = c * _blade_vector(m, 0, exact)
        return cls(m, {(0,) * (m + 1): c}, exact=exact)

    @classmethod
    def variable(cls, m: int, i: int, exact: bool = True) -> "MultivectorPolynomial":
        """The real coordinate ``z_i`` (scalar valued)."""
        exp = [0] * (m + 1)
        exp[i] = 1
        return cls(m, {tuple(exp): _blade_vector(m, 0, exact)}, exact=exact)

    @classmethod
    def from_terms(cls, m: int, items: Iterable[tuple[tuple, dict]], exact: bool = True):
        """Build from ``[(exponent, {generators: value}), ...]``."""
        alg = algebra(m)
        p = cls(m, exact=exact)
        for exp, blades in items:
            c = np.zeros(alg.dim, dtype=object if exact else float)
            if exact:
                c[:] = to_exact(0)
            for gens, val in blades.items():
                c[alg.blade_index(gens)] += to_exact(val) if exact else float(val)
            p._accumulate(tuple(exp), c)
        return p

    def _new(self, terms=None) -> "MultivectorPolynomial":
        return MultivectorPolynomial(self.m, terms, exact=self.exact)

    # structure
    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def copy(self) -> "MultivectorPolynomial":
        return self._new({e: c.copy() for e, c in self.terms.items()})

    def to_float(self) -> "MultivectorPolynomial":
        return MultivectorPolynomial(self.m, {e: c.astype(float) for e, c in self.terms.items()}, exact=False)

    def component(self, blade: int) -> "MultivectorPolynomial":
        """Real polynomial ``f_A`` (scalar valued) of blade index ``blade``."""
        out = self._new()
        for e, c in self.terms.items():
            if c[blade] != 0:
                out._accumulate(e, c[blade] * _blade_vector(self.m, 0, self.exact))
        return out

    # arithmetic
    def __add__(self, other: "MultivectorPolynomial") -> "MultivectorPolynomial":
        out = self.copy()
        for e, c in other.terms.items():
            out._accumulate(e, c)
        return out

    def __neg__(self) -> "MultivectorPolynomial":
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MultivectorPolynomial") -> "MultivectorPolynomial":
        return self + (-other)

    def scale(self, s) -> "MultivectorPolynomial":
        return self._new({e: c * s for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, MultivectorPolynomial):
            return poly_product(self, other)
        if isinstance(other, (int, float) + EXACT_TYPES):
            return self.scale(other)
        return NotImplemented

    __rmul__ = scale

    def left_mul(self, a: np.ndarray) -> "MultivectorPolynomial":
        """``a * f`` for a constant multivector coefficient array ``a``."""
        a = np.asarray(a)
        return self._new({e: gp_arrays(a, c, self.m) for e, c in self.terms.items()})

    def right_mul(self, a: np.ndarray) -> "MultivectorPolynomial":
        a = np.asarray(a)
        return self._new({e: gp_arrays(c, a, self.m) for e, c in self.terms.items()})

    def blade_left(self, index: int) -> "MultivectorPolynomial":
        """``e_A * f`` for the blade with bitmask ``index``."""
        return self._new({e: blade_left_arrays(index, c, self.m) for e, c in self.terms.items()})

    def blade_right(self, index: int) -> "MultivectorPolynomial":
        return self._new({e: blade_right_arrays(c, index, self.m) for e, c in self.terms.items()})

    def conj(self) -> "MultivectorPolynomial":
        return self._new({e: conj_arrays(c, self.m) for e, c in self.terms.items()})

    def scalar_part(self) -> "MultivectorPolynomial":
        return self.component(0)

    def vector_rest(self) -> "MultivectorPolynomial":
        """``R(f) = f - Sc(f)``."""
        return self - self.scalar_part()

    # calculus
    def derivative(self, i: int) -> "MultivectorPolynomial":
        out = self._new()
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out._accumulate(tuple(ne), c * e[i])
        return out

    def compose_affine(self, center: np.ndarray, scale) -> "MultivectorPolynomial":
        """``g(z) = f((z - center) / scale)`` expanded exactly."""
        m = self.m
        out = self._new()
        zero = to_exact(0) if self.exact else 0.0
        # (z_k - c_k)/s as polynomials
        lin = []
        for k in range(m + 1):
            zk = MultivectorPolynomial.variable(m, k, self.exact)
            ck = MultivectorPolynomial.constant(m, center[k], self.exact) if center[k] != zero else self._new()
            lin.append((zk - ck).scale(1 / to_exact(scale) if self.exact else 1.0 / scale))
        powers: dict[tuple, MultivectorPolynomial] = {}

        def power(k: int, n: int) -> MultivectorPolynomial:
            key = (k, n)
            if key not in powers:
                powers[key] = MultivectorPolynomial.constant(m, 1, self.exact) if n == 0 else poly_product(power(k, n - 1), lin[k])
            return powers[key]

        for e, c in self.terms.items():
            term = MultivectorPolynomial.constant(m, c, self.exact)
            for k, n in enumerate(e):
                if n:
                    term = poly_product(term, power(k, n))
            out = out + term
        return out

    # evaluation
    def __call__(self, z) -> np.ndarray:
        """Exact evaluation at a single point (sequence of ``m+1`` numbers)."""
        dim = algebra(self.m).dim
        out = np.zeros(dim, dtype=object if self.exact else float)
        if self.exact:
            out[:] = Fraction(0)
        for e, c in self.terms.items():
            mono = 1
            for zk, n in zip(z, e):
                if n:
                    mono = mono * zk**n
            out = out + c * mono
        return out

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(exponents (T, m+1), float coefficients (T, 2**m))``."""
        dim = algebra(self.m).dim
        if not self.terms:
            return np.zeros((0, self.m + 1), dtype=int), np.zeros((0, dim))
        exps = np.array(list(self.terms.keys()), dtype=int)
        coeffs = np.array([c.astype(float) for c in self.terms.values()])
        return exps, coeffs

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Vectorized float evaluation at points ``(n, m+1)`` -> ``(n, 2**m)``."""
        exps, coeffs = self.arrays()
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return monomials(pts, exps) @ coeffs

    def __repr__(self) -> str:
        return f"MultivectorPolynomial(m={self.m}, degree={self.degree}, terms={len(self.terms)})"

    def equals(self, other: "MultivectorPolynomial") -> bool:
        return (self - other).is_zero()


def monomials(points: np.ndarray, exps: np.ndarray) -> np.ndarray:
    """Matrix of monomials ``points**exps`` with shape ``(n_points, n_terms)``."""
    if exps.size == 0:
        return np.zeros((len(points), 0))
    maxdeg = int(exps.max())
    powers = np.ones((maxdeg + 1,) + points.shape)
    for k in range(1, maxdeg + 1):
        powers[k] = powers[k - 1] * points
    out = np.ones((points.shape[0], exps.shape[0]))
    for k in range(points.shape[1]):
        out *= powers[exps[:, k], :, k].T
    return out


def poly_product(f: MultivectorPolynomial, g: MultivectorPolynomial) -> MultivectorPolynomial:
    """Pointwise geometric product ``f(z) g(z)``."""
    if f.m != g.m:
        raise ValueError("signature mismatch")
    out = MultivectorPolynomial(f.m, exact=f.exact and g.exact)
    if not f.terms or not g.terms:
        return out
    fe = list(f.terms.items())
    ge = list(g.terms.items())
    fc = np.array([c for _, c in fe])
    gc = np.array([c for _, c in ge])
    prods = gp_arrays(fc[:, None, :], gc[None, :, :], f.m)
    for a, (ea, _) in enumerate(fe):
        for b, (eb, _) in enumerate(ge):
            out._accumulate(tuple(x + y for x, y in zip(ea, eb)), prods[a, b])
    return out


# -- Dirac operators -----------------------------------------------------------


def _gen(m: int, i: int, exact: bool) -> np.ndarray:
    return _blade_vector(m, 1 << (i - 1), exact)


def dirac(f: MultivectorPolynomial, bar: bool = False, side: str = "left") -> MultivectorPolynomial:
    """``D f = d0 f + sum e_i di f`` (``bar`` flips the sign of the sum).

    ``side="right"`` computes ``f D = d0 f + sum (di f) e_i``.
    """
    sign = -1 if bar else 1
    out = f.derivative(0)
    for i in range(1, f.m + 1):
        di = f.derivative(i)
        bit = 1 << (i - 1)
        term = di.blade_left(bit) if side == "left" else di.blade_right(bit)
        out = out + term if sign > 0 else out - term
    return out


def dirac_D(f, side: str = "left", **fd):
    if isinstance(f, MultivectorPolynomial):
        return dirac(f, bar=False, side=side)
    return f.dirac(bar=False, side=side, **fd)


def dirac_Dbar(f, side: str = "left", **fd):
    if isinstance(f, MultivectorPolynomial):
        return dirac(f, bar=True, side=side)
    return f.dirac(bar=True, side=side, **fd)


def laplacian(f):
    if isinstance(f, MultivectorPolynomial):
        out = MultivectorPolynomial(f.m, exact=f.exact)
        for i in range(f.m + 1):
            out = out + f.derivative(i).derivative(i)
        return out
    return f.laplacian()


# -- finite differences ------------------------------------------------------------


@dataclass(frozen=True)
class FDScheme:
    """Central differences of order two."""

    h: float = DEFAULT_STEP
    order: int = 2

    def __post_init__(self):
        if not 1e-6 <= self.h <= 1e-2:
            raise ValueError(f"finite-difference step {self.h} outside [1e-6, 1e-2]")
        if self.order != 2:
            raise ValueError("only second-order central differences are implemented")


@dataclass(frozen=True)
class FieldHandle:
    """Multivector valued field given by a vectorized evaluator.

    ``evaluator`` maps points ``(n, m+1)`` to values ``(n, 2**m)``; ``guard``
    maps points to a boolean mask of admissible points.
    """

    m: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    guard: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.guard is not None and not np.all(self.guard(pts)):
            raise DomainError("evaluation outside the guarded region")
        return np.asarray(self.evaluator(pts), dtype=float)

    def partial(self, points, i: int, h: float = DEFAULT_STEP) -> np.ndarray:
        FDScheme(h)
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        step = np.zeros(self.m + 1)
        step[i] = h
        return (self(pts + step) - self(pts - step)) / (2 * h)

    def second_partial(self, points, i: int, h: float = DEFAULT_STEP_SECOND) -> np.ndarray:
        """``d_i^2`` by nested first differences (stencil ``z +- 2h e_i``)."""
        inner = FieldHandle(self.m, lambda p: self.partial(p, i, h), self.guard)
        return inner.partial(points, i, h)

    def dirac(self, bar: bool = False, side: str = "left", h: float = DEFAULT_STEP) -> "FieldHandle":
        sign = -1.0 if bar else 1.0
        m = self.m

        def ev(pts):
            out = self.partial(pts, 0, h)
            for i in range(1, m + 1):
                e = _gen(m, i, False)
                di = self.partial(pts, i, h)
                out = out + sign * (gp_arrays(e, di, m) if side == "left" else gp_arrays(di, e, m))
            return out

        return FieldHandle(m, ev, self.guard)

    def laplacian(self, h: float = DEFAULT_STEP_SECOND) -> "FieldHandle":
        m = self.m
        return FieldHandle(m, lambda pts: sum(self.second_partial(pts, i, h) for i in range(m + 1)), self.guard)


def field_from_polynomial(p: MultivectorPolynomial, guard=None) -> FieldHandle:
    q = p.to_float() if p.exact else p
    return FieldHandle(p.m, q.evaluate, guard)


# -- generalized product rules ---------------------------------------------------------


def mod4_selector(i: int, m: int) -> list[int]:
    """Blades ``A`` with ``i not in A, |A| = 0,1 mod 4`` or ``i in A, |A| = 2,3 mod 4``.

    These are exactly the blades for which ``e_i e_A == conj(e_A) e_i``.
    """
    alg = algebra(m)
    bit = 1 << (i - 1)
    out = []
    for a in range(alg.dim):
        r = int(alg.grades[a]) % 4
        if (not a & bit and r in (0, 1)) or (a & bit and r in (2, 3)):
            out.append(a)
    return out


def commutation_failures(i: int, m: int) -> list[int]:
    """Brute force: blades with ``e_i e_A != conj(e_A) e_i``."""
    alg = algebra(m)
    e = _gen(m, i, False)
    out = []
    for a in range(alg.dim):
        ea = _blade_vector(m, a, False)
        if not np.array_equal(gp_arrays(e, ea, m), gp_arrays(conj_arrays(ea, m), e, m)):
            out.append(a)
    return out


PRODUCT_RULE_VARIANTS = ("D-left", "D-right", "Dbar-left", "Dbar-right")


def _blade_sum(f: MultivectorPolynomial, blades: Iterable[int], i: int, side: str) -> MultivectorPolynomial:
    """``sum_A f_A e_i e_A`` (left) or ``sum_A f_A e_A e_i`` (right)."""
    m = f.m
    out = MultivectorPolynomial(m, exact=f.exact)
    bit = 1 << (i - 1)
    for a in blades:
        fa = f.component(a)
        if fa.is_zero():
            continue
        term = fa.blade_left(a)
        out = out + (term.blade_left(bit) if side == "left" else term.blade_right(bit))
    return out


def _printed_sum(f: MultivectorPolynomial, g: MultivectorPolynomial, sign: int) -> MultivectorPolynomial:
    m = f.m
    out = MultivectorPolynomial(m, exact=f.exact)
    for i in range(1, m + 1):
        dg = g.derivative(i)
        for a in mod4_selector(i, m):
            fa = f.component(a)
            if not fa.is_zero():
                out = out + poly_product(fa, dg).scale(2 * sign)
    return out


def product_rule_residual(variant: str, f: MultivectorPolynomial, g: MultivectorPolynomial,
                          form: str = "forced") -> MultivectorPolynomial:
    """Left-hand minus right-hand side of a generalized Leibniz rule.

    ``form="printed"`` uses the correction terms exactly as they are usually
    quoted: ``2 R(f) d0 g`` and ``+-2 sum_i sum_{A in S_i} f_A di g`` with
    ``S_i = mod4_selector(i)``.  ``form="forced"`` uses the terms the algebra
    actually produces: ``(f - conj f) d0 g`` and ``+-2 sum_i sum_{A not in S_i}
    f_A e_i e_A di g`` (mirrored for the right-hand operators).  Only the
    forced form vanishes identically.
    """
    if variant not in PRODUCT_RULE_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if form not in ("forced", "printed"):
        raise ValueError(f"unknown form {form!r}")
    m = f.m
    bar = variant.startswith("Dbar")
    sign = -1 if bar else 1
    right = variant.endswith("right")
    side = "right" if right else "left"
    lhs = dirac(poly_product(f, g), bar=bar, side=side)

    if not right:
        rhs = poly_product(dirac(f, bar=bar), g) + poly_product(f.conj(), dirac(g, bar=bar))
        if form == "printed":
            rhs = rhs + poly_product(f.vector_rest(), g.derivative(0)).scale(2)
            rhs = rhs + _printed_sum(f, g, sign)
        else:
            rhs = rhs + poly_product(f - f.conj(), g.derivative(0))
            for i in range(1, m + 1):
                failures = [a for a in range(algebra(m).dim) if a not in mod4_selector(i, m)]
                rhs = rhs + poly_product(_blade_sum(f, failures, i, "left"), g.derivative(i)).scale(2 * sign)
        return lhs - rhs

    rhs = poly_product(dirac(f, bar=bar, side="right"), g.conj()) + poly_product(f, dirac(g, bar=bar, side="right"))
    if form == "printed":
        rhs = rhs + poly_product(f.derivative(0), g.vector_rest()).scale(2)
        rhs = rhs + _printed_sum(g, f, sign)
    else:
        rhs = rhs + poly_product(f.derivative(0), g - g.conj())
        for i in range(1, m + 1):
            failures = [a for a in range(algebra(m).dim) if a not in mod4_selector(i, m)]
            rhs = rhs + poly_product(f.derivative(i), _blade_sum(g, failures, i, "right")).scale(2 * sign)
    return lhs - rhs


def random_polynomial(m: int, degree: int, rng: np.random.Generator, exact: bool = True,
                      density: float = 0.35, denom: int = 5) -> MultivectorPolynomial:
    """Random polynomial of total degree <= ``degree`` with rational coefficients."""
    dim = algebra(m).dim
    p = MultivectorPolynomial(m, exact=exact)
    for exp in product(range(degree + 1), repeat=m + 1):
        if sum(exp) > degree or rng.random() > density:
            continue
        mask = rng.random(dim) < 0.5
        nums = rng.integers(-6, 7, size=dim) * mask
        dens = rng.integers(1, denom + 1, size=dim)
        if exact:
            c = np.array([to_exact(Fraction(int(n), int(d))) for n, d in zip(nums, dens)], dtype=object)
        else:
            c = nums / dens
        p._accumulate(exp, c)
    return p
