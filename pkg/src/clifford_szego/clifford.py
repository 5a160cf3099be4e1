"""Arithmetic of the real Clifford algebra Cl_{0m} and its paravectors.

Blades are stored densely, indexed by bitmask: bit ``i-1`` set means the
generator ``e_i`` is a factor, so index 0 is the unit, 1 is ``e1``, 2 is
``e2``, 3 is ``e1e2`` and so on.  Every generator squares to ``-1``.

Two numeric backends share the same surface: float64 arrays for kernel
numerics and object arrays of exact rationals (``gmpy2.mpq``, falling back to
:class:`fractions.Fraction`) for identity checks.  The low level ``*_arrays``
helpers act on the last axis of arrays of shape ``(..., 2**m)`` and are what
the numerical modules use in bulk.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Real
from typing import Iterable, Sequence

import numpy as np

try:  # C rationals; Fraction is the fallback exact scalar
    from gmpy2 import mpq as _exact_scalar
except ImportError:  # pragma: no cover
    _exact_scalar = Fraction

MAX_GENERATORS = 6
EXACT_TYPES = (Fraction, type(_exact_scalar(1)))


def exact(value) -> Real:
    """Exact rational scalar (gmpy2 ``mpq`` when available)."""
    if isinstance(value, float):
        return _exact_scalar(Fraction(value))
    return _exact_scalar(value)


class SignatureError(ValueError):
    """Operands belong to algebras with different numbers of generators."""


def _popcount(x: int) -> int:
    return bin(x).count("1")


def blade_sign(a: int, b: int) -> int:
    """Sign of ``e_a e_b`` relative to ``e_{a^b}`` for bitmask blades."""
    swaps = 0
    x = a >> 1
    while x:
        swaps += _popcount(x & b)
        x >>= 1
    # each shared generator contributes e_i e_i = -1
    swaps += _popcount(a & b)
    return -1 if swaps & 1 else 1


class Algebra:
    """Static tables for Cl_{0m}."""

    def __init__(self, m: int):
        if not 1 <= m <= MAX_GENERATORS:
            raise ValueError(f"number of generators must be in [1, {MAX_GENERATORS}], got {m}")
        self.m = m
        self.dim = 1 << m
        idx = np.arange(self.dim)
        self.grades = np.array([_popcount(i) for i in idx])
        self.sign_table = np.array(
            [[blade_sign(i, j) for j in idx] for i in idx], dtype=np.int64
        )
        r = self.grades
        self.reverse_signs = np.where((r * (r - 1) // 2) % 2 == 0, 1, -1)
        self.conj_signs = self.reverse_signs * np.where(r % 2 == 0, 1, -1)
        self.involution_signs = np.where(r % 2 == 0, 1, -1)
        self.paravector_index = np.array([0] + [1 << (i - 1) for i in range(1, m + 1)])

    def blade_name(self, index: int) -> str:
        if index == 0:
            return "1"
        return "e" + "".join(str(i + 1) for i in range(self.m) if index >> i & 1)

    def blade_index(self, generators: Iterable[int]) -> int:
        """Bitmask for a set of generator labels (1-based)."""
        out = 0
        for g in generators:
            if not 1 <= g <= self.m:
                raise ValueError(f"generator e{g} not in Cl_0{self.m}")
            out |= 1 << (g - 1)
        return out

    def __repr__(self) -> str:
        return f"Algebra(m={self.m})"


@lru_cache(maxsize=None)
def algebra(m: int) -> Algebra:
    return Algebra(m)


# -- array level kernels ------------------------------------------------------


def gp_arrays(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    """Geometric product along the last axis (broadcasting over the rest)."""
    alg = algebra(m)
    a = np.asarray(a)
    b = np.asarray(b)
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (alg.dim,)
    dtype = object if (a.dtype == object or b.dtype == object) else np.result_type(a, b, float)
    out = np.zeros(shape, dtype=dtype)
    cols = np.arange(alg.dim)
    if dtype == object:
        for i in range(alg.dim):
            ai = a[..., i : i + 1]
            if not np.any(ai != 0):
                continue
            prod = ai * b
            signs = alg.sign_table[i]
            out[..., i ^ cols] += np.where(signs > 0, prod, -prod)
        return out
    for i in range(alg.dim):
        ai = a[..., i : i + 1]
        out[..., i ^ cols] += alg.sign_table[i] * ai * b
    return out


def blade_left_arrays(index: int, b: np.ndarray, m: int) -> np.ndarray:
    """``e_index * b`` as a signed permutation of coefficients."""
    alg = algebra(m)
    b = np.asarray(b)
    cols = np.arange(alg.dim)
    out = np.empty_like(b)
    signs = alg.sign_table[index]
    out[..., index ^ cols] = np.where(signs > 0, b, -b)
    return out


def blade_right_arrays(b: np.ndarray, index: int, m: int) -> np.ndarray:
    """``b * e_index`` as a signed permutation of coefficients."""
    alg = algebra(m)
    b = np.asarray(b)
    cols = np.arange(alg.dim)
    out = np.empty_like(b)
    signs = alg.sign_table[:, index]
    out[..., cols ^ index] = np.where(signs > 0, b, -b)
    return out


def conj_arrays(a: np.ndarray, m: int) -> np.ndarray:
    return np.asarray(a) * algebra(m).conj_signs


def reverse_arrays(a: np.ndarray, m: int) -> np.ndarray:
    return np.asarray(a) * algebra(m).reverse_signs


def norm_arrays(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(a, dtype=float) ** 2, axis=-1))


def paravector_arrays(z: np.ndarray, m: int) -> np.ndarray:
    """Embed points of shape ``(..., m+1)`` as multivectors ``(..., 2**m)``."""
    z = np.asarray(z)
    alg = algebra(m)
    out = np.zeros(z.shape[:-1] + (alg.dim,), dtype=object if z.dtype == object else float)
    out[..., alg.paravector_index] = z
    return out


def extract_paravector_arrays(a: np.ndarray, m: int) -> np.ndarray:
    return np.asarray(a)[..., algebra(m).paravector_index]


def off_paravector_mass(a: np.ndarray, m: int) -> np.ndarray:
    """Norm of the part of ``a`` outside the paravector subspace."""
    mask = np.ones(algebra(m).dim, dtype=bool)
    mask[algebra(m).paravector_index] = False
    return norm_arrays(np.asarray(a, dtype=float)[..., mask])


def paravector_inverse_arrays(z: np.ndarray) -> np.ndarray:
    """Inverse of paravectors given by components ``(..., m+1)``: conj(z)/|z|^2."""
    z = np.asarray(z, dtype=float)
    sq = np.sum(z**2, axis=-1, keepdims=True)
    if np.any(sq == 0):
        raise ZeroDivisionError("zero paravector has no inverse")
    out = -z / sq
    out[..., 0] = z[..., 0] / sq[..., 0]
    return out


def left_matrix(a: np.ndarray, m: int) -> np.ndarray:
    """Real matrix of ``x -> a x``; conjugation corresponds to transposition."""
    alg = algebra(m)
    a = np.asarray(a, dtype=float)
    mat = np.zeros(a.shape[:-1] + (alg.dim, alg.dim))
    cols = np.arange(alg.dim)
    for i in range(alg.dim):
        # (a e_j)_{i^j} += sign(i, j) a_i
        mat[..., i ^ cols, cols] += alg.sign_table[i] * a[..., i : i + 1]
    return mat


# -- value types ----------------------------------------------------------------


def _as_coeffs(values, dim: int, exact: bool) -> np.ndarray:
    arr = np.array(values, dtype=object if exact else float)
    if arr.shape != (dim,):
        raise ValueError(f"expected {dim} coefficients, got shape {arr.shape}")
    if exact:
        arr = np.array([_to_exact(v) for v in arr], dtype=object)
    return arr


def _to_exact(v):
    return v if isinstance(v, EXACT_TYPES) else exact(v)


class Multivector:
    """Immutable element of Cl_{0m}.

    >>> e1 = Multivector.blade(2, [1])
    >>> (e1 * e1).scalar_part()
    -1.0
    """

    __slots__ = ("m", "_c")

    def __init__(self, m: int, coeffs: Sequence, exact: bool = False):
        alg = algebra(m)
        self.m = m
        c = _as_coeffs(coeffs, alg.dim, exact)
        c.flags.writeable = False
        self._c = c

    @classmethod
    def _wrap(cls, m: int, arr: np.ndarray) -> "Multivector":
        obj = cls.__new__(cls)
        obj.m = m
        arr = np.array(arr, copy=True)
        arr.flags.writeable = False
        obj._c = arr
        return obj

    # constructors
    @classmethod
    def zero(cls, m: int, exact: bool = False) -> "Multivector":
        return cls(m, [0] * algebra(m).dim, exact=exact)

    @classmethod
    def scalar(cls, m: int, value, exact: bool = False) -> "Multivector":
        c = [0] * algebra(m).dim
        c[0] = value
        return cls(m, c, exact=exact)

    @classmethod
    def blade(cls, m: int, generators: Iterable[int], value=1, exact: bool = False) -> "Multivector":
        alg = algebra(m)
        c = [0] * alg.dim
        idx = alg.blade_index(generators)
        c[idx] = value
        return cls(m, c, exact=exact)

    @classmethod
    def from_dict(cls, m: int, terms: dict, exact: bool = False) -> "Multivector":
        """Build from ``{tuple_of_generators: coefficient}``."""
        alg = algebra(m)
        c = [0] * alg.dim
        for gens, val in terms.items():
            c[alg.blade_index(gens)] += val
        return cls(m, c, exact=exact)

    # accessors
    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def exact(self) -> bool:
        return self._c.dtype == object

    def __getitem__(self, generators) -> Real:
        if isinstance(generators, int):
            return self._c[generators]
        return self._c[algebra(self.m).blade_index(generators)]

    def to_float(self) -> "Multivector":
        return Multivector._wrap(self.m, self._c.astype(float))

    def to_exact(self) -> "Multivector":
        return Multivector(self.m, list(self._c), exact=True)

    # algebra
    def _check(self, other: "Multivector") -> None:
        if self.m != other.m:
            raise SignatureError(f"Cl_0{self.m} vs Cl_0{other.m}")

    def _coerce(self, other):
        if isinstance(other, Multivector):
            self._check(other)
            return other
        if isinstance(other, (Real, Fraction)):
            return Multivector.scalar(self.m, other, exact=self.exact and not isinstance(other, float))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Multivector._wrap(self.m, self._c + other._c)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Multivector._wrap(self.m, self._c - other._c)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Multivector._wrap(self.m, other._c - self._c)

    def __neg__(self):
        return Multivector._wrap(self.m, -self._c)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        if isinstance(other, (Real, Fraction)):
            return Multivector._wrap(self.m, self._c * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (Real, Fraction)):
            return Multivector._wrap(self.m, other * self._c)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (Real, Fraction)):
            return Multivector._wrap(self.m, self._c / other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multivector) or other.m != self.m:
            return NotImplemented
        return bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash((self.m, tuple(self._c)))

    def conj(self) -> "Multivector":
        return conjugate(self)

    def reverse(self) -> "Multivector":
        return Multivector._wrap(self.m, reverse_arrays(self._c, self.m))

    def scalar_part(self):
        return scalar_part(self)

    def norm(self) -> float:
        return norm(self)

    def is_paravector(self, tol: float = 1e-10) -> bool:
        if self.exact:
            mask = np.ones(len(self._c), dtype=bool)
            mask[algebra(self.m).paravector_index] = False
            return all(v == 0 for v in self._c[mask])
        return float(off_paravector_mass(self._c, self.m)) <= tol * max(self.norm(), 1.0)

    def allclose(self, other: "Multivector", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self._c.astype(float), other._c.astype(float), rtol=0, atol=atol))

    def __repr__(self) -> str:
        alg = algebra(self.m)
        parts = [f"{v}*{alg.blade_name(i)}" for i, v in enumerate(self._c) if v != 0]
        return "Multivector(" + (" + ".join(parts) if parts else "0") + ")"


class Paravector:
    """Point ``z0 + z1 e1 + ... + zm em`` of R^{m+1}."""

    __slots__ = ("_z",)

    def __init__(self, components: Sequence):
        z = np.array(components, dtype=object if any(isinstance(v, EXACT_TYPES) for v in components) else float)
        if z.ndim != 1 or len(z) < 2:
            raise ValueError("a paravector needs m+1 >= 2 components")
        z.flags.writeable = False
        self._z = z

    @property
    def m(self) -> int:
        return len(self._z) - 1

    @property
    def components(self) -> np.ndarray:
        return self._z

    def to_multivector(self) -> Multivector:
        exact = self._z.dtype == object
        return Multivector._wrap(self.m, paravector_arrays(self._z, self.m)) if not exact else Multivector(
            self.m, paravector_arrays(self._z, self.m), exact=True
        )

    @classmethod
    def from_multivector(cls, a: Multivector, tol: float = 1e-10) -> "Paravector":
        if not a.is_paravector(tol):
            raise ValueError("multivector has mass outside the paravector subspace")
        return cls(list(extract_paravector_arrays(a.coeffs, a.m)))

    def conj(self) -> "Paravector":
        z = -self._z
        z[0] = self._z[0]
        return Paravector(list(z))

    def abs(self) -> float:
        return float(np.sqrt(np.sum(self._z.astype(float) ** 2)))

    def __add__(self, other: "Paravector") -> "Paravector":
        return Paravector(list(self._z + other._z))

    def __sub__(self, other: "Paravector") -> "Paravector":
        return Paravector(list(self._z - other._z))

    def __mul__(self, s) -> "Paravector":
        return Paravector(list(self._z * s))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"Paravector({list(self._z)})"


# -- operations -------------------------------------------------------------------


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    a._check(b)
    return Multivector._wrap(a.m, gp_arrays(a.coeffs, b.coeffs, a.m))


def conjugate(a: Multivector) -> Multivector:
    return Multivector._wrap(a.m, conj_arrays(a.coeffs, a.m))


def scalar_part(a: Multivector):
    return a.coeffs[0]


def vector_rest(a: Multivector) -> Multivector:
    """``a - Sc(a)``."""
    c = np.array(a.coeffs, copy=True)
    c[0] = c[0] * 0
    return Multivector._wrap(a.m, c)


def norm(a: Multivector) -> float:
    return float(norm_arrays(a.coeffs.astype(float)))


def scalar_product(a: Multivector, b: Multivector):
    """``<a, b> = Sc(a conj(b))``, equal to the coefficient dot product."""
    return scalar_part(a * conjugate(b))


def paravector_inverse(z: Paravector) -> Paravector:
    comps = z.components
    sq = sum(v * v for v in comps)
    if sq == 0:
        raise ZeroDivisionError("zero paravector has no inverse")
    return Paravector([comps[0] / sq] + [-v / sq for v in comps[1:]])


def multivector_inverse(a: Multivector) -> Multivector:
    """Inverse through the left regular representation (float backend)."""
    mat = left_matrix(a.coeffs, a.m)
    rhs = np.zeros(algebra(a.m).dim)
    rhs[0] = 1.0
    try:
        sol = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise ZeroDivisionError("multivector is not invertible") from exc
    return Multivector._wrap(a.m, sol)


def random_multivector(m: int, rng: np.random.Generator, exact: bool = False, denom: int = 7) -> Multivector:
    dim = algebra(m).dim
    if exact:
        nums = rng.integers(-9, 10, size=dim)
        dens = rng.integers(1, denom + 1, size=dim)
        return Multivector(m, [_exact_scalar(int(n), int(d)) for n, d in zip(nums, dens)], exact=True)
    return Multivector(m, rng.standard_normal(dim))


def basis_vectors(m: int, exact: bool = False) -> list[Multivector]:
    return [Multivector.blade(m, [i], exact=exact) for i in range(1, m + 1)]
