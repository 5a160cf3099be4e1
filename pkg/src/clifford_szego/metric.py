"""Szegő metric, curvature, distances and Carathéodory-type lower bounds."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.special import roots_legendre

from .calculus import DEFAULT_STEP, DEFAULT_STEP_SECOND, DomainError, FieldHandle, MultivectorPolynomial, dirac
from .clifford import algebra, conj_arrays, exact, gp_arrays
from .mobius import VahlenMatrix, apply, automorphy_factor, conformal_scale
from .monogenic import (
    CauchyKernelSpec,
    K2Spec,
    PolynomialBank,
    cauchy_kernel_dbar2,
    shifted_fueter,
)
from .quadrature import BoundarySurface, QuadratureRule, hardy_norm
from .szego import TruncatedSzegoKernel

NONSCALAR_TOL = 1e-9


class NonScalarDiagonal(ValueError):
    """Kernel diagonal carries a non-negligible non-scalar part."""


class SzegoMetric:
    """Line element ``lambda(z)|dz|`` with ``lambda(z) = Sc K(z, z)``."""

    def __init__(self, kernel: TruncatedSzegoKernel):
        self.kernel = kernel
        self.surface = kernel.surface
        self.m = kernel.m

    # -- density ---------------------------------------------------------------------

    def lam(self, z) -> np.ndarray:
        return self.kernel.lam(np.atleast_2d(z))

    def nonscalar_residual(self, z) -> np.ndarray:
        d = self.kernel.diagonal(np.atleast_2d(z))
        return np.linalg.norm(d[:, 1:], axis=1) / np.abs(d[:, 0])

    def checked_lam(self, z) -> np.ndarray:
        d = self.kernel.diagonal(np.atleast_2d(z))
        rel = np.linalg.norm(d[:, 1:], axis=1) / np.abs(d[:, 0])
        if np.any(rel > NONSCALAR_TOL):
            raise NonScalarDiagonal(f"non-scalar diagonal part {rel.max():.3e}")
        return d[:, 0]

    def _guard(self, pts):
        return self.surface.contains(pts)

    def log_lam_field(self) -> FieldHandle:
        return FieldHandle(self.m, lambda p: np.log(self.lam(p))[:, None], self._guard)

    def laplace_log_lam(self, z, h: float = DEFAULT_STEP_SECOND) -> np.ndarray:
        z = np.atleast_2d(z)
        return self.log_lam_field().laplacian(h)(z)[:, 0]

    # -- curvature -----------------------------------------------------------------------

    def curvature(self, z, h: float = DEFAULT_STEP_SECOND) -> np.ndarray:
        """``-(1/lambda^2) Delta log lambda`` with nested central differences."""
        z = np.atleast_2d(z)
        return -self.laplace_log_lam(z, h) / self.lam(z) ** 2

    def curvature_report(self, z, h: float = DEFAULT_STEP_SECOND) -> dict:
        k1 = self.curvature(z, h)
        k2 = self.curvature(z, h / 2)
        return {"curvature": k1, "curvature_half_step": k2,
                "richardson": (4 * k2 - k1) / 3,
                "sign_stable": np.sign(k1) == np.sign(k2)}

    # -- Gram-form positivity -------------------------------------------------------------

    def gram_form(self, z, rule: QuadratureRule | None = None) -> dict:
        """``K (K K_zbarz - K_z K_zbar)`` two ways.

        ``algebraic`` uses the kernel derivatives directly; ``norm`` is the
        squared Hardy norm of ``M = d_z K(z,z) - k_z K_zbar(z,z)`` by
        quadrature, with ``k_z = K(., z)`` and ``d_z = K_zbar(., z)``.
        """
        m = self.m
        z = np.atleast_2d(z)
        rule = self.kernel.rule() if rule is None else rule
        d = self.kernel.derivatives(z, z)
        inner = gp_arrays(d.K, d.K_zbarz, m) - gp_arrays(d.K_z, d.K_zbar, m)
        alg = gp_arrays(d.K, inner, m)
        out_norm = np.empty(len(z))
        for p in range(len(z)):
            out_norm[p] = hardy_norm(self.m_element(z[p], d, p), rule) ** 2
        return {"algebraic": alg[:, 0], "algebraic_nonscalar": np.linalg.norm(alg[:, 1:], axis=1),
                "norm": out_norm}

    def m_element(self, zp, d=None, p: int = 0):
        """Evaluator of ``M`` (vanishes at ``zp``)."""
        m = self.m
        kern = self.kernel
        if d is None:
            d = kern.derivatives(np.atleast_2d(zp), np.atleast_2d(zp))
        Kzz, Kzb = d.K[p], d.K_zbar[p]
        zs = np.atleast_2d(zp)
        Pz = conj_arrays(kern.basis.values(zs)[0], m)
        Dz = conj_arrays(kern.basis.derivative_values(zs)[0], m)
        s = kern.basis.kernel_scale

        def ev(w):
            Pw = kern.basis.values(np.atleast_2d(w))
            kz = s * np.sum(gp_arrays(Pw, Pz[None], m), axis=1)
            dz = s * np.sum(gp_arrays(Pw, Dz[None], m), axis=1)
            return gp_arrays(dz, Kzz, m) - gp_arrays(kz, Kzb, m)

        return ev

    def kernel_candidate(self, z, rule: QuadratureRule | None = None) -> tuple[float, float]:
        """``(|Dbar M(z)|, ||M||)`` for the kernel-derived extremal candidate."""
        m = self.m
        z = np.atleast_2d(z)
        rule = self.kernel.rule() if rule is None else rule
        d = self.kernel.derivatives(z, z)
        dm = gp_arrays(d.K_zbarz, d.K, m) - gp_arrays(d.K_z, d.K_zbar, m)
        return float(np.linalg.norm(dm[0])), hardy_norm(self.m_element(z[0], d), rule)

    def lambda_star(self, z, h: float = DEFAULT_STEP_SECOND) -> np.ndarray:
        """``sqrt(Delta log K(z,z)^2)``."""
        return np.sqrt(2 * self.laplace_log_lam(z, h))

    def lambda_star_unrooted(self, z, h: float = DEFAULT_STEP_SECOND) -> np.ndarray:
        return 2 * self.laplace_log_lam(z, h)


# -- paths and distance ------------------------------------------------------------------


@dataclass
class PathPolyline:
    vertices: np.ndarray

    def __post_init__(self):
        self.vertices = np.atleast_2d(np.asarray(self.vertices, dtype=float))

    def reversed(self) -> "PathPolyline":
        return PathPolyline(self.vertices[::-1].copy())


def path_length(density, path: PathPolyline, n_gauss: int = 8, refine: int = 1) -> float:
    """``int lambda |dz|`` by composite Gauss-Legendre on each segment.

    ``density`` is a :class:`SzegoMetric` or any callable of points.
    """
    lam = density.lam if isinstance(density, SzegoMetric) else density
    x, w = roots_legendre(n_gauss)
    t = np.concatenate([(x + 1 + 2 * k) / (2 * refine) for k in range(refine)])
    wt = np.tile(w / (2 * refine), refine)
    V = path.vertices
    seg = V[1:] - V[:-1]
    lens = np.linalg.norm(seg, axis=1)
    pts = V[:-1, None, :] + t[None, :, None] * seg[:, None, :]
    vals = np.asarray(lam(pts.reshape(-1, V.shape[1]))).reshape(len(seg), len(t))
    return float(np.sum(lens * (vals @ wt)))


@dataclass
class GridGraph:
    """Interior lattice with ``lambda(midpoint) * length`` edge weights."""

    points: np.ndarray
    step: float
    graph: object
    index: dict = field(repr=False, default_factory=dict)

    def nearest(self, z) -> int:
        return int(np.argmin(np.linalg.norm(self.points - np.asarray(z), axis=1)))

    def node_distances(self, sources) -> np.ndarray:
        return dijkstra(self.graph, directed=False, indices=np.asarray(sources))

    def node_distance(self, i: int, j: int) -> float:
        a, b = sorted((int(i), int(j)))
        return float(dijkstra(self.graph, directed=False, indices=a)[b])


def build_grid(metric: SzegoMetric, step: float, clearance: float | None = None) -> GridGraph:
    """Lattice of spacing ``step`` inside the domain, full-neighbour stencil (26 for m = 2)."""
    surface = metric.surface
    m = metric.m
    dim = m + 1
    clearance = 2 * step if clearance is None else clearance
    c, r = surface.image_sphere()
    n = int(np.floor(r / step))
    ax = np.arange(-n, n + 1)
    grid = np.stack(np.meshgrid(*([ax] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    pts = c + step * grid
    keep = surface.contains(pts, clearance)
    grid, pts = grid[keep], pts[keep]
    index = {tuple(g): k for k, g in enumerate(grid)}
    offs = np.stack(np.meshgrid(*([np.array([-1, 0, 1])] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    # half stencil: each undirected edge once
    offs = np.array([o for o in offs if tuple(o) > (0,) * dim])
    rows, cols = [], []
    for o in offs:
        for k, g in enumerate(grid):
            j = index.get(tuple(g + o))
            if j is not None:
                rows.append(k)
                cols.append(j)
    rows = np.array(rows, dtype=int)
    cols = np.array(cols, dtype=int)
    mids = (pts[rows] + pts[cols]) / 2
    lens = np.linalg.norm(pts[rows] - pts[cols], axis=1)
    weights = metric.lam(mids) * lens
    G = coo_matrix((weights, (rows, cols)), shape=(len(pts), len(pts))).tocsr()
    return GridGraph(pts, step, G, index)


def smooth_path(metric: SzegoMetric, path: PathPolyline, sweeps: int = 30, clearance: float = 0.0) -> PathPolyline:
    """Local relaxation: move interior vertices toward neighbour midpoints while length drops."""
    V = path.vertices.copy()
    if len(V) <= 2:
        return PathPolyline(V)
    best = path_length(metric, PathPolyline(V))
    for _ in range(sweeps):
        improved = False
        for k in range(1, len(V) - 1):
            for alpha in (0.5, 0.25):
                trial = V.copy()
                trial[k] = (1 - alpha) * V[k] + alpha * (V[k - 1] + V[k + 1]) / 2
                if not metric.surface.contains(trial[k : k + 1], clearance)[0]:
                    continue
                L = path_length(metric, PathPolyline(trial[k - 1 : k + 2]))
                L0 = path_length(metric, PathPolyline(V[k - 1 : k + 2]))
                if L < L0 - 1e-15:
                    V = trial
                    improved = True
                    break
        if not improved:
            break
    return PathPolyline(V)


@dataclass
class DistanceResult:
    value: float
    path: PathPolyline
    graph_value: float
    straight_value: float | None


def distance(metric: SzegoMetric, z1, z2, step: float = 0.1, grid: GridGraph | None = None,
             smooth: bool = True) -> DistanceResult:
    """Upper approximation of the geodesic distance with a witness polyline.

    The endpoints are linked to their nearest lattice nodes; Dijkstra runs from
    the lexicographically smaller endpoint so the computation is symmetric.
    The straight segment, when admissible, is kept as a competing witness.
    """
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if not np.all(metric.surface.contains(np.stack([z1, z2]))):
        raise DomainError("distance endpoints must lie inside the domain")
    if np.array_equal(z1, z2):
        return DistanceResult(0.0, PathPolyline(np.stack([z1, z2])), 0.0, 0.0)
    flip = tuple(z2) < tuple(z1)
    a, b = (z2, z1) if flip else (z1, z2)
    grid = build_grid(metric, step) if grid is None else grid
    ia, ib = grid.nearest(a), grid.nearest(b)
    dist, pred = dijkstra(grid.graph, directed=False, indices=ia, return_predecessors=True)
    if not np.isfinite(dist[ib]):
        raise DomainError("endpoints are not connected on the grid")
    chain = [ib]
    while chain[-1] != ia:
        chain.append(pred[chain[-1]])
    chain = chain[::-1]
    verts = np.concatenate([a[None], grid.points[chain], b[None]])
    path = PathPolyline(verts)
    graph_value = path_length(metric, path)
    if smooth:
        path = smooth_path(metric, path)
    value = path_length(metric, path)
    straight = None
    seg = PathPolyline(np.stack([a, b]))
    ts = np.linspace(0, 1, 33)[:, None]
    if np.all(metric.surface.contains(a + ts * (b - a))):
        straight = path_length(metric, seg, refine=8)
        if straight <= value:
            value, path = straight, seg
    if flip:
        path = path.reversed()
    return DistanceResult(value, path, graph_value, straight)


# -- Carathéodory-type lower bounds ------------------------------------------------------------


@dataclass
class Candidate:
    name: str
    dbar_at_z: float
    norm: float

    @property
    def ratio(self) -> float:
        return self.dbar_at_z / self.norm


@dataclass
class CaratheodoryEstimate:
    value: float
    witness: str
    candidates: list[Candidate]


@dataclass
class FamilySpec:
    fueter: bool = True
    combination: bool = True
    k2_directions: int = 0
    k2_offsets: tuple = (0.05, 0.1, 0.2)
    kernel: TruncatedSzegoKernel | None = None
    quad_order: int = 24


def _fueter_candidates(surface: BoundarySurface, z, rule: QuadratureRule) -> tuple[list, np.ndarray]:
    m = surface.m
    vals = []
    out = []
    for i in range(1, m + 1):
        f = shifted_fueter(i, m, z)
        bank = PolynomialBank([f.to_float()], m)
        v = bank.evaluate(rule.nodes)[:, 0, :]
        vals.append(v)
        out.append(Candidate(f"fueter_{i}", 2.0, hardy_norm(v, rule)))
    return out, np.stack(vals, axis=1)


def _combination_candidate(vals: np.ndarray, rule: QuadratureRule) -> Candidate:
    # real combinations sum a_i Z_i with |Dbar| = 2|a|
    n, k, dim = vals.shape
    A = (np.sqrt(rule.weights)[:, None, None] * vals).transpose(0, 2, 1).reshape(n * dim, k)
    G = A.T @ A
    ev, vec = np.linalg.eigh(G)
    return Candidate("fueter_combination", 2.0, float(np.sqrt(ev[0])))


def k2_norm(spec: K2Spec, surface: BoundarySurface, P, eta: float) -> float:
    """Hardy norm of a K2 test function with a focused rule near ``P`` (pole gap ``eta``)."""
    rule = surface.focused_quadrature(P, max(eta, 1e-6))
    return hardy_norm(spec, rule)


def k2_candidate(surface: BoundarySurface, z, direction=None, offset: float | None = None) -> Candidate:
    """``K2`` with pole ``w0`` beyond the nearest boundary point ``P`` so that ``|z - w0| = 2 delta``.

    ``offset`` overrides the default gap ``delta`` between ``P`` and ``w0``.
    """
    from .mobius import nearest_boundary_point

    z = np.asarray(z, dtype=float)
    m = surface.m
    if direction is None:
        tb = nearest_boundary_point(surface, z)
        P, delta = tb.P, tb.delta
    else:
        u = np.asarray(direction, float)
        u = u / np.linalg.norm(u)
        P = _ray_exit(surface, z, u)
        delta = float(np.linalg.norm(P - z))
    n = (P - z) / np.linalg.norm(P - z)
    gap = delta if offset is None else offset
    w0 = P + gap * n
    spec = K2Spec(w0, z)
    dbar = float(np.linalg.norm(cauchy_kernel_dbar2(spec.cauchy, z)[0]))
    # graded rule resolves the pole's footprint
    norm = k2_norm(spec, surface, P, gap)
    return Candidate(f"k2(gap={gap:.3g})", dbar, norm)


def _ray_exit(surface: BoundarySurface, z, u) -> np.ndarray:
    c, r = surface.image_sphere()
    q = z - c
    b = q @ u
    t = -b + np.sqrt(b * b - (q @ q - r * r))
    return z + t * u


def caratheodory_lower_bound(surface: BoundarySurface, z, family: FamilySpec | None = None,
                             rule: QuadratureRule | None = None) -> CaratheodoryEstimate:
    """Best ``|Dbar f(z)| / ||f||`` over an explicit family of functions vanishing at ``z``."""
    family = FamilySpec() if family is None else family
    z = np.asarray(z, dtype=float)
    rule = surface.quadrature(family.quad_order) if rule is None else rule
    cands: list[Candidate] = []
    if family.fueter or family.combination:
        fc, vals = _fueter_candidates(surface, z, rule)
        if family.fueter:
            cands.extend(fc)
        if family.combination:
            cands.append(_combination_candidate(vals, rule))
    if family.k2_directions:
        for u in _directions(surface.m, family.k2_directions):
            for off in family.k2_offsets:
                cands.append(k2_candidate(surface, z, u, off))
    if family.kernel is not None:
        met = SzegoMetric(family.kernel)
        dm, nm = met.kernel_candidate(z)
        cands.append(Candidate("kernel_extremal", dm, nm))
    if not cands:
        raise ValueError("empty candidate family")
    best = max(cands, key=lambda c: c.ratio)
    return CaratheodoryEstimate(best.ratio, best.name, cands)


def _directions(m: int, n: int) -> np.ndarray:
    from .mobius import _fibonacci_directions

    return _fibonacci_directions(n, m + 1, 0)


# -- transformation statements --------------------------------------------------------------


def intertwining_residual(V: VahlenMatrix, f, z, p: int, h: float = DEFAULT_STEP) -> dict:
    """``| |Dbar(A_p f(V z))| - |A_{p+2} (Dbar f)(V z)| |`` with ``A_p = conj(cz+d)/|cz+d|^p``.

    ``f`` is a :class:`FieldHandle` (finite differences) whose zero sits at
    ``V z``.  Returns absolute and relative residuals.
    """
    m = V.m
    z = np.atleast_2d(np.asarray(z, dtype=float))

    def pulled(pts):
        return gp_arrays(automorphy_factor(V, pts, p).reshape(len(pts), -1), f(apply(V, pts)), m)

    g = FieldHandle(m, pulled)
    lhs = np.linalg.norm(g.dirac(bar=True, h=h)(z), axis=1)
    rhs_mv = gp_arrays(automorphy_factor(V, z, p + 2).reshape(len(z), -1), f.dirac(bar=True, h=h)(apply(V, z)), m)
    rhs = np.linalg.norm(rhs_mv, axis=1)
    res = np.abs(lhs - rhs)
    return {"lhs": lhs, "rhs": rhs, "abs": res, "rel": res / np.maximum(rhs, 1e-300)}


def intertwining_residual_translation(shift, f: MultivectorPolynomial, z, p: int) -> dict:
    """Exact-rational counterpart of :func:`intertwining_residual` for ``V z = z + shift``.

    ``f`` is an exact polynomial; it is shifted so that it vanishes at ``V z``.
    The weight ``conj(cz+d)/|cz+d|^p`` is identically one here for every
    ``p``, so both sides are compared through exact squared norms.
    """
    m = f.m
    t = [exact(v) for v in shift]
    zz = [exact(v) for v in z]
    w = [a + b for a, b in zip(zz, t)]
    f = f - MultivectorPolynomial.constant(m, f(w))
    pulled = f.compose_affine(np.array([-v for v in t], dtype=object), 1)
    lhs = dirac(pulled, bar=True)(zz)
    rhs = dirac(f, bar=True)(w)
    l2 = sum(c * c for c in lhs)
    r2 = sum(c * c for c in rhs)
    res = abs(float(l2) ** 0.5 - float(r2) ** 0.5)
    return {"p": p, "lhs_sq": l2, "rhs_sq": r2, "exact_equal": bool(l2 == r2),
            "abs": 0.0 if l2 == r2 else res}


def caratheodory_transform_check(M: VahlenMatrix, z, source: BoundarySurface, target: BoundarySurface,
                                 family: FamilySpec | None = None, order: int = 40,
                                 h: float = DEFAULT_STEP) -> dict:
    """Compare ``|conj(cz+d)/|cz+d|^m| d_C^target(Mz)`` with ``d_C^source(z)``.

    ``M`` maps ``source`` onto ``target``.  The target family is pulled back
    as ``g = A_{m+1} f(M .)``, which vanishes at ``z`` and keeps the Hardy
    norm; the source estimate is the best of those pulled-back candidates,
    so both sides use matched families.  Both Hardy norms use product rules
    of the same ``order``.
    """
    m = source.m
    family = FamilySpec() if family is None else family
    z = np.asarray(z, dtype=float)
    w = apply(M, z)
    trule = target.quadrature(order)
    srule = source.quadrature(order)
    funcs = _target_functions(target, w, family, trule)
    weight = float(np.linalg.norm(automorphy_factor(M, z, m)))
    best_t, best_s = 0.0, 0.0
    rows = []
    for name, f in funcs:
        fd = FieldHandle(m, f)
        tn = hardy_norm(f, trule)
        tval = float(np.linalg.norm(fd.dirac(bar=True, h=h)(w[None])[0])) / tn

        def g(pts, f=f):
            return gp_arrays(automorphy_factor(M, pts, m + 1).reshape(len(pts), -1), f(apply(M, pts)), m)

        gd = FieldHandle(m, g)
        sn = hardy_norm(g, srule)
        sval = float(np.linalg.norm(gd.dirac(bar=True, h=h)(z[None])[0])) / sn
        rows.append({"candidate": name, "target_ratio": tval, "source_ratio": sval,
                     "target_norm": tn, "source_norm": sn})
        best_t = max(best_t, tval)
        best_s = max(best_s, sval)
    lhs = weight * best_t
    return {"lhs": lhs, "rhs": best_s, "gap": best_s - lhs, "weight": weight, "candidates": rows}


def _target_functions(target: BoundarySurface, w, family: FamilySpec, rule: QuadratureRule):
    m = target.m
    out = []
    if family.fueter:
        for i in range(1, m + 1):
            bank = PolynomialBank([shifted_fueter(i, m, w).to_float()], m)
            out.append((f"fueter_{i}", lambda p, b=bank: b.evaluate(p)[:, 0, :]))
    if family.k2_directions:
        for u in _directions(m, family.k2_directions):
            P = _ray_exit(target, w, u / np.linalg.norm(u))
            n = (P - w) / np.linalg.norm(P - w)
            for off in family.k2_offsets:
                spec = K2Spec(P + off * n, w)
                out.append((f"k2(gap={off:.3g})", spec))
    if family.kernel is not None:
        met = SzegoMetric(family.kernel)
        out.append(("kernel_extremal", met.m_element(w)))
    return out


def blowup_scan(surface: BoundarySurface, direction, deltas) -> dict:
    """K2-based lower bound of ``d_C`` at ``(1 - delta) * direction`` and its log-log slope."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    c, r = surface.image_sphere()
    deltas = np.asarray(deltas, dtype=float)
    values = []
    for d in deltas:
        z = c + (r - d) * u
        values.append(k2_candidate(surface, z, u).ratio)
    values = np.array(values)
    slope, intercept = np.polyfit(np.log(deltas), np.log(values), 1)
    order = np.argsort(deltas)
    monotone = bool(np.all(np.diff(values[order]) < 0))
    return {"delta": deltas, "value": values, "slope": float(slope), "intercept": float(intercept),
            "monotone": monotone}


def metric_comparison(metric: SzegoMetric, z, family: FamilySpec | None = None,
                      h: float = DEFAULT_STEP_SECOND) -> dict:
    """``lambda`` and ``lambda*`` against the Carathéodory lower bound at ``z``."""
    z = np.asarray(z, dtype=float)
    family = FamilySpec(kernel=metric.kernel) if family is None else family
    est = caratheodory_lower_bound(metric.surface, z, family)
    lam = float(metric.lam(z)[0])
    ls = float(metric.lambda_star(z, h)[0])
    return {"lambda": lam, "lambda_star": ls, "lambda_star_unrooted": ls**2,
            "dC_lower": est.value, "witness": est.witness,
            "gap_lambda": lam - est.value, "gap_lambda_star": ls - est.value}


def pseudo_invariance_residual(V: VahlenMatrix, z, K_G: TruncatedSzegoKernel, K_VG: TruncatedSzegoKernel) -> np.ndarray:
    """Relative residual of ``lambda_{VG}(Vz) / |cz+d|^2 = |cz+d|^{2m-2} lambda_G(z)``."""
    m = V.m
    z = np.atleast_2d(z)
    den = np.linalg.norm(V.denominator(z), axis=1)
    lhs = K_VG.lam(apply(V, z)) / den**2
    rhs = den ** (2 * m - 2) * K_G.lam(z)
    return np.abs(lhs - rhs) / np.abs(lhs)


# -- reporting ---------------------------------------------------------------------------


def point_rows(metric: SzegoMetric, points, h: float = DEFAULT_STEP_SECOND) -> list[dict]:
    """Per-point scan: density, curvature, Gram-form quantity."""
    pts = np.atleast_2d(points)
    lam = metric.lam(pts)
    curv = metric.curvature(pts, h)
    l4 = metric.gram_form(pts)
    rows = []
    for k, p in enumerate(pts):
        row = {f"z{i}": float(v) for i, v in enumerate(p)}
        row.update({"lambda": float(lam[k]), "curvature": float(curv[k]),
                    "gram_form": float(l4["algebraic"][k]), "gram_form_norm": float(l4["norm"][k])})
        rows.append(row)
    return rows


def write_csv(rows: list[dict], path) -> None:
    if not rows:
        raise ValueError("nothing to write")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for r in rows:
            writer.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})


__all__ = [
    "CaratheodoryEstimate",
    "DistanceResult",
    "FamilySpec",
    "GridGraph",
    "PathPolyline",
    "SzegoMetric",
    "blowup_scan",
    "build_grid",
    "caratheodory_lower_bound",
    "caratheodory_transform_check",
    "distance",
    "intertwining_residual",
    "intertwining_residual_translation",
    "k2_candidate",
    "metric_comparison",
    "path_length",
    "point_rows",
    "pseudo_invariance_residual",
    "write_csv",
]
