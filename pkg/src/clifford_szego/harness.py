"""Run configuration, verification suites and machine-readable reports.

Every check records a name, a short anchor naming the mathematical statement
it exercises, a status, the measured residual, the tolerance it is compared
against and its runtime.  Checks with status ``"info"`` are recorded for the
report but never decide the exit status.
"""
from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction

import numpy as np

from .calculus import (
    PRODUCT_RULE_VARIANTS,
    FDScheme,
    dirac,
    product_rule_residual,
    random_polynomial,
)
from .clifford import (
    Multivector,
    algebra,
    basis_vectors,
    conjugate,
    gp_arrays,
    random_multivector,
    scalar_product,
)
from .metric import (
    FamilySpec,
    SzegoMetric,
    blowup_scan,
    build_grid,
    caratheodory_lower_bound,
    caratheodory_transform_check,
    distance,
    intertwining_residual,
    intertwining_residual_translation,
    metric_comparison,
    pseudo_invariance_residual,
)
from .mobius import VahlenMatrix, apply, helper_map, inverse
from .monogenic import (
    CauchyKernelSpec,
    K2Spec,
    PolynomialBank,
    cauchy_field,
    cauchy_kernel_dbar2_printed,
    fueter_bank,
    fueter_indices,
    fueter_polynomial,
    fueter_variable,
    k2_test_function,
)
from .quadrature import BoundarySurface
from .szego import TruncatedSzegoKernel, build_kernel, cache_key, transformation_residual

CONFIG_ENV = "CLIFFORD_SZEGO_CONFIG"
SUITES = ("algebra", "calculus", "kernel", "transformation", "curvature", "caratheodory", "distance")
KERNEL_MAX_M = 3
VERIFY_BUDGET_SECONDS = 600.0


class ConfigError(ValueError):
    """Invalid run configuration."""


# -- configuration ---------------------------------------------------------------------


@dataclass
class RunConfig:
    m: tuple = (2,)
    degree: int = 8
    quad_order: int | None = None
    fd_step: float = 1e-4
    fd_step_second: float = 1e-3
    tol: float = 1e-8
    domain: str = "ball"
    helper_center: list | None = None
    helper_radius: float = 0.5
    out: str | None = None
    cache_dir: str | None = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.m, int):
            self.m = (self.m,)
        self.m = tuple(int(v) for v in self.m)

    @property
    def order(self) -> int:
        return 2 * self.degree + 2 if self.quad_order is None else int(self.quad_order)

    def validate(self, kernel_command: bool = True) -> "RunConfig":
        if not self.m or any(v < 1 for v in self.m):
            raise ConfigError("m must be a positive integer")
        if kernel_command and any(v > KERNEL_MAX_M for v in self.m):
            raise ConfigError(f"kernel commands support m <= {KERNEL_MAX_M}")
        if self.degree < 0:
            raise ConfigError("degree must be non-negative")
        if self.order < 2 * self.degree + 2:
            raise ConfigError(f"quadrature order {self.order} < 2N+2 = {2 * self.degree + 2}")
        try:
            FDScheme(self.fd_step)
            FDScheme(self.fd_step_second)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not self.tol > 0:
            raise ConfigError("tolerance must be positive")
        if self.domain not in ("ball", "helper"):
            raise ConfigError(f"unknown domain {self.domain!r}")
        if not 0 < self.helper_radius:
            raise ConfigError("helper radius must be positive")
        if self.helper_center is not None:
            c = np.asarray(self.helper_center, float)
            if c.shape != (max(self.m) + 1,):
                raise ConfigError("helper center must have m+1 components")
            if np.linalg.norm(c) <= 1:
                raise ConfigError("helper center must lie outside the closed unit ball")
        return self

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_mapping(data)

    def updated(self, **overrides) -> "RunConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def helper(self, m: int) -> VahlenMatrix:
        C = None if self.helper_center is None else np.asarray(self.helper_center, float)[: m + 1]
        return helper_map(m, C, self.helper_radius)

    def surface(self, m: int) -> BoundarySurface:
        if self.domain == "ball":
            return BoundarySurface.ball(m)
        return BoundarySurface(m, vahlen=self.helper(m))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["m"] = list(self.m)
        return d


# -- reports ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    suite: str
    anchor: str
    status: str
    residual: float
    tolerance: float
    runtime: float
    comparison: str = "<="
    details: dict = field(default_factory=dict)
    timed: bool = False

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    def to_dict(self, timing: bool = True) -> dict:
        stable = timing or not self.timed
        d = {"name": self.name, "suite": self.suite, "anchor": self.anchor, "status": self.status,
             "residual": _num(self.residual) if stable else None, "tolerance": _num(self.tolerance),
             "comparison": self.comparison, "runtime": _num(self.runtime) if timing else None,
             "details": _jsonable(self.details)}
        return d


@dataclass
class SuiteReport:
    suite: str
    config: dict
    checks: list = field(default_factory=list)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return not any(c.failed for c in self.checks)

    def by_name(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def select(self, prefix: str) -> list:
        return [c for c in self.checks if c.name.startswith(prefix)]

    def to_dict(self, timing: bool = True) -> dict:
        return {"suite": self.suite, "status": "pass" if self.passed else "fail",
                "config": self.config, "runtime": _num(self.runtime) if timing else None,
                "checks": [c.to_dict(timing) for c in self.checks]}

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=1)

    def traceability_table(self) -> str:
        lines = ["| check | statement | status | residual | tolerance |", "|---|---|---|---|---|"]
        for c in self.checks:
            lines.append(f"| {c.name} | {c.anchor} | {c.status} | {_num(c.residual)} | "
                         f"{c.comparison} {_num(c.tolerance)} |")
        return "\n".join(lines) + "\n"


def _num(x):
    if x is None:
        return None
    x = float(x)
    if not np.isfinite(x):
        return str(x)
    return float(f"{x:.17g}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, Fraction) or type(obj).__name__ == "mpq":
        return str(obj)
    return obj


def _status(residual: float, tol: float, comparison: str) -> str:
    r = float(residual)
    if not np.isfinite(r):
        return "fail"
    ok = {"<=": r <= tol, "<": r < tol, ">": r > tol, ">=": r >= tol}[comparison]
    return "pass" if ok else "fail"


# -- verification context --------------------------------------------------------------


class Verifier:
    """Runs the suites; kernels are memoized (and optionally disk-cached)."""

    def __init__(self, config: RunConfig):
        self.config = config
        self._kernels: dict[str, TruncatedSzegoKernel] = {}
        self.checks: list[CheckResult] = []

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.config.seed, salt])

    def kernel(self, surface: BoundarySurface, N: int, order: int | None = None) -> TruncatedSzegoKernel:
        order = 2 * N + 2 if order is None else order
        key = cache_key(surface, N, order, "real")
        if key not in self._kernels:
            self._kernels[key] = build_kernel(surface, N, order, cache_dir=self.config.cache_dir)
        return self._kernels[key]

    def record(self, name, suite, anchor, residual, tol, t0, comparison="<=", details=None, info=False,
               timed=False):
        status = "info" if info else _status(residual, tol, comparison)
        c = CheckResult(name, suite, anchor, status, float(residual), float(tol),
                        time.perf_counter() - t0, comparison, details or {}, timed)
        self.checks.append(c)
        return c

    def run(self, suite: str) -> SuiteReport:
        names = SUITES if suite == "all" else (suite,)
        for n in names:
            if n not in SUITES:
                raise ConfigError(f"unknown suite {suite!r}")
        t0 = time.perf_counter()
        start = len(self.checks)
        for n in names:
            getattr(self, f"suite_{n}")()
        if suite == "all":
            self.record("verify.runtime", "all", "full verification budget",
                        time.perf_counter() - t0, VERIFY_BUDGET_SECONDS, t0,
                        details={"m": list(self.config.m)}, timed=True)
        return SuiteReport(suite, self.config.to_dict(), self.checks[start:], time.perf_counter() - t0)

    @property
    def geometric_m(self) -> list[int]:
        return [m for m in self.config.m if m in (1, 2)]

    @property
    def exact_m(self) -> list[int]:
        return sorted(set(self.config.m) | {1, 2, 3})

    # -- algebra -------------------------------------------------------------------------

    def suite_algebra(self):
        t_suite = time.perf_counter()
        anchor = "Cl_0m defining relations and conjugation"
        for m in self.exact_m:
            rng = self.rng(100 + m)
            t0 = time.perf_counter()
            es = basis_vectors(m, exact=True)
            one = Multivector.scalar(m, 1, exact=True)
            bad = 0
            for i, ei in enumerate(es):
                for j, ej in enumerate(es):
                    target = one * (-2) if i == j else Multivector.zero(m, exact=True)
                    bad += (ei * ej + ej * ei) != target
            self.record(f"algebra.anticommutation.m{m}", "algebra", anchor, bad, 0, t0,
                        details={"pairs": len(es) ** 2})

            t0 = time.perf_counter()
            trip = [tuple(random_multivector(m, rng, exact=True) for _ in range(3)) for _ in range(25)]
            bad = sum(((a * b) * c) != (a * (b * c)) for a, b, c in trip)
            self.record(f"algebra.associativity.m{m}", "algebra", anchor, bad, 0, t0,
                        details={"triples": len(trip)})

            t0 = time.perf_counter()
            bad = sum(conjugate(a * b) != conjugate(b) * conjugate(a) or conjugate(conjugate(a)) != a
                      for a, b, _ in trip)
            bad += sum(conjugate(e) != -e for e in es)
            self.record(f"algebra.conjugation.m{m}", "algebra", anchor, bad, 0, t0,
                        details={"pairs": len(trip)})

            t0 = time.perf_counter()
            bad = 0
            for a, b, c in trip:
                s, t = Fraction(2, 3), Fraction(-5, 7)
                bad += scalar_product(a * s + b * t, c) != s * scalar_product(a, c) + t * scalar_product(b, c)
                bad += scalar_product(c, a * s + b * t) != s * scalar_product(c, a) + t * scalar_product(c, b)
                bad += scalar_product(a, b) != scalar_product(b, a)
                bad += scalar_product(a, b) != sum(x * y for x, y in zip(a.coeffs, b.coeffs))
            self.record(f"algebra.scalar_bilinearity.m{m}", "algebra", anchor, bad, 0, t0,
                        details={"triples": len(trip)})
        self.record("algebra.runtime", "algebra", anchor, time.perf_counter() - t_suite, 5.0, t_suite,
                    comparison="<", timed=True)

    # -- calculus ------------------------------------------------------------------------

    def suite_calculus(self):
        cfg = self.config
        anchor = "generalized Leibniz rules for D and Dbar"
        t_rules = time.perf_counter()
        for m in self.exact_m:
            rng = self.rng(200 + m)
            t0 = time.perf_counter()
            pairs = [(random_polynomial(m, 3, rng), random_polynomial(m, 3, rng)) for _ in range(100)]
            nonzero = {v: 0 for v in PRODUCT_RULE_VARIANTS}
            for f, g in pairs:
                for v in PRODUCT_RULE_VARIANTS:
                    nonzero[v] += not product_rule_residual(v, f, g, "forced").is_zero()
            self.record(f"calculus.product_rules.m{m}", "calculus", anchor, sum(nonzero.values()), 0, t0,
                        details={"pairs": len(pairs), "nonzero_by_variant": nonzero})
            t0 = time.perf_counter()
            printed = {v: 0 for v in PRODUCT_RULE_VARIANTS}
            for f, g in pairs[:5]:
                for v in PRODUCT_RULE_VARIANTS:
                    printed[v] += not product_rule_residual(v, f, g, "printed").is_zero()
            self.record(f"calculus.product_rules_quoted_form.m{m}", "calculus",
                        "Leibniz rules with the commonly quoted correction terms", sum(printed.values()), 0, t0,
                        details={"pairs": 5, "nonzero_by_variant": printed}, info=True)
        self.record("calculus.product_rules.runtime", "calculus", anchor, time.perf_counter() - t_rules, 30.0,
                    t_rules, comparison="<", timed=True)

        for m in self.exact_m:
            t0 = time.perf_counter()
            bad = [a for a in fueter_indices(4, m) if not dirac(fueter_polynomial(a, m)).is_zero()]
            self.record(f"calculus.fueter_monogenic.m{m}", "calculus", "left monogenicity of Fueter polynomials",
                        len(bad), 0, t0, details={"polynomials": len(fueter_indices(4, m)), "failing": bad})

        for m in self.exact_m:
            rng = self.rng(300 + m)
            t0 = time.perf_counter()
            spec = CauchyKernelSpec(np.zeros(m + 1))
            pts = _shell_points(rng, 50, m, 0.5, 1.5)
            D = cauchy_field(spec).dirac(h=cfg.fd_step)(pts)
            self.record(f"calculus.cauchy_fd.m{m}", "calculus", "monogenicity of the Cauchy kernel",
                        np.max(np.linalg.norm(D, axis=1)), 1e-5, t0,
                        details={"points": 50, "h": cfg.fd_step, "radii": [0.5, 1.5]})

            t0 = time.perf_counter()
            k2 = K2Spec(np.r_[1.3, np.zeros(m)], np.r_[0.4, 0.2, np.zeros(m - 1)])
            pts = _shell_points(rng, 20, m, 0.4, 0.9)
            exact_v = k2.dbar(pts)
            fd = k2_test_function(k2).dirac(bar=True, h=cfg.fd_step)(pts)
            rel = np.linalg.norm(fd - exact_v, axis=1) / np.linalg.norm(exact_v, axis=1)
            quoted = cauchy_kernel_dbar2_printed(k2.cauchy, pts)
            rel_q = np.linalg.norm(quoted - exact_v, axis=1) / np.linalg.norm(exact_v, axis=1)
            self.record(f"calculus.k2_dbar_closed_form.m{m}", "calculus",
                        "closed form of Dbar applied to the K2 test function",
                        rel.max(), 1e-4, t0, details={"points": 20, "quoted_shortcut_rel_error": rel_q.max()})

    # -- kernel --------------------------------------------------------------------------

    def suite_kernel(self):
        anchor = "reproducing property of the truncated Szego kernel"
        if 2 in self.config.m:
            rng = self.rng(400)
            S = BoundarySurface.ball(2)
            t0 = time.perf_counter()
            K6 = self.kernel(S, 6, 14)
            z = S.sample_interior(20, 0.5, rng)
            bank = fueter_bank(6, 2)
            worst = 0.0
            for _ in range(3):
                C = rng.standard_normal((len(bank), algebra(2).dim))

                def f(p, C=C):
                    return np.sum(gp_arrays(bank.evaluate(p), C[None], 2), axis=1)

                worst = max(worst, float(np.max(np.abs(K6.reproduce(f, z) - f(z)))))
            self.record("kernel.reproduce.m2", "kernel", anchor, worst, 1e-8, t0,
                        details={"N": 6, "quad_order": 14, "points": 20, "radius": 0.5,
                                 "gram": K6.basis.gram.to_dict()})

            t0 = time.perf_counter()
            k00 = K6(np.zeros(3), np.zeros(3))[0]
            res = max(abs(k00[0] - 1 / (4 * np.pi)), float(np.linalg.norm(k00[1:])))
            self.record("kernel.origin_value.m2", "kernel", "rotation-symmetric value of K(0,0) on the ball",
                        res, 1e-10, t0, details={"K00": k00[0], "expected": 1 / (4 * np.pi)})

            t0 = time.perf_counter()
            K8 = self.kernel(S, 8)
            z = np.concatenate([S.sample_interior(200, 0.5, rng), 0.5 * np.eye(3), -0.5 * np.eye(3)])
            change = np.max(np.abs(K8.lam(z) / K6.lam(z) - 1))
            self.record("kernel.degree_stability.m2", "kernel", "convergence of the truncated kernel diagonal",
                        change, 5e-3, t0, details={"N": [6, 8], "points": len(z)})

        if 1 in self.config.m:
            rng = self.rng(401)
            D = BoundarySurface.ball(1)
            t0 = time.perf_counter()
            K12 = self.kernel(D, 12)
            z = D.sample_interior(50, 0.5, rng)
            w = D.sample_interior(50, 0.5, rng)
            z = np.concatenate([z, [[0.5, 0.0], [0.0, 0.5]]])
            w = np.concatenate([w, [[0.5, 0.0], [0.0, -0.5]]])
            k = K12(z, w)
            zc, wc = z[:, 0] + 1j * z[:, 1], w[:, 0] + 1j * w[:, 1]
            oracle = 1 / (2 * np.pi * (1 - zc * np.conj(wc)))
            rel = np.abs(k[:, 0] + 1j * k[:, 1] - oracle) / np.abs(oracle)
            self.record("kernel.disk_oracle.m1", "kernel", "classical Szego kernel of the unit disk",
                        rel.max(), 1e-6, t0, details={"N": 12, "pairs": len(z)})

    # -- transformation ------------------------------------------------------------------

    def suite_transformation(self):
        cfg = self.config
        anchor_k = "kernel transformation formula under Vahlen maps"
        anchor_p = "pseudo-invariance of the Szego metric"
        anchor_i = "intertwining rule for Dbar under Vahlen maps"
        t_suite = time.perf_counter()
        for m in self.geometric_m:
            rng = self.rng(500 + m)
            B = BoundarySurface.ball(m)
            N = 12 if m == 1 else 8
            KB = self.kernel(B, N)
            z, w = _transformation_points(B, rng, m)

            t0 = time.perf_counter()
            I = VahlenMatrix.identity(m)
            res = np.max(np.abs(transformation_residual(KB, KB, I, z, w)))
            self.record(f"transformation.identity.m{m}", "transformation", anchor_k, res, 0, t0)
            t0 = time.perf_counter()
            res = np.max(pseudo_invariance_residual(I, z, KB, KB))
            self.record(f"pseudo_invariance.identity.m{m}", "transformation", anchor_p, res, 0, t0)

            if m == 1:
                t0 = time.perf_counter()
                shift = np.array([0.2, -0.1])
                T = VahlenMatrix.translation(shift)
                KT = self.kernel(BoundarySurface(1, center=shift), 12)
                res = np.max(np.abs(transformation_residual(KB, KT, T, z, w)))
                self.record("transformation.translation.m1", "transformation", anchor_k, res, 1e-6, t0,
                            details={"shift": shift, "N": 12})
                t0 = time.perf_counter()
                res = np.max(pseudo_invariance_residual(T, z, KB, KT))
                self.record("pseudo_invariance.translation.m1", "transformation", anchor_p, res, 1e-6, t0,
                            details={"shift": shift, "N": 12})

                t0 = time.perf_counter()
                H = cfg.helper(1)
                KB40 = self.kernel(B, 40)
                KG40 = self.kernel(BoundarySurface(1, vahlen=H), 40)
                res = np.max(pseudo_invariance_residual(H, z, KB40, KG40))
                self.record("pseudo_invariance.helper.m1", "transformation", anchor_p, res, 1e-6, t0,
                            details={"N": 40, "points": len(z)})
                t0 = time.perf_counter()
                r = transformation_residual(KB40, KG40, H, z, w)
                rel = np.linalg.norm(r, axis=1) / np.linalg.norm(KB40(z, w), axis=1)
                self.record("transformation.helper.m1", "transformation", anchor_k, rel.max(), 1e-6, t0,
                            details={"N": 40}, info=True)
            else:
                H = cfg.helper(2)
                G = BoundarySurface(2, vahlen=H)
                for NG, info in ((8, False), (14, True)):
                    t0 = time.perf_counter()
                    KG = self.kernel(G, NG)
                    r = transformation_residual(KB, KG, H, z, w)
                    rel = np.linalg.norm(r, axis=1) / np.linalg.norm(KB(z, w), axis=1)
                    suffix = "" if not info else f".image_N{NG}"
                    self.record(f"transformation.helper.m2{suffix}", "transformation", anchor_k, rel.max(), 1e-2,
                                t0, details={"N_ball": 8, "N_image": NG, "points": len(z), "radius": 0.5},
                                info=info)
                    t0 = time.perf_counter()
                    res = np.max(pseudo_invariance_residual(H, z, KB, KG))
                    self.record(f"pseudo_invariance.helper.m2{suffix}", "transformation", anchor_p, res, 1e-2, t0,
                                details={"N_ball": 8, "N_image": NG, "points": len(z)}, info=info)

            # intertwining rule, exact rational arithmetic under translations
            t0 = time.perf_counter()
            worst = 0.0
            for k in range(5):
                f = random_polynomial(m, 3, rng)
                shift = [Fraction(int(v), 7) for v in rng.integers(-5, 6, size=m + 1)]
                zz = [Fraction(int(v), 11) for v in rng.integers(-5, 6, size=m + 1)]
                for p in (m, m + 1):
                    worst = max(worst, intertwining_residual_translation(shift, f, zz, p)["abs"])
            self.record(f"intertwining.translation_exact.m{m}", "transformation", anchor_i, worst, 1e-10, t0,
                        details={"exponents": [m, m + 1], "polynomials": 5})

            # intertwining rule, finite differences under the helper map
            H = cfg.helper(m)
            pts = B.sample_interior(10, 0.5, rng)
            rows = {}
            for p in (m, m + 1):
                t0 = time.perf_counter()
                rel, ab = [], []
                for zp in pts:
                    Fh = _zeroed_monogenic(m, apply(H, zp))
                    r = intertwining_residual(H, Fh, zp[None], p, h=cfg.fd_step)
                    rel.append(float(r["rel"][0]))
                    ab.append(float(r["abs"][0]))
                rows[p] = (max(rel), max(ab), time.perf_counter() - t0)
            chosen = min(rows, key=lambda p: (rows[p][0], p != m))
            for p in (m, m + 1):
                rel, ab, dt = rows[p]
                self.record(f"intertwining.helper_fd.p{p}.m{m}", "transformation", anchor_i, rel, 1e-5,
                            time.perf_counter() - dt,
                            details={"exponent": p, "absolute": ab, "identified_exponent": chosen,
                                     "points": len(pts), "h": cfg.fd_step},
                            info=p != chosen)

        self.record("transformation.runtime", "transformation", anchor_k, time.perf_counter() - t_suite, 300.0,
                    t_suite, timed=True)

    # -- curvature and Gram-form positivity -------------------------------------------------

    def suite_curvature(self):
        cfg = self.config
        for m in self.geometric_m:
            N = 40 if m == 1 else 8
            for tag in ("ball", "helper"):
                rng = self.rng(600 + 10 * m + (tag == "helper"))
                S = BoundarySurface.ball(m) if tag == "ball" else BoundarySurface(m, vahlen=cfg.helper(m))
                M = SzegoMetric(self.kernel(S, N))
                z = S.sample_interior(200, 0.8, rng)
                t0 = time.perf_counter()
                rep = M.curvature_report(z, cfg.fd_step_second)
                curv = rep["curvature"]
                self.record(f"curvature.negative.{tag}.m{m}", "curvature", "negative curvature of the Szego metric",
                            curv.max(), 0.0, t0, comparison="<",
                            details={"N": N, "points": len(z), "max_relative_radius": 0.8,
                                     "sign_stable_half_step": bool(np.all(rep["sign_stable"])),
                                     "min": curv.min()})
                t0 = time.perf_counter()
                l4 = M.gram_form(z)
                self.record(f"gram_form.positive.{tag}.m{m}", "curvature", "positivity of K(K K_zbarz - K_z K_zbar)",
                            l4["algebraic"].min(), 0.0, t0, comparison=">",
                            details={"N": N, "points": len(z)})
                t0 = time.perf_counter()
                agree = np.max(np.abs(l4["algebraic"] - l4["norm"]) / np.abs(l4["algebraic"]))
                self.record(f"gram_form.forms_agree.{tag}.m{m}", "curvature",
                            "Hardy-norm form of the Gram-form quantity", agree, 1e-8, t0,
                            details={"nonscalar": l4["algebraic_nonscalar"].max()})
                if m == 1 and tag == "ball":
                    t0 = time.perf_counter()
                    rel = np.max(np.abs(curv / (-16 * np.pi**2) - 1))
                    self.record("curvature.disk_oracle.m1", "curvature", "constant curvature of the disk Szego metric",
                                rel, 1e-3, t0, details={"oracle": -16 * np.pi**2})

    # -- Caratheodory-type metric ---------------------------------------------------------

    def suite_caratheodory(self):
        cfg = self.config
        anchor_t = "transformation inequality for the Caratheodory-type metric"
        anchor_d = "domination of the Caratheodory-type metric"
        for m in self.geometric_m:
            rng = self.rng(700 + m)
            N = 40 if m == 1 else 8
            B = BoundarySurface.ball(m)
            H = cfg.helper(m)
            G = BoundarySurface(m, vahlen=H)
            KB = self.kernel(B, N)

            t0 = time.perf_counter()
            low = np.inf
            for S in (B, G):
                for z in S.sample_interior(10, 0.8, rng):
                    est = caratheodory_lower_bound(S, z, FamilySpec(k2_directions=2, k2_offsets=(0.1,)))
                    low = min(low, est.value)
            self.record(f"caratheodory.positive.m{m}", "caratheodory", "positivity of the Caratheodory-type metric",
                        low, 0.0, t0, comparison=">", details={"points": 20})

            t0 = time.perf_counter()
            worst = 0.0
            for z in B.sample_interior(5, 0.8, rng):
                fams = [FamilySpec(combination=False), FamilySpec(),
                        FamilySpec(k2_directions=2), FamilySpec(k2_directions=2, kernel=KB)]
                vals = [caratheodory_lower_bound(B, z, f).value for f in fams]
                worst = max(worst, max(a - b for a, b in zip(vals[:-1], vals[1:])))
            self.record(f"caratheodory.family_monotone.m{m}", "caratheodory",
                        "lower bound grows with the candidate family", worst, 0.0, t0)

            fam = FamilySpec(k2_directions=3, k2_offsets=(0.1, 0.3))
            t0 = time.perf_counter()
            gaps = [abs(caratheodory_transform_check(VahlenMatrix.identity(m), z, B, B, fam)["gap"])
                    for z in B.sample_interior(3, 0.8, rng)]
            self.record(f"caratheodory.transform_identity.m{m}", "caratheodory", anchor_t, max(gaps), 1e-12, t0)

            t0 = time.perf_counter()
            shift = np.r_[0.3, -0.2, 0.1][: m + 1]
            T = VahlenMatrix.translation(shift)
            St = BoundarySurface(m, center=shift)
            gaps = [abs(caratheodory_transform_check(inverse(T), z, St, B, fam)["gap"])
                    for z in St.sample_interior(3, 0.8, rng)]
            self.record(f"caratheodory.transform_translation.m{m}", "caratheodory", anchor_t, max(gaps), 1e-8, t0)

            t0 = time.perf_counter()
            excess = []
            for z in G.sample_interior(10, 0.8, rng):
                out = caratheodory_transform_check(inverse(H), z, G, B, fam)
                excess.append(out["lhs"] - out["rhs"])
            self.record(f"caratheodory.transform_helper.m{m}", "caratheodory", anchor_t, max(excess), 1e-6, t0,
                        details={"points": 10, "min_margin": -max(excess)})

            if m == 2:
                t0 = time.perf_counter()
                scan = blowup_scan(B, [1.0, 0.0, 0.0], np.logspace(-3, -1, 9))
                self.record("caratheodory.blowup_slope.m2", "caratheodory", "1/delta blow-up near the boundary",
                            scan["slope"], -0.9, t0, details={"delta": scan["delta"], "value": scan["value"]})
                t0 = time.perf_counter()
                ok = scan["monotone"] and bool(np.all(scan["value"] > 0))
                self.record("caratheodory.blowup_monotone.m2", "caratheodory", "1/delta blow-up near the boundary",
                            0.0 if ok else 1.0, 0.0, t0)

            t0 = time.perf_counter()
            M = SzegoMetric(KB)
            rows = [metric_comparison(M, z, h=cfg.fd_step_second) for z in B.sample_interior(20, 0.8, rng)]
            d_lam = max(r["dC_lower"] - r["lambda"] for r in rows)
            d_star = max(r["dC_lower"] - r["lambda_star"] for r in rows)
            d_unrooted = max(r["dC_lower"] - r["lambda_star_unrooted"] for r in rows)
            dt = time.perf_counter() - t0
            detail = {"points": 20, "N": N, "witnesses": sorted({r["witness"] for r in rows})}
            self.record(f"caratheodory.dominated_by_lambda.m{m}", "caratheodory", anchor_d, d_lam, 1e-6,
                        time.perf_counter() - dt, details=detail)
            self.record(f"caratheodory.dominated_by_lambda_star.m{m}", "caratheodory", anchor_d, d_star, 1e-6,
                        time.perf_counter() - dt, details=detail)
            self.record(f"caratheodory.dominated_by_lambda_star_unrooted.m{m}", "caratheodory", anchor_d,
                        d_unrooted, 1e-6, time.perf_counter() - dt, details=detail, info=True)

    # -- distance ------------------------------------------------------------------------

    def suite_distance(self):
        anchor = "pseudo-metric induced by the Szego line element"
        for m in self.geometric_m:
            rng = self.rng(800 + m)
            N, step = (40, 0.05) if m == 1 else (8, 0.1)
            B = BoundarySurface.ball(m)
            M = SzegoMetric(self.kernel(B, N))
            t0 = time.perf_counter()
            grid = build_grid(M, step)

            t0 = time.perf_counter()
            trip = rng.choice(len(grid.points), size=(100, 3))
            D = grid.node_distances(np.unique(trip))
            row = {int(s): k for k, s in enumerate(np.unique(trip))}
            viol = max(D[row[i], k] - D[row[i], j] - D[row[j], k] for i, j, k in trip)
            self.record(f"distance.triangle.m{m}", "distance", anchor, max(viol, 0.0), 1e-9, t0,
                        details={"triples": 100, "nodes": len(grid.points), "step": step})

            t0 = time.perf_counter()
            pairs = B.sample_interior(10, 0.7, rng).reshape(5, 2, m + 1)
            asym, over, selfd = 0.0, 0.0, 0.0
            for z1, z2 in pairs:
                r12 = distance(M, z1, z2, step, grid)
                r21 = distance(M, z2, z1, step, grid)
                asym = max(asym, abs(r12.value - r21.value))
                if r12.straight_value is not None:
                    over = max(over, r12.value - r12.straight_value)
                selfd = max(selfd, distance(M, z1, z1, step, grid).value)
            self.record(f"distance.symmetry.m{m}", "distance", anchor, asym, 0.0, t0, details={"pairs": 5})
            self.record(f"distance.straight_bound.m{m}", "distance", anchor, over, 0.0, t0,
                        details={"pairs": 5})
            self.record(f"distance.self.m{m}", "distance", anchor, selfd, 0.0, t0)


# -- helpers ---------------------------------------------------------------------------------


def _shell_points(rng: np.random.Generator, n: int, m: int, r_min: float, r_max: float) -> np.ndarray:
    g = rng.standard_normal((n, m + 1))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.uniform(r_min, r_max, size=(n, 1))


def _transformation_points(B: BoundarySurface, rng: np.random.Generator, m: int):
    """Random pairs with ``|z|, |zeta| <= 0.5`` plus the extreme axis points."""
    z = B.sample_interior(40, 0.5, rng)
    w = B.sample_interior(40, 0.5, rng)
    ext = np.concatenate([0.5 * np.eye(m + 1), -0.5 * np.eye(m + 1)])
    return np.concatenate([z, ext]), np.concatenate([w, ext])


def _zeroed_monogenic(m: int, w):
    """Degree-two left-monogenic polynomial shifted to vanish at ``w``."""
    q = np.zeros(algebra(m).dim)
    q[0], q[-1] = 0.7, -0.4
    p = (fueter_polynomial((1, 1), m).to_float() + fueter_variable(1, m).to_float().right_mul(q))
    bank = PolynomialBank([p], m)
    w = np.asarray(w, float)
    offset = bank.evaluate(w[None])[0, 0]
    from .calculus import FieldHandle

    return FieldHandle(m, lambda pts: bank.evaluate(pts)[:, 0, :] - offset)


def run_suite(config: RunConfig, suite: str) -> SuiteReport:
    config.validate(kernel_command=False)
    if any(m > KERNEL_MAX_M for m in config.m):
        raise ConfigError(f"verification supports m <= {KERNEL_MAX_M}")
    return Verifier(config).run(suite)


def load_config(path: str | None = None, **overrides) -> RunConfig:
    """Config from ``path`` (or the environment variable), then flag overrides."""
    path = path or os.environ.get(CONFIG_ENV)
    cfg = RunConfig.load(path) if path else RunConfig()
    return cfg.updated(**overrides)


__all__ = [
    "CONFIG_ENV",
    "SUITES",
    "CheckResult",
    "ConfigError",
    "RunConfig",
    "SuiteReport",
    "Verifier",
    "load_config",
    "run_suite",
]
