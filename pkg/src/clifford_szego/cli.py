"""``clifford-szego`` command line.

Exit status: 0 when every graded check passes, 1 when a check fails, 2 on
usage or configuration errors (including kernel cache mismatches).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from .harness import SUITES, ConfigError, RunConfig, load_config, run_suite
from .metric import (
    FamilySpec,
    SzegoMetric,
    blowup_scan,
    caratheodory_lower_bound,
    distance,
    point_rows,
    write_csv,
)
from .monogenic import fueter_bank
from .clifford import algebra, gp_arrays
from .szego import CacheMismatchError, build_kernel

log = logging.getLogger("clifford_szego")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, multi_m: bool = False) -> None:
    p.add_argument("--config", help="JSON config file (default: $CLIFFORD_SZEGO_CONFIG)")
    if multi_m:
        p.add_argument("--m", type=int, nargs="+", help="dimension parameter(s), default 1 2")
    else:
        p.add_argument("--m", type=int, help="dimension parameter m (paravectors in R^{m+1})")
    p.add_argument("--degree", type=int, help="maximal Fueter degree N")
    p.add_argument("--quad-order", type=int, help="boundary quadrature order (>= 2N+2)")
    p.add_argument("--fd-step", type=float, help="finite-difference step for first derivatives")
    p.add_argument("--tol", type=float, help="self-test tolerance")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--cache-dir", help="kernel cache directory")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--domain", choices=("ball", "helper"), help="unit ball or its helper Mobius image")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clifford-szego", description="Szego kernels and metrics of Clifford Hardy spaces")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("kernel", help="build (or load) a kernel cache and self-test it")
    _common(p)

    p = sub.add_parser("metric", help="CSV of lambda, curvature and the Gram-form quantity")
    _common(p)
    _points(p)

    p = sub.add_parser("distance", help="Szego distance between two points with a witness path")
    _common(p)
    p.add_argument("--z1", required=True, help="comma separated coordinates")
    p.add_argument("--z2", required=True, help="comma separated coordinates")
    p.add_argument("--step", type=float, default=0.1, help="grid step")
    p.add_argument("--path-out", help="CSV file for the witness polyline")

    p = sub.add_parser("caratheodory", help="Caratheodory-type lower bounds at points or along a ray")
    _common(p)
    _points(p)
    p.add_argument("--blowup", help="direction for a boundary blow-up scan, comma separated")
    p.add_argument("--k2-directions", type=int, default=3)

    p = sub.add_parser("verify", help="run verification suites and emit a JSON report")
    _common(p, multi_m=True)
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--fd-step-second", type=float, help="finite-difference step for second derivatives")
    p.add_argument("--markdown", help="also write a traceability table to this file")
    p.add_argument("--no-timing", action="store_true", help="omit runtimes for byte-stable reports")
    return parser


def _points(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--points", help="semicolon separated points, e.g. '0,0,0;0.2,0.1,0'")
    g.add_argument("--sample", type=int, help="number of random interior points")
    p.add_argument("--max-radius", type=float, default=0.8, help="relative radius bound for --sample")


def _vector(text: str, m: int) -> np.ndarray:
    try:
        v = np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"cannot parse point {text!r}") from exc
    if v.shape != (m + 1,):
        raise ConfigError(f"point {text!r} needs {m + 1} coordinates")
    return v


def _config(args, multi_m: bool = False) -> RunConfig:
    m = args.m
    if m is not None and not multi_m:
        m = (m,)
    overrides = dict(m=tuple(m) if m is not None else None, degree=args.degree, quad_order=args.quad_order,
                     fd_step=args.fd_step, tol=args.tol, seed=args.seed, cache_dir=args.cache_dir, out=args.out,
                     domain=args.domain, fd_step_second=getattr(args, "fd_step_second", None))
    cfg = load_config(args.config, **overrides)
    if not multi_m and len(cfg.m) != 1:
        raise ConfigError("this command takes a single m")
    return cfg.validate(kernel_command=True)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_out(rows: list[dict], path: str | None) -> None:
    if path:
        write_csv(rows, path)
        return
    writer = csv.DictWriter(sys.stdout, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})


def _kernel(cfg: RunConfig):
    m = cfg.m[0]
    return build_kernel(cfg.surface(m), cfg.degree, cfg.order, cache_dir=cfg.cache_dir)


def _query_points(args, cfg: RunConfig) -> np.ndarray:
    m = cfg.m[0]
    if args.points:
        pts = np.array([_vector(t, m) for t in args.points.split(";") if t.strip()])
    else:
        n = args.sample if args.sample else 10
        pts = cfg.surface(m).sample_interior(n, args.max_radius, np.random.default_rng(cfg.seed))
    inside = cfg.surface(m).contains(pts)
    if not np.all(inside):
        raise ConfigError(f"points outside the domain: {pts[~inside].tolist()}")
    return pts


def cmd_kernel(args) -> int:
    cfg = _config(args)
    m = cfg.m[0]
    K = _kernel(cfg)
    S = K.surface
    rng = np.random.default_rng(cfg.seed)
    bank = fueter_bank(cfg.degree, m)
    C = rng.standard_normal((len(bank), algebra(m).dim))

    def f(p):
        return np.sum(gp_arrays(bank.evaluate(p), C[None], m), axis=1)

    z = S.sample_interior(5, 0.5, rng)
    res = float(np.max(np.abs(K.reproduce(f, z) - f(z))) / np.max(np.abs(f(z))))
    ok = res <= cfg.tol
    summary = {"key": K.cache_key(), "m": m, "N": K.N, "quad_order": K.quad_order, "basis_size": len(K.basis),
               "gram": K.basis.gram.to_dict(), "selftest_relative_residual": float(f"{res:.17g}"),
               "selftest_tolerance": cfg.tol, "status": "pass" if ok else "fail"}
    _emit(json.dumps(summary, indent=1) + "\n", cfg.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_metric(args) -> int:
    cfg = _config(args)
    metric = SzegoMetric(_kernel(cfg))
    pts = _query_points(args, cfg)
    _rows_out(point_rows(metric, pts, cfg.fd_step_second), cfg.out)
    return EXIT_OK


def cmd_distance(args) -> int:
    cfg = _config(args)
    m = cfg.m[0]
    metric = SzegoMetric(_kernel(cfg))
    z1, z2 = _vector(args.z1, m), _vector(args.z2, m)
    res = distance(metric, z1, z2, args.step)
    if args.path_out:
        rows = [{f"z{i}": float(v) for i, v in enumerate(p)} for p in res.path.vertices]
        write_csv(rows, args.path_out)
    out = {"distance": res.value, "graph_distance": res.graph_value, "straight_length": res.straight_value,
           "vertices": len(res.path.vertices)}
    _emit(json.dumps({k: (float(f"{v:.17g}") if isinstance(v, float) else v) for k, v in out.items()},
                     indent=1) + "\n", cfg.out)
    return EXIT_OK


def cmd_caratheodory(args) -> int:
    cfg = _config(args)
    m = cfg.m[0]
    S = cfg.surface(m)
    if args.blowup:
        scan = blowup_scan(S, _vector(args.blowup, m), np.logspace(-3, -1, 9))
        rows = [{"delta": float(d), "dC_lower": float(v)} for d, v in zip(scan["delta"], scan["value"])]
        log.info("blow-up slope %.6f", scan["slope"])
        _rows_out(rows, cfg.out)
        return EXIT_OK
    family = FamilySpec(k2_directions=args.k2_directions, kernel=_kernel(cfg))
    rows = []
    for p in _query_points(args, cfg):
        est = caratheodory_lower_bound(S, p, family)
        row = {f"z{i}": float(v) for i, v in enumerate(p)}
        row.update({"dC_lower": float(est.value), "witness": est.witness})
        rows.append(row)
    _rows_out(rows, cfg.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.m is None:
        args.m = [1, 2]
    m = tuple(args.m)
    overrides = dict(m=m, degree=args.degree, quad_order=args.quad_order, fd_step=args.fd_step, tol=args.tol,
                     seed=args.seed, cache_dir=args.cache_dir, out=args.out, domain=args.domain,
                     fd_step_second=args.fd_step_second)
    cfg = load_config(args.config, **overrides)
    report = run_suite(cfg, args.suite)
    _emit(report.to_json(timing=not args.no_timing) + "\n", cfg.out)
    if args.markdown:
        with open(args.markdown, "w") as fh:
            fh.write(report.traceability_table())
    for c in report.checks:
        log.info("%-5s %s residual=%.3e tol=%.1e", c.status, c.name, c.residual, c.tolerance)
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {"kernel": cmd_kernel, "metric": cmd_metric, "distance": cmd_distance,
            "caratheodory": cmd_caratheodory, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s",
                        stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"clifford-szego: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CacheMismatchError as exc:
        print(f"clifford-szego: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
