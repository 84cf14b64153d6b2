"""Command-line front end: ``solve``, ``converge``, ``analyze``, ``check-operators``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import convergence as conv
from . import discretization as disc
from . import normal_mode as nm
from . import operators as ops
from .errors import ConfigError, NumericalError, SbpWaveError, UnsupportedOrder
from .timeloop import TimeGrid, simulate

log = logging.getLogger("sbpwave")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error[UsageError]: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _order(value):
    try:
        order = int(value)
    except ValueError:
        raise UnsupportedOrder(value) from None
    if order not in ops.SUPPORTED_ORDERS:
        raise UnsupportedOrder(order)
    return order


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------
# solve


def _problem_from_args(args) -> disc.ProblemSpec:
    data = {}
    if args.config:
        data = disc.load_problem(args.config).to_dict()
    overrides = {
        "kind": args.kind,
        "order": None if args.order is None else _order(args.order),
        "n": args.n,
        "n_right": args.n_right,
        "tau_mult": args.tau_mult,
        "outer_tau_mult": args.outer_tau_mult,
        "tf": args.tf,
        "courant": args.courant,
        "dt": args.dt,
        "ratio": args.ratio,
        "perturbation": args.perturbation,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.dt is not None and args.courant is None:
        data["courant"] = None
    return disc.ProblemSpec.from_dict(data)


def cmd_solve(args) -> int:
    spec = _problem_from_args(args)
    system = disc.assemble(spec)
    dt = spec.dt if spec.dt is not None else spec.courant * system.h_min
    grid = TimeGrid(spec.t0, spec.tf, dt)
    result = simulate(system, grid, trace_energy=bool(args.energy), allow_unstable=args.allow_unstable)
    l2, mx = conv.system_errors(system, result.final.u, spec.tf)
    summary = {
        "problem": spec.to_dict(),
        "steps": result.steps,
        "dt": dt,
        "l2_error": l2,
        "max_error": mx,
    }
    if args.energy:
        result.write_energy_csv(args.energy)
    if args.output:
        _write_snapshot(system, result.final, spec.tf, args.output)
    if args.json:
        _write(args.json, _dumps(summary))
    print(f"l2_error={l2:.6e} max_error={mx:.6e} steps={result.steps}")
    return EXIT_OK


def _write_snapshot(system, state, t, path):
    exact = system.sample(system.solution.u, t)
    if system.dim == 1:
        cols = [system.coordinates(), state.u, state.v, exact]
        header = "x,u,v,u_exact"
    else:
        X, Y = system.coordinates()
        cols = [X.ravel(), Y.ravel(), state.u, state.v, exact]
        header = "x,y,u,v,u_exact"
    np.savetxt(path, np.column_stack(cols), delimiter=",", header=header, comments="", fmt="%.17g")


# --------------------------------------------------------------------------
# converge


def cmd_converge(args) -> int:
    if args.preset:
        configs = conv.preset(args.preset)
    else:
        if args.kind is None or args.order is None:
            raise ConfigError("converge needs --preset or both --kind and --order")
        levels = tuple(int(n) for n in args.levels.split(",")) if args.levels else (51, 101, 201, 401, 801)
        configs = [
            conv.StudyConfig(
                args.kind,
                _order(args.order),
                1.2 if args.tau_mult is None else args.tau_mult,
                levels,
                courant=0.1 if args.courant is None else args.courant,
                tf=2.0 if args.tf is None else args.tf,
                perturbation=args.perturbation or 0.0,
            )
        ]
    reports = [conv.run_study(cfg, args.workers) for cfg in configs]
    _write(args.csv, conv.reports_to_csv(reports))
    if args.markdown:
        _write(args.markdown, "\n".join(r.to_markdown() for r in reports))
    if args.json:
        _write(args.json, _dumps([r.to_json() for r in reports]))
    failed = [lv for r in reports for lv in r.levels if not lv.ok]
    for lv in failed:
        print(f"level N={lv.N} failed: {lv.message}", file=sys.stderr)
    return EXIT_NUMERICAL if failed else EXIT_OK


# --------------------------------------------------------------------------
# analyze


def cmd_analyze(args) -> int:
    order = _order(args.order)
    kind = nm.BoundaryKind.parse(args.kind)
    r = args.r
    if args.tau is not None:
        tau = args.tau
    elif kind is nm.BoundaryKind.Neumann:
        tau = None
    else:
        tau = (1.2 if args.tau_mult is None else args.tau_mult) * nm.analysis_threshold(kind, order, r)
    system = nm.build_boundary_system(kind, order, tau, r, damping=args.damping or 0.0)
    _write(args.output, _dumps(nm.analyze_report(system)))
    return EXIT_OK


# --------------------------------------------------------------------------
# check-operators


def operator_checks(n: int = 101) -> list:
    """Run the operator identities and borrowing checks; returns ``(name, ok, detail)`` tuples."""
    out = []
    for order in ops.SUPPORTED_ORDERS:
        op = ops.build_sbp(order, n, 1.0 / (n - 1))
        Ad = op.A.toarray()
        scale = max(1.0, float(np.abs(Ad).max()))
        res = ops.sbp_residual(op)
        out.append((f"order {order}: H D = -A + B S", res <= 1e-12 * scale, f"residual {res:.2e}"))
        asym = float(np.abs(Ad - Ad.T).max())
        out.append((f"order {order}: A symmetric", asym <= 1e-12 * scale, f"asymmetry {asym:.2e}"))
        lam = float(np.linalg.eigvalsh(Ad)[0])
        out.append((f"order {order}: A positive semi-definite", lam >= -1e-10 * scale, f"min eig {lam:.2e}"))
        out.append(_exactness_check(op))
        alpha = ops.borrowing_constant(order)
        good = ops.verify_borrowing(op, alpha)
        bad = ops.verify_borrowing(op, 1.2 * alpha)
        out.append(
            (
                f"order {order}: borrowing alpha={alpha}",
                good.psd and not bad.psd,
                f"min eig {good.min_eigenvalue:.2e} at alpha, {bad.min_eigenvalue:.2e} at 1.2 alpha",
            )
        )
        amax = ops.max_borrowing(op)
        out.append(
            (
                f"order {order}: largest PSD alpha matches table",
                abs(amax - alpha) <= 1e-8 * alpha,
                f"bisection {amax:.12f}",
            )
        )
    return out


def _exactness_check(op):
    x = op.x
    p = op.p
    worst = 0.0
    for k in range(0, op.order + 2):
        d2 = k * (k - 1) * x ** (k - 2) if k >= 2 else np.zeros_like(x)
        r = np.abs(op.D @ x**k - d2) / max(1.0, float(np.abs(d2).max()), float(np.abs(x**k).max()) / op.h**2 * 1e-3)
        rows = slice(None) if k <= p + 1 else slice(op.m, op.n - op.m)
        worst = max(worst, float(r[rows].max()))
    return (f"order {op.order}: polynomial exactness", worst <= 1e-9, f"worst scaled residual {worst:.2e}")


def cmd_check_operators(args) -> int:
    checks = operator_checks(args.n)
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    if args.dump:
        d = Path(args.dump)
        d.mkdir(parents=True, exist_ok=True)
        for order in ops.SUPPORTED_ORDERS:
            op = ops.build_sbp(order, args.n, 1.0 / (args.n - 1))
            with open(d / f"sbp_order{order}_n{args.n}.txt", "w", encoding="utf-8") as fh:
                ops.dump_operator(op, fh)
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_NUMERICAL


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sbpwave", description="SBP-SAT finite differences for the second-order wave equation")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def problem_flags(p):
        p.add_argument("--kind", help="dirichlet | neumann | interface | dirichlet2d")
        p.add_argument("--order", help="2, 4 or 6")
        p.add_argument("--tau-mult", type=float, help="penalty as a multiple of its stability limit")
        p.add_argument("--tf", type=float)
        p.add_argument("--courant", type=float, help="dt / h")
        p.add_argument("--perturbation", type=float, help="Neumann boundary damping magnitude")

    p = sub.add_parser("solve", help="integrate one problem and report its error")
    problem_flags(p)
    p.add_argument("--config", help="JSON problem file")
    p.add_argument("--n", type=int)
    p.add_argument("--n-right", type=int)
    p.add_argument("--outer-tau-mult", type=float)
    p.add_argument("--ratio", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--output", help="final-state CSV")
    p.add_argument("--energy", help="energy-trace CSV (t,energy)")
    p.add_argument("--json", help="summary JSON ('-' for stdout)")
    p.add_argument("--allow-unstable", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("converge", help="grid-refinement study")
    problem_flags(p)
    p.add_argument("--preset", help="table3-top, table3-mid, ..., table6-bottom")
    p.add_argument("--levels", help="comma-separated grid sizes, e.g. 51,101,201")
    p.add_argument("--workers", type=int)
    p.add_argument("--csv", default="-", help="CSV output path (default stdout)")
    p.add_argument("--markdown")
    p.add_argument("--json")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("analyze", help="boundary-system analysis at s=0")
    p.add_argument("--kind", required=True, help="dirichlet | neumann | interface")
    p.add_argument("--order", required=True)
    p.add_argument("--tau", type=float, help="penalty (tau*h_L for the interface)")
    p.add_argument("--tau-mult", type=float)
    p.add_argument("--r", type=float, default=2.0, help="interface mesh ratio h_L/h_R")
    p.add_argument("--damping", type=float, default=0.0)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("check-operators", help="validate operator identities and borrowing constants")
    p.add_argument("--n", type=int, default=101)
    p.add_argument("--dump", help="directory for plain-text operator dumps")
    p.set_defaults(func=cmd_check_operators)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SbpWaveError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
