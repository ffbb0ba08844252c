"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 invalid input, 4 failed bound check.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import chebyshev as cheb
from . import nn_core, splines, studies
from .errors import DataError, ParameterError, StructuralError
from .expressions import builtin
from .sobolev import ErrorReport, diff_norms, function_norms

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_BOUND = 0, 2, 3, 4


class UsageError(Exception):
    pass


# --- helpers --------------------------------------------------------------

def _load_spline(args) -> splines.PiecewiseCheb:
    mesh = splines.read_mesh_csv(args.mesh, args.degrees)
    if args.values:
        return splines.read_values_csv(args.values, mesh)
    return splines.sample_to_spline(builtin(args.expr).f, mesh)


def _grid_points(mesh: splines.Mesh, per_element: int = 1025) -> np.ndarray:
    pts = [np.linspace(a, b, per_element) for a, b in zip(mesh.nodes[:-1], mesh.nodes[1:])]
    return np.unique(np.concatenate(pts))


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --- commands -------------------------------------------------------------

def cmd_coeffs(args) -> int:
    interval = tuple(args.interval)
    grid = cheb.cc_grid(args.degree, interval)
    if args.samples:
        values = cheb.read_column_csv(args.samples, "value")
        if values.size != args.degree + 1:
            raise UsageError(
                f"{args.samples}: degree {args.degree} needs p+1 = {args.degree + 1} samples, "
                f"got {values.size}"
            )
    else:
        values = cheb.sample_cc(builtin(args.expr).f, args.degree, interval)
    series = cheb.cc_interpolate(values, grid)
    cheb.write_coeffs_csv(series, args.out or sys.stdout)
    return EXIT_OK


def cmd_emulate(args) -> int:
    v = _load_spline(args)
    em = splines.assemble_spline_emulator(v, args.eps)
    net = em.net
    mesh = v.mesh
    report = diff_norms(v, v.derivative, net, mesh)
    v_norms = function_norms(v, v.derivative, mesh)
    half = 0.5 * args.eps
    for semi in ("W1_1", "H1_semi", "W1_inf"):
        report.add_check(f"{semi}_bound", report.value(semi), half * v_norms.value(semi))
    nodal = np.abs(nn_core.realize(net, mesh.nodes)[:, 0] - v.nodal_values).max()
    report.add_check("nodal_exactness", nodal, 1e-12 * max(1.0, np.abs(v.nodal_values).max()),
                     slack=0.0)
    for chk in splines.spline_size_checks(em, mesh):
        report.add_check(chk.name, chk.measured, chk.bound, slack=0.0)
    m = net.metrics
    report.metrics = {"depth": m.depth, "size": m.size, "size_first": m.size_first,
                      "size_last": m.size_last}
    nn_core.save(net, args.out)
    report.dump_json(args.report or Path(args.out).with_suffix(".report.json"))
    return EXIT_OK if report.all_satisfied else EXIT_BOUND


def cmd_study(args) -> int:
    if args.kind == "p-version":
        expr = builtin(args.expr)
        recs = studies.run_p_version_study(
            expr.f, expr.df, args.smoothness, args.N, range(args.pmin, args.pmax + 1),
        )
        studies.write_study_csv(recs, args.out, key="p")
        return EXIT_OK

    if args.kind == "hp":
        if args.Nmax - args.Nmin < 2:
            raise UsageError("the hp fit needs at least 3 values of N (Nmax >= Nmin + 2)")
        specs = [studies.GeometricMeshSpec(args.sigma, N, args.mu, args.gevrey_delta)
                 for N in range(args.Nmin, args.Nmax + 1)]
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            recs = studies.run_hp_study(args.alpha, specs, c=args.c, beta=args.beta, d_u=args.du)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        studies.write_study_csv(recs, args.out)
        fit_n = studies.exponential_fit(recs)
        fit_m = studies.size_fit(recs, 1.0 / (2.0 + args.gevrey_delta))
        summary = {
            "slope": fit_n.slope, "intercept": fit_n.intercept, "r2": fit_n.r2,
            "size_slope": fit_m.slope, "size_r2": fit_m.r2,
        }
        fit_path = args.fit or Path(args.out).with_suffix(".fit.json")
        Path(fit_path).write_text(json.dumps(summary, indent=2))
        ok = fit_n.r2 >= 0.98 and fit_n.slope < 0.0
        return EXIT_OK if ok else EXIT_BOUND

    v = _load_spline(args)
    measure = studies.hp_target_measure(args.alpha) if args.alpha is not None else None
    recs = studies.run_free_knot_study(v, args.eps, measure)
    studies.write_study_csv(recs, args.out)
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    net_in = nn_core.load(args.net)
    mesh = splines.read_mesh_csv(args.mesh, args.degrees)
    sampled = splines.network_to_spline(net_in, mesh)
    net_out = splines.build_spline_emulator(sampled, args.eps)
    x = _grid_points(mesh)
    y_in = nn_core.realize(net_in, x)[:, 0]
    y_out = nn_core.realize(net_out, x)[:, 0]
    gap = float(np.abs(y_in - y_out).max())
    v_sup = float(np.abs(y_in).max())

    report = ErrorReport()
    report.add_entry("Linf", gap, "grid", f"{x.size} points")
    report.add_check("reemulation_gap", gap, 2.0 * args.eps * max(v_sup, np.finfo(float).tiny))
    coefficient_gap = None
    try:
        direct = splines.read_spline_from_output_layer(net_in, mesh, args.eps)
    except StructuralError:
        direct = None
    if direct is not None:
        coefficient_gap = max(
            float(np.abs(a.coeffs - b.coeffs).max()) for a, b in zip(direct.series, sampled.series)
        )
        report.add_check("coefficient_recovery", coefficient_gap, 1e-9, slack=0.0)
    out = report.to_dict()
    out["coefficients"] = [s.coeffs.tolist() for s in sampled.series]
    out["read_from_output_layer"] = direct is not None
    text = json.dumps(out, indent=2) + "\n"
    _emit(text, args.report)
    if args.out:
        nn_core.save(net_out, args.out)
    return EXIT_OK if report.all_satisfied else EXIT_BOUND


# --- parser ---------------------------------------------------------------

def _spline_args(p: argparse.ArgumentParser, required_values: bool = True) -> None:
    p.add_argument("--mesh", required=True, help="CSV with a 'node' column")
    p.add_argument("--degrees", required=True, help="CSV with a 'degree' column")
    src = p.add_mutually_exclusive_group(required=required_values)
    src.add_argument("--values", help="CSV with element_index,cc_point,value")
    src.add_argument("--expr", help="built-in expression name")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cheb2relu", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="Chebyshev coefficients of a Clenshaw-Curtis interpolant")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--interval", type=float, nargs=2, default=[-1.0, 1.0], metavar=("A", "B"))
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--samples", help="CSV with a 'value' column of p+1 samples")
    src.add_argument("--expr", help="built-in expression name")
    p.add_argument("--out")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("emulate", help="build the ReLU emulator of a spline")
    _spline_args(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out", required=True, help="network JSON")
    p.add_argument("--report", help="error report JSON (default: <out>.report.json)")
    p.set_defaults(func=cmd_emulate)

    p = sub.add_parser("study", help="convergence studies")
    kinds = p.add_subparsers(dest="kind", required=True)
    pv = kinds.add_parser("p-version")
    pv.add_argument("--expr", default="sin2pix")
    pv.add_argument("--N", type=int, default=4)
    pv.add_argument("--pmin", type=int, default=2)
    pv.add_argument("--pmax", type=int, default=12)
    pv.add_argument("--smoothness", type=float, default=6.0)
    hp = kinds.add_parser("hp")
    hp.add_argument("--alpha", type=float, default=0.6)
    hp.add_argument("--sigma", type=float, default=0.5)
    hp.add_argument("--mu", type=float, default=1.0)
    hp.add_argument("--gevrey-delta", type=float, default=1.0)
    hp.add_argument("--Nmin", type=int, default=1)
    hp.add_argument("--Nmax", type=int, default=10)
    hp.add_argument("--c", type=float, default=None, help="rate in eps = exp(-c N)")
    hp.add_argument("--beta", type=float, default=None)
    hp.add_argument("--du", type=float, default=None, help="Gevrey constant d_u for the mu0 check")
    hp.add_argument("--fit", help="fit summary JSON (default: <out>.fit.json)")
    fk = kinds.add_parser("free-knot")
    _spline_args(fk)
    fk.add_argument("--eps", type=float, nargs="+", required=True)
    fk.add_argument("--alpha", type=float, default=None,
                    help="measure errors against x^alpha - x instead of the spline")
    for k in (pv, hp, fk):
        k.add_argument("--out", required=True)
        k.add_argument("--seed", default=None, help="accepted for compatibility; studies use no RNG")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("roundtrip", help="network -> Chebyshev data -> network")
    p.add_argument("--net", required=True)
    p.add_argument("--mesh", required=True)
    p.add_argument("--degrees", required=True)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--report")
    p.add_argument("--out", help="re-emulated network JSON")
    p.set_defaults(func=cmd_roundtrip)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, StructuralError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
