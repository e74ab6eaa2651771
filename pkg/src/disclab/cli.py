"""disclab command line: one pipeline per invocation, data on stdout (or --out),
summaries and errors on stderr.

Exit codes: 0 success, 1 bad parameters or input, 2 computation failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

from . import bounds, discrepancy, envelope, points, variational
from .errors import ConstructionError, DiscLabError, IngestionError, InvalidParameterError
from .piecewise import PiecewiseLinear

EXIT_OK, EXIT_PARAM, EXIT_COMPUTE = 0, 1, 2
SEQUENCES = ("kronecker", "van-der-corput", "vdc")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; we reserve 2 for computation failures
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str, count: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if count is not None and len(vals) != count:
        raise argparse.ArgumentTypeError(f"expected {count} values, got {len(vals)}")
    return vals


def _tuple(count):
    return lambda text: _floats(text, count)


def _window(text: str) -> tuple[int, int]:
    lo, hi = _floats(text, 2)
    if lo != int(lo) or hi != int(hi):
        raise argparse.ArgumentTypeError(f"window bounds must be integers, got {text!r}")
    return int(lo), int(hi)


def _index_set(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


# -- parser -----------------------------------------------------------------


def _common(p: argparse.ArgumentParser, formats=("csv", "json")) -> None:
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--out", metavar="PATH", help="write data here instead of stdout")
    p.add_argument("--threads", type=_positive_int,
                   help="worker cap (default: DISCLAB_THREADS or all cores)")


def _point_source(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("points")
    g.add_argument("--in", dest="infile", metavar="PATH", help="point file, one value per line")
    g.add_argument("--sequence", choices=SEQUENCES)
    g.add_argument("--base", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--count", type=_positive_int)


def build_parser() -> Parser:
    parser = Parser(prog="disclab", description="Star discrepancy and envelope toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("gen", help="generate a point sequence")
    _common(p)
    p.add_argument("--sequence", required=True, choices=SEQUENCES)
    p.add_argument("--base", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--count", type=_positive_int, required=True)

    p = sub.add_parser("star", help="star discrepancy, or A_n(x) and D_n(x) with --n/--at")
    _common(p)
    _point_source(p)
    p.add_argument("--n", type=_positive_int, help="prefix length for --at")
    p.add_argument("--at", type=float, metavar="X", help="evaluate count and local discrepancy at x")

    p = sub.add_parser("profile", help="n D_n^* for every n or on checkpoints")
    _common(p)
    _point_source(p)
    p.add_argument("--schedule", choices=("all", "checkpointed"), default="all")
    p.add_argument("--ratio", type=float, default=discrepancy.DEFAULT_RATIO)
    p.add_argument("--dense", type=int, default=discrepancy.DENSE_UPTO)
    p.add_argument("--floor-n", type=int, default=2)
    p.add_argument("--figure", metavar="PATH", help="also render n D_n^* to an image")

    p = sub.add_parser("envelope", help="window envelopes, f, g and jump census")
    _common(p)
    _point_source(p)
    p.add_argument("--a", type=float, default=3.71866)
    p.add_argument("--t", type=_positive_int, default=2)
    p.add_argument("--function", choices=("f", "g", "max", "min", "spread"), default="f")
    p.add_argument("--window", type=_window, metavar="LO,HI",
                   help="index window for max/min/spread (default: A2 of the scheme)")
    p.add_argument("--threshold", type=float, default=1.0, help="jump height counted by the census")
    p.add_argument("--terms", action="store_true",
                   help="also report the integrated splitting terms on stderr/JSON")
    p.add_argument("--figure", metavar="PATH")

    p = sub.add_parser("ptee", help="P(t) against t chi_a")
    _common(p)
    _point_source(p)
    p.add_argument("--a", type=float, default=3.71866)
    p.add_argument("--t-max", type=_positive_int, default=5)

    p = sub.add_parser("variational", help="extremal functions, closed forms, admissibility")
    _common(p)
    p.add_argument("--a", type=float, default=3.71866)
    p.add_argument("--t", type=_positive_int, default=1)
    p.add_argument("--mode", choices=("admissible", "strong"), default="strong")
    act = p.add_mutually_exclusive_group()
    act.add_argument("--assemble", action="store_true", help="extremal function segments (default)")
    act.add_argument("--check", metavar="PATH", help="admissibility of a segment CSV")
    act.add_argument("--oracle", choices=("structured", "perturbed"))
    act.add_argument("--closed-form", type=float, metavar="CHI", dest="closed_form")
    act.add_argument("--delta", type=_tuple(3), metavar="ALPHA,BETA,GAMMA")
    act.add_argument("--selector", type=_tuple(3), metavar="ALPHA,GAMMA,DELTA")
    act.add_argument("--part", type=_tuple(5), metavar="ALPHA,BETA,GAMMA,DELTA,TAU",
                     help="segments of one Q' part")
    p.add_argument("--v", type=_tuple(2), default=[0.0, 0.0], metavar="V,V'",
                   help="slope selectors for --part in strong mode")
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--figure", metavar="PATH")

    p = sub.add_parser("bound", help="c(a) and the optimised constant")
    _common(p, formats=("json", "csv"))
    p.add_argument("--optimize", action="store_true", help="maximise c(a) on [lo, hi]")
    p.add_argument("--a", type=float, help="also report c(a) at this a")
    p.add_argument("--lo", type=float, default=3.0)
    p.add_argument("--hi", type=float, default=4.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--scan-step", type=float)
    p.add_argument("--figure", metavar="PATH", help="plot the c(a) scan")

    p = sub.add_parser("verify", help="finite-N bound check, or the splitting inequality")
    _common(p)
    _point_source(p)
    p.add_argument("--a", type=float, default=3.71866)
    p.add_argument("--split", type=_floats, metavar="V1,V2,...",
                   help="values f(1..k) for the splitting inequality instead of a point check")
    p.add_argument("--a0", type=_index_set, metavar="I,J,...")
    p.add_argument("--a2", type=_index_set, metavar="I,J,...")
    return parser


# -- helpers ----------------------------------------------------------------


def _load_points(args) -> points.PointSet:
    if args.infile and args.sequence:
        raise InvalidParameterError("give either --in or --sequence, not both")
    if args.infile:
        return points.read_points(args.infile)
    if not args.sequence:
        raise InvalidParameterError("points required: --in PATH or --sequence KIND --count N")
    if not args.count:
        raise InvalidParameterError("--sequence needs --count")
    return points.generate(_spec(args), args.count)


def _spec(args) -> points.GeneratorSpec:
    kind = points.KIND_ALIASES[args.sequence]
    base, alpha = args.base, args.alpha
    if kind == "van-der-corput" and base is None:
        base = 2
    if kind == "kronecker" and alpha is None:
        alpha = points.GOLDEN
    return points.GeneratorSpec(kind, base=base, alpha=alpha)


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _segments_json(f: PiecewiseLinear) -> list[dict]:
    keys = ("x_left", "x_right", "slope", "value_left", "jump_at_left")
    return [dict(zip(keys, map(float, row))) for row in f.segment_rows()]


# -- commands ---------------------------------------------------------------


def cmd_gen(args) -> None:
    pts = points.generate(_spec(args), args.count)
    _emit(args, points.dump_json(pts) if args.format == "json" else points.format_points(pts))


def cmd_star(args) -> None:
    pts = _load_points(args)
    if (args.n is None) != (args.at is None):
        raise InvalidParameterError("--n and --at go together")
    if args.at is not None:
        c = discrepancy.count_below(pts, args.n, args.at)
        d = discrepancy.disc_function(pts, args.n, args.at)
        if args.format == "json":
            _emit(args, _json({"n": args.n, "x": args.at, "count_below": c, "disc": d}))
        else:
            _emit(args, _csv(["n", "x", "count_below", "disc"], [(args.n, args.at, c, d)]))
        return
    d = discrepancy.star_discrepancy(pts)
    if args.format == "json":
        _emit(args, _json({"N": len(pts), "star_discrepancy": d}))
    else:
        _emit(args, repr(d))


def cmd_profile(args) -> None:
    pts = _load_points(args)
    prof = discrepancy.profile(pts, args.schedule, args.ratio, args.dense, args.threads)
    peak = discrepancy.max_ratio(prof, args.floor_n)
    _note(f"{len(prof)} entries, max n D_n^*/log n over n >= {args.floor_n}: {peak:.10g}")
    if args.format == "json":
        _emit(args, _json({"schedule": prof.schedule, "ratio": prof.ratio, "max_ratio": peak,
                           "entries": [[n, d] for n, d in prof.entries]}))
    else:
        _emit(args, prof.to_csv())
    if args.figure:
        from .plotting import plot_profile
        plot_profile(prof, args.figure, bounds.REFERENCES["published-lower"])


def cmd_envelope(args) -> None:
    pts = _load_points(args)
    scheme = envelope.WindowScheme(args.a, args.t)
    if args.function == "f":
        fn = envelope.f_function(pts, scheme)
    elif args.function == "g":
        fn = envelope.g_function(pts, scheme)
    else:
        W = args.window or scheme.A2
        if args.function == "spread":
            fn = envelope.window_spread(pts, W)
        else:
            fn = envelope.window_envelope(pts, W, args.function)
    total, big = envelope.jump_census(fn, args.threshold)
    integral = envelope.integrate_abs(fn)
    _note(f"N={scheme.N} m={scheme.m} {args.function}: integral |.| = {integral:.12g}, "
          f"jumps {total}, >= {args.threshold}: {big} (N - 2m = {scheme.N - 2 * scheme.m})")
    terms = envelope.split_terms(pts, scheme) if args.terms else None
    if terms:
        _note(f"P = {terms.p:.12g} >= {terms.rhs:.12g}")
    if args.format == "json":
        out = {"a": args.a, "t": args.t, "N": scheme.N, "m": scheme.m, "function": args.function,
               "integral_abs": integral, "jumps": total, "jumps_at_least": big,
               "threshold": args.threshold, "segments": _segments_json(fn)}
        if terms:
            out["terms"] = {"p": terms.p, "spread2": terms.spread2, "spread0": terms.spread0,
                            "abs_f": terms.abs_f, "abs_g": terms.abs_g, "rhs": terms.rhs}
        _emit(args, _json(out))
    else:
        _emit(args, fn.to_csv())
    if args.figure:
        from .plotting import plot_functions
        plot_functions({args.function: fn}, args.figure, f"a = {args.a}, t = {args.t}")


def cmd_ptee(args) -> None:
    pts = _load_points(args)
    rows = bounds.p_chain_check(pts, args.a, args.t_max)
    _note(f"chain {'passes' if all(r.passed for r in rows) else 'FAILS'} for t <= {args.t_max}")
    if args.format == "json":
        _emit(args, _json([r.__dict__ for r in rows]))
    else:
        _emit(args, _csv(["t", "N", "p", "t_chi", "passed"],
                         [(r.t, r.N, r.p, r.t_chi, r.passed) for r in rows]))
    if not all(r.passed for r in rows):
        raise ConstructionError("P(t) >= t chi_a violated")


def _report_rows(rep: variational.AdmissibilityReport):
    return [(k, v, *rep.witnesses.get(k, ("", ""))) for k, v in rep.flags.items()]


def cmd_variational(args) -> None:
    p = variational.AdmissibleParams(args.a, args.t)
    fmt_json = args.format == "json"

    if args.check:
        with open(args.check) as fh:
            try:
                f = PiecewiseLinear.from_csv(fh.read())
            except ValueError as exc:
                raise IngestionError(f"{args.check}: {exc}")
        rep = variational.check_condition_A(f, p)
        _note(f"admissible: {rep.admissible}, strongly admissible: {rep.strongly_admissible}")
        if fmt_json:
            _emit(args, _json(rep.to_json()))
        else:
            _emit(args, _csv(["property", "holds", "x", "value"], _report_rows(rep)))
        return

    if args.oracle:
        res = variational.oracle_minimize(p, args.oracle, args.resolution, args.seed)
        chi = variational.chi_lower_bound(args.a)
        _note(f"{args.oracle} oracle: {res.value:.12g} (chi_a = {chi:.12g})")
        out = {"family": res.family, "value": res.value, "chi_a": chi, "baseline": res.baseline,
               "trials": res.trials, "accepted": res.accepted, "improved": res.improved,
               "argmin": res.argmin}
        if fmt_json:
            _emit(args, _json(out))
        else:
            keys = ("family", "value", "chi_a", "baseline", "trials", "accepted", "improved")
            _emit(args, _csv(list(keys), [tuple("" if out[k] is None else out[k] for k in keys)]))
        return

    if args.closed_form is not None:
        chi = args.closed_form
        lo, hi = variational.strong_chi_range(p)
        out = {"chi": chi, "q1": variational.q1_integral(chi, p),
               "q2": variational.q2_integral(chi, p),
               "strong_q": variational.strong_q_integral(chi, p) if lo <= chi <= hi else None,
               "strong_range": [lo, hi]}
        if fmt_json:
            _emit(args, _json(out))
        else:
            _emit(args, _csv(["chi", "q1", "q2", "strong_q"],
                             [(chi, out["q1"], out["q2"], "" if out["strong_q"] is None else out["strong_q"])]))
        return

    if args.delta:
        d = variational.optimal_delta(*args.delta, p)
        _emit(args, _json({"delta": d, "tau": 1.0 - d}) if fmt_json else _csv(["delta", "tau"], [(d, 1.0 - d)]))
        return

    if args.selector:
        v, vc = variational.optimal_slope_selector(*args.selector, p)
        _emit(args, _json({"v": v, "v_clamped": vc}) if fmt_json else _csv(["v", "v_clamped"], [(v, vc)]))
        return

    if args.part:
        seg = variational.SegmentSpec(*args.part, v=args.v[0], v_prime=args.v[1])
        if args.mode == "strong":
            f = variational.build_qprime_strong(seg, p)
        else:
            f = variational.build_qprime_admissible(seg, p)
        _finish_function(args, f, {"integral_abs": f.integrate_abs()})
        return

    layout = variational.extremal_layout(p, args.mode)
    f = layout.function()
    rep = variational.check_condition_A(f, p)
    _note(f"{layout.n_qprime} Q' + {layout.n_qdoubleprime} Q'' parts, integral |f| = "
          f"{f.integrate_abs():.12g}, real-count total {layout.real_count_total():.12g}; "
          f"admissible {rep.admissible}, condition A {rep.flags.get('A')}")
    _finish_function(args, f, {
        "mode": args.mode, "chi": layout.chi, "tau": layout.tau,
        "n_qprime": layout.n_qprime, "n_qdoubleprime": layout.n_qdoubleprime,
        "integral_abs": f.integrate_abs(), "real_count_total": layout.real_count_total(),
        "chi_a": variational.chi_lower_bound(args.a), "report": rep.to_json()})


def _finish_function(args, f: PiecewiseLinear, extra: dict) -> None:
    if args.format == "json":
        _emit(args, _json({"a": args.a, "t": args.t, **extra, "segments": _segments_json(f)}))
    else:
        _emit(args, f.to_csv())
    if args.figure:
        from .plotting import plot_functions
        plot_functions({args.mode: f}, args.figure, f"a = {args.a}, t = {args.t}")


def cmd_bound(args) -> None:
    if not args.optimize and args.a is None:
        raise InvalidParameterError("bound needs --optimize and/or --a")
    if args.optimize:
        step = args.scan_step or (1e-3 if args.figure else None)
        rep = bounds.bound_report(args.a, args.lo, args.hi, args.tol, step)
        _note(f"a* = {rep.a_star:.10f}, c* = {rep.c_star_lower:.10f}")
        out = rep.to_json()
        scan_pts = out.pop("scan", None) if not args.scan_step else out.get("scan")
    else:
        out = {"a": args.a, "chi_a": variational.chi_lower_bound(args.a), "c_of_a": bounds.c_of_a(args.a)}
        if args.scan_step:
            xs, cs = bounds.scan(args.lo, args.hi, args.scan_step)
            out["scan"] = [[float(x), float(c)] for x, c in zip(xs, cs)]
        scan_pts = out.get("scan")
    if args.format == "json":
        _emit(args, _json(out))
    else:
        keys = [k for k in ("a_star", "c_star_lower", "chi_a_star", "a", "chi_a", "c_of_a") if k in out]
        _emit(args, _csv(keys, [tuple(out[k] for k in keys)]))
    if args.figure:
        if scan_pts is None:
            raise InvalidParameterError("--figure needs a scan (--optimize or --scan-step)")
        from .plotting import plot_scan
        a_star = out.get("a_star", args.a)
        plot_scan(scan_pts, a_star, bounds.c_of_a(a_star), args.figure, bounds.REFERENCES)


def cmd_verify(args) -> None:
    if args.split is not None:
        if not args.a0 or not args.a2:
            raise InvalidParameterError("--split needs --a0 and --a2")
        values = {i + 1: v for i, v in enumerate(args.split)}
        lhs, rhs = bounds.range_split_inequality(values, args.a0, args.a2)
        holds = lhs >= rhs - 1e-12
        if args.format == "json":
            _emit(args, _json({"lhs": lhs, "rhs": rhs, "holds": holds}))
        else:
            _emit(args, _csv(["lhs", "rhs", "holds"], [(lhs, rhs, holds)]))
        return
    pts = _load_points(args)
    prof = discrepancy.profile(pts, "checkpointed", threads=args.threads)
    chk = bounds.verify_bound(pts, args.a, prof)
    _note(f"max n D_n^* = {chk.max_nd:.10g} at n = {chk.witness_n}; "
          f"threshold c(a) log N = {chk.threshold:.10g}; {'holds' if chk.holds else 'FAILS'}")
    if args.format == "json":
        _emit(args, _json(chk.__dict__))
    else:
        _emit(args, _csv(["holds", "witness_n", "margin", "threshold", "max_nd"],
                         [(chk.holds, chk.witness_n, chk.margin, chk.threshold, chk.max_nd)]))


COMMANDS = {
    "gen": cmd_gen,
    "star": cmd_star,
    "profile": cmd_profile,
    "envelope": cmd_envelope,
    "ptee": cmd_ptee,
    "variational": cmd_variational,
    "bound": cmd_bound,
    "verify": cmd_verify,
}


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        _note(str(exc))
        return EXIT_PARAM
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.threads:
        os.environ["DISCLAB_THREADS"] = str(args.threads)
    try:
        COMMANDS[args.command](args)
    except (InvalidParameterError, IngestionError) as exc:
        _note(f"disclab {args.command}: {exc}")
        return EXIT_PARAM
    except OSError as exc:
        _note(f"disclab {args.command}: {exc}")
        return EXIT_PARAM
    except (DiscLabError, ArithmeticError, ValueError) as exc:
        _note(f"disclab {args.command}: computation failed: {exc}")
        return EXIT_COMPUTE
    return EXIT_OK


def main() -> None:
    sys.exit(run())
