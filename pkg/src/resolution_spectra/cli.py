"""Command-line front end.

Exit status: 0 on success, 1 on a domain error (JSON on stderr), 2 on a
usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import exact, mixsim, resolution, spectrum, words
from ._util import exact_str, resolve_threads
from .exact import ContinuedFraction, ProjectiveRational, QuadraticIrrational


# ---------------------------------------------------------------------------
# argument types


def _rational(text: str) -> ProjectiveRational:
    try:
        return exact.parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _number(text: str):
    """p/q, an exact decimal, "inf", a continued fraction "[a0,...]" or a
    periodic one "[pre;(period)]"."""
    s = text.strip()
    try:
        if "(" in s:
            return QuadraticIrrational.parse(s)
        if s.startswith("["):
            return ContinuedFraction.parse(s)
        return exact.parse_rational(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        return list(ContinuedFraction.parse(text).quotients)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _word(text: str) -> words.GeneratorWord:
    try:
        return words.GeneratorWord.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


# ---------------------------------------------------------------------------
# helpers


def _value_of(x) -> ProjectiveRational:
    if isinstance(x, ContinuedFraction):
        return exact.rational_from_cf(x)
    return x


def _cf_text(x, word_form: bool) -> str:
    cf = exact.cf_from_rational(_value_of(x))
    return str(exact.to_word_form(cf) if word_form else cf)


def _emit(args, payload) -> None:
    if args.format == "text" and isinstance(payload, dict):
        for k, v in payload.items():
            print(f"{k}: {v if isinstance(v, str) else json.dumps(v, ensure_ascii=False)}")
        return
    print(json.dumps(payload, indent=1, ensure_ascii=False))


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        args._parser.error("missing " + ", ".join("--" + n for n in missing))


# ---------------------------------------------------------------------------
# subcommands


def cmd_cf(args):
    _need(args, "x")
    x = args.x
    if isinstance(x, QuadraticIrrational):
        P, D, Q = x.surd
        _emit(args, {"surd": str(x), "P": P, "D": D, "Q": Q,
                     "quotients": exact.surd_expand(P, D, Q, args.depth or 12)})
        return
    v = _value_of(x)
    if v.is_infinite:
        raise ValueError("infinity has no continued fraction")
    cf = exact.cf_from_rational(v)
    if args.depth:
        cf = ContinuedFraction(cf.quotients[: args.depth])
    shown = exact.to_word_form(cf) if args.word_form else cf
    rows = [{"i": r.index, "p": r.p, "q": r.q} for r in exact.convergents(cf).rows]
    if args.format == "csv":
        print("i,p,q")
        for r in rows:
            print(f"{r['i']},{r['p']},{r['q']}")
        return
    _emit(args, {"x": str(v), "cf": str(shown), "convergents": rows})


def cmd_word(args):
    if args.word is not None:
        w = args.word
        cf = words.cf_from_word(w)
    else:
        _need(args, "x")
        cf = exact.to_word_form(exact.cf_from_rational(_value_of(args.x)))
        w = words.word_from_cf(cf)
    m = w.matrix
    pt = w.apply()
    shown = cf if args.word_form else exact.to_minimal_form(cf)
    _emit(args, {"word": str(w), "cf": str(shown), "value": str(pt.slope),
                 "point": [pt.q, pt.p], "matrix": [[m.a, m.b], [m.c, m.d]]})


def cmd_tree(args):
    if args.a is not None:
        t = resolution.resolution_tree(args.a, args.q_limit, args.max_value)
        out = t.to_dot() if args.format == "dot" else t.to_json()
    else:
        t = words.build_farey_tree(args.q_limit, args.max_value or 2)
        out = t.to_dot() if args.format == "dot" else t.to_json()
    sys.stdout.write(out if out.endswith("\n") else out + "\n")


def cmd_resolve(args):
    if args.lo is not None or args.hi is not None:
        _need(args, "lo", "hi", "a")
        rows = resolution.error_profile(args.lo, args.hi, args.a, args.samples, args.threads)
        if args.format == "json":
            _emit(args, [{"x": str(x), "error": str(e)} for x, e in rows])
        else:
            sys.stdout.write(resolution.error_profile_csv(rows))
        return
    _need(args, "x", "a")
    x = args.x
    out = {"x": str(x) if isinstance(x, QuadraticIrrational) else str(_value_of(x)), "a": args.a}
    img = resolution.r_a(x, args.a)
    out["image"] = None if img is None else str(img)
    if args.orbit:
        start = [] if isinstance(x, QuadraticIrrational) else [_value_of(x)]
        path = resolution.orbit(x, args.a, args.max_steps)
        seq = start + [y for y in path if not start or y != start[0]]
        out["orbit"] = " → ".join(str(y) for y in seq)
        out["orbit_cf"] = [_cf_text(y, args.word_form) if not y.is_infinite else "inf" for y in seq]
    if args.classify:
        out["class"] = resolution.classify(x, args.a, args.depth or 64).as_dict()
    _emit(args, out)


def cmd_zone(args):
    _need(args, "pq")
    if args.f1 is not None or args.fc is not None:
        _need(args, "f1", "fc")
        cfg = spectrum.DetectorConfig(args.f1, args.fc, args.n_max)
        z = spectrum.spectrum_zone(args.pq, cfg)
        _emit(args, z.as_dict())
        return
    _need(args, "a")
    z = resolution.zone(args.pq, args.a)
    lo, hi = z.widths
    _emit(args, {"center": str(z.center), "nu_minus": str(z.nu_minus), "nu_plus": str(z.nu_plus),
                 "a": z.a_used, "width_left": str(ProjectiveRational(lo.numerator, lo.denominator)),
                 "width_right": str(ProjectiveRational(hi.numerator, hi.denominator))})


def cmd_basin(args):
    _need(args, "pq", "a")
    b = resolution.basin(args.pq, args.a)
    out = b.as_dict()
    out["left_decimal"] = None if b.left_edge is None else f"{float(b.left_edge):.12f}"
    out["right_decimal"] = f"{float(b.right_edge):.12f}"
    _emit(args, out)


def cmd_spectrum(args):
    _need(args, "f1", "fc")
    cfg = spectrum.DetectorConfig(args.f1, args.fc, args.n_max)
    lo = args.lo if args.lo is not None else ProjectiveRational(0)
    hi = args.hi if args.hi is not None else ProjectiveRational(2)
    s = spectrum.build_spectrum(cfg, lo, hi, args.threads)
    if args.format == "csv":
        print("center,nu_minus,nu_plus,a_max")
        for z in s.zones:
            d = z.as_dict()
            print(f"{d['center']},{d['nu_minus']},{d['nu_plus']},{d['a_max']}")
        return
    print(s.to_json())


def cmd_jumps(args):
    _need(args, "prefix", "a_from", "a_to", "f0", "f1")
    if args.a_to < args.a_from:
        raise ValueError("--a-to must not be below --a-from")
    rows = spectrum.jump_scan(args.prefix, range(args.a_from, args.a_to + 1), args.f0, args.f1, args.threads)
    if args.format == "json":
        m = spectrum.match_jumps(rows)
        _emit(args, {
            "rows": [{"a": r.a, "p": r.p, "q": r.q, "f_hz": exact_str(r.f_hz)} for r in rows],
            "match": None if m is None else {
                "a": list(m.a_values), "f_hz": [exact_str(f) for f in m.frequencies],
                "reference_a": list(m.reference_a), "offset": m.offset,
                "minimum": {"a": m.minimum.a, "f_hz": exact_str(m.minimum.f_hz)}},
        })
        return
    sys.stdout.write(spectrum.jump_csv(rows))


def _expandable(args):
    _need(args, "x")
    x = args.x
    if isinstance(x, (QuadraticIrrational, ContinuedFraction)):
        return x
    return exact.cf_from_rational(x)


def cmd_brjuno(args):
    r = spectrum.brjuno(_expandable(args), args.depth or 40, args.tol)
    _emit(args, {"value": repr(r.value), "converged": r.converged, "terms": len(r.terms)})


def cmd_stability(args):
    p = spectrum.stability_profile(_expandable(args), args.depth or 20)
    if args.format == "csv":
        sys.stdout.write(p.to_csv())
        return
    _emit(args, {"rows": [{"i": r.i, "q": r.q, "q_next": r.q_next, "tau": r.tau, "gamma": str(r.gamma)}
                          for r in p.rows], "brjuno_partial": repr(p.brjuno_partial)})


def cmd_simulate(args):
    if args.config:
        c = mixsim.load_config(args.config)
        f1, fc, model, window, sr = c.f1, c.fc, c.model, c.window, c.sample_rate
        f0_lo = args.f0_lo if args.f0_lo is not None else c.f0_lo
        f0_hi = args.f0_hi if args.f0_hi is not None else c.f0_hi
        steps = args.steps or c.steps
    else:
        _need(args, "f1", "fc")
        f1, fc = args.f1.fraction, args.fc.fraction
        model = mixsim.MixerModel(args.model, args.order_limit, args.rolloff)
        window, sr = args.window, args.sample_rate
        f0_lo, f0_hi, steps = args.f0_lo, args.f0_hi, args.steps or 201
    if f0_lo is None or f0_hi is None:
        args._parser.error("simulate needs --f0-lo and --f0-hi (or f0_lo/f0_hi in the config)")
    res = mixsim.sweep(f0_lo, f0_hi, steps, f1, fc, model, window, sr, args.threads)
    if args.format == "json":
        good, total = res.agreement(2 / window)
        _emit(args, {"rows": len(res.rows), "in_zone": total, "agreeing": good})
        return
    sys.stdout.write(res.to_csv())


def cmd_selftest(args):
    from .selftest import run_selftest

    report = run_selftest(threads=args.threads)
    _emit(args, report)
    if report["failures"]:
        sys.exit(1)


# ---------------------------------------------------------------------------
# parser

EXAMPLES = {
    "cf": "resolution-spectra cf --x 0.599975/1.00000007 --depth 7",
    "word": "resolution-spectra word --x 4/3",
    "tree": "resolution-spectra tree --q-limit 5 --a 3 --format dot",
    "resolve": "resolution-spectra resolve --x 3/4 --a 3 --orbit",
    "zone": "resolution-spectra zone --pq 1/1 --a 3",
    "basin": "resolution-spectra basin --pq 1 --a 3",
    "spectrum": "resolution-spectra spectrum --f1 10 --fc 1 --lo 0 --hi 2",
    "jumps": "resolution-spectra jumps --prefix 0,1,1,2 --a-from 1590 --a-to 1605 --f0 1000000.07 --f1 599975",
    "brjuno": "resolution-spectra brjuno --x '[(2,1)]' --depth 80",
    "stability": "resolution-spectra stability --x '[0,1,1,2,1596,1,10]'",
    "simulate": "resolution-spectra simulate --f0-lo 5 --f0-hi 15 --f1 10 --fc 1 --model intermodulating "
                "--order-limit 5 --rolloff 0.3",
    "selftest": "resolution-spectra selftest",
}

HELP = {
    "cf": "continued fraction and convergents of a number",
    "word": "T/J word, matrix and lattice point of a rational",
    "tree": "Farey tree (or resolution tree with --a) as JSON or DOT",
    "resolve": "apply r_a, follow orbits, classify, or tabulate e_a on [lo, hi]",
    "zone": "locking zone [nu-, nu+] of p/q",
    "basin": "basin of attraction of p/q with surd edges",
    "spectrum": "predicted locking spectrum for f1 / fc",
    "jumps": "beat frequencies along [prefix..., a]",
    "brjuno": "partial Brjuno sum",
    "stability": "stability exponents tau_i and factors gamma_i",
    "simulate": "mixer/low-pass simulation sweep",
    "selftest": "run the cross-module oracle checks",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "dot", "text"], default=None,
                        help="output format (default depends on the subcommand)")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: $RESOLUTION_SPECTRA_THREADS or 1)")
    common.add_argument("--word-form", action="store_true", help="print continued fractions in word form")

    parser = argparse.ArgumentParser(
        prog="resolution-spectra",
        description="Exact continued fractions, resolution maps and detector spectra.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, *opts):
        p = sub.add_parser(name, parents=[common], help=HELP[name], description=HELP[name],
                           epilog="example:\n  " + EXAMPLES[name],
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(func=func, _parser=p)
        for flags, kw in opts:
            p.add_argument(*flags, **kw)
        return p

    x = (("--x",), dict(type=_number, help="number: p/q, decimal, inf, [a0,...] or [pre;(period)]"))
    a = (("--a",), dict(type=_positive_int, help="resolution bound a >= 2"))
    pq = (("--pq",), dict(type=_rational, help="center p/q"))
    depth = (("--depth",), dict(type=_positive_int, help="number of quotients to use"))
    f0 = (("--f0",), dict(type=_rational, help="frequency f0 in Hz (exact)"))
    f1 = (("--f1",), dict(type=_rational, help="frequency f1 in Hz (exact)"))
    fc = (("--fc",), dict(type=_rational, help="low-pass cutoff in Hz (exact)"))
    n_max = (("--n-max",), dict(type=int, help="continued-fraction depth bound"))
    lo = (("--lo",), dict(type=_rational, help="lower end of the range"))
    hi = (("--hi",), dict(type=_rational, help="upper end of the range"))

    add("cf", cmd_cf, x, depth)
    add("word", cmd_word, x, (("--word",), dict(type=_word, help='word such as "T J^2 T"')))
    add("tree", cmd_tree, a,
        (("--q-limit",), dict(type=_positive_int, default=8, help="largest denominator")),
        (("--max-value",), dict(type=_positive_int, help="largest node value (default 2, or a)")))
    add("resolve", cmd_resolve, x, a, depth, lo, hi,
        (("--orbit",), dict(action="store_true", help="iterate r_a to a fixed point")),
        (("--classify",), dict(action="store_true", help="report the structure class")),
        (("--max-steps",), dict(type=_positive_int, default=64, help="orbit length cap")),
        (("--samples",), dict(type=_positive_int, default=200, help="grid size for --lo/--hi")))
    add("zone", cmd_zone, pq, a, f1, fc, n_max)
    add("basin", cmd_basin, pq, a)
    add("spectrum", cmd_spectrum, f1, fc, n_max, lo, hi)
    add("jumps", cmd_jumps, f0, f1,
        (("--prefix",), dict(type=_int_list, help="quotient prefix, e.g. 0,1,1,2")),
        (("--a-from",), dict(type=int, help="first a")),
        (("--a-to",), dict(type=int, help="last a (inclusive)")))
    add("brjuno", cmd_brjuno, x, depth,
        (("--tol",), dict(type=float, default=1e-9, help="convergence threshold on the last term")))
    add("stability", cmd_stability, x, depth)
    add("simulate", cmd_simulate, f1, fc,
        (("--config",), dict(help="TOML file with f1, fc, window, sample_rate and a [model] table")),
        (("--f0-lo",), dict(type=_rational, help="sweep start (Hz)")),
        (("--f0-hi",), dict(type=_rational, help="sweep end (Hz)")),
        (("--steps",), dict(type=_positive_int, help="grid points (default 201)")),
        (("--model",), dict(choices=["ideal", "intermodulating"], default="intermodulating")),
        (("--order-limit",), dict(type=_positive_int, default=5)),
        (("--rolloff",), dict(type=float, default=0.3)),
        (("--window",), dict(type=float, default=100.0, help="counting window in seconds")),
        (("--sample-rate",), dict(type=float, help="synthesis rate in Hz")))
    add("selftest", cmd_selftest)
    return parser


def _fail(exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.threads = resolve_threads(args.threads)
    except ValueError as exc:
        parser.error(str(exc))
    if args.command == "resolve" and args.a is not None and args.a < 2:
        args._parser.error("--a must be >= 2")
    try:
        args.func(args)
    except (ValueError, ZeroDivisionError, ArithmeticError) as exc:
        return _fail(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
