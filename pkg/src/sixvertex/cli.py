"""Command-line interface. Every subcommand writes UTF-8 CSV with a header.

Exit codes: 0 success, 1 usage error, 2 failed precondition,
3 verification failure.
"""

import argparse
import csv
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import heights as H
from . import lattice
from .events import PreconditionError
from .exact import (ConvergenceError, EnumerationTooLarge, ExactMeasure, TransferOperator,
                    curvature_diagnostic)
from .checks import format_c

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_domain(text):
    """``rect:WxH``, ``box:n``, ``torus:N``, ``cylinder:NxM`` or a JSON
    vertex list ``[[x, y], ...]``."""
    kind, _, arg = text.partition(':')
    try:
        if kind == 'rect':
            w, h = arg.lower().split('x')
            return lattice.rectangle(int(w), int(h))
        if kind == 'box':
            return lattice.box(int(arg))
        if kind == 'torus':
            return lattice.torus(int(arg))
        if kind == 'cylinder':
            n, m = arg.lower().split('x')
            return lattice.cylinder(int(n), int(m))
        if text.lstrip().startswith('['):
            return lattice.plane_patch({tuple(v) for v in json.loads(text)})
    except (ValueError, json.JSONDecodeError) as e:
        raise UsageError(f"bad domain {text!r}: {e}")
    raise UsageError(f"unknown domain {text!r}")


def parse_bc(D, text):
    """``zero-one``, ``flat:m`` (values m, m+1) or a JSON file of x,y,h rows."""
    if D.kind == 'torus':
        return None
    faces = D.boundary_faces
    if text == 'zero-one':
        return H.zero_one(D)
    if text.startswith('flat:'):
        m = int(text[5:])
        base = m if m % 2 == 0 else m - 1
        return {f: base + int(D.parity[D.face_index(f)]) for f in faces}
    with open(text, encoding='utf-8') as fh:
        rows = json.load(fh)
    return {(int(r['x']), int(r['y'])): int(r['h']) for r in rows}


def c_value(text, exact):
    c = H.parse_c(text)
    if exact:
        if isinstance(c, float):
            raise UsageError(f"c={text} is not rational")
        return Fraction(c)
    return float(c)


def c_list(text, exact):
    return [c_value(t, exact) for t in text.split(',') if t.strip()]


def int_list(text):
    try:
        return [int(t) for t in text.split(',') if t.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}")


def write_csv(out, fields, rows):
    if out in (None, '-'):
        fh = sys.stdout
        close = False
    else:
        fh = open(out, 'w', encoding='utf-8', newline='')
        close = True
    try:
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction='ignore', lineterminator='\n')
        w.writeheader()
        for r in rows:
            w.writerow(r)
    finally:
        if close:
            fh.close()


def _num(x):
    if isinstance(x, np.floating):
        x = float(x)
    elif isinstance(x, np.integer):
        x = int(x)
    if isinstance(x, Fraction):
        return format_c(x)
    if isinstance(x, float) and math.isfinite(x):
        return repr(x)
    return x


# subcommands

def cmd_enumerate(args):
    D = parse_domain(args.domain)
    c = c_value(args.c, args.exact_rational)
    if D.kind == 'torus':
        mu = ExactMeasure.build(D, None, c, max_log2=args.max_log2)
    else:
        xi = parse_bc(D, args.bc)
        mu = ExactMeasure.build(D, xi, c, lo=args.lo, hi=args.hi, max_log2=args.max_log2)
    if args.what == 'summary':
        rows = [{"quantity": "count", "value": len(mu)},
                {"quantity": "Z", "value": _num(mu.Z)},
                {"quantity": "logZ", "value": _num(float(mu.log_Z))}]
        write_csv(args.out, ["quantity", "value"], rows)
    else:
        rows = []
        for f in D.faces:
            for v, p in sorted(mu.marginal(f).items()):
                rows.append({"x": f[0], "y": f[1], "value": v, "prob": _num(p)})
        write_csv(args.out, ["x", "y", "value", "prob"], rows)
    return EXIT_OK


def cmd_transfer(args):
    N, M = args.N, args.M
    if N % 2 or N < 2:
        raise PreconditionError("N must be even and >= 2")
    c = c_value(args.c, args.exact_rational)
    T = TransferOperator(N, c, exact=args.exact_rational)
    ks = range(N + 1) if args.k is None else int_list(args.k)
    rows = []
    for k in ks:
        Z = T.sector_Z(k, M)
        s = k - N // 2
        rows.append({"sector": s, "k": k, "alpha": _num(s / N),
                     "logZ": _num(math.log(Z) if not isinstance(Z, Fraction) else
                                  math.log(Z.numerator) - math.log(Z.denominator)),
                     "M": M, "Z": _num(Z)})
    fields = ["sector", "k", "alpha", "logZ", "M"] + (["Z"] if args.show_z else [])
    write_csv(args.out, fields, rows)
    return EXIT_OK


def cmd_free_energy(args):
    c = c_value(args.c, False)
    try:
        rows = curvature_diagnostic(c, args.N, args.kmax)
    except ValueError as e:
        raise PreconditionError(str(e))
    for r in rows:
        r["c"] = format_c(H.parse_c(args.c))
        if r["k"] == 0:
            r["g_over_alpha"] = r["g_over_alpha2"] = ""
    write_csv(args.out, ["N", "c", "alpha", "f_hat", "g", "g_over_alpha", "g_over_alpha2"],
              [{k: _num(v) for k, v in r.items()} for r in rows])
    return EXIT_OK


def cmd_sample(args):
    from .mcmc import run_chain, ChainState

    D = parse_domain(args.domain)
    c = c_value(args.c, False)
    xi = parse_bc(D, args.bc)
    if args.obs:
        obs = args.obs
    elif D.kind == 'torus':
        obs = ["inc2:0,0:1,0"]
    else:
        mid = D.faces[int(D.interior[len(D.interior) // 2])]
        obs = [f"h:{mid[0]},{mid[1]}", f"h2:{mid[0]},{mid[1]}"]
    rows = run_chain(D, c, obs, xi=xi, seed=args.seed, burnin=args.burnin,
                     sweeps=args.sweeps, thin=args.thin, batches=args.batches)
    write_csv(args.out, ["observable", "mean", "stderr", "batches", "sweeps", "seed"],
              [{k: _num(v) for k, v in r.items()} for r in rows])
    if args.dump_heights or args.dump_arrows:
        start = H.checkerboard(D) if D.kind == 'torus' else H.min_extension(D, xi)
        ch = ChainState(D, start, c, fixed=[] if xi is None else list(xi), seed=args.seed)
        ch.run(args.burnin + args.sweeps)
        if args.dump_heights:
            write_csv(args.dump_heights, ["x", "y", "h"], H.height_rows(D, ch.h))
        if args.dump_arrows:
            write_csv(args.dump_arrows, ["x", "y", "dir", "orient"],
                      H.arrow_rows(D, H.height_to_arrows(D, ch.h)))
    return EXIT_OK


def cmd_variance(args):
    from .experiments import variance_experiment, log_spaced

    N = args.torus
    d = log_spaced(N) if args.pairs == 'log-spaced' else int_list(args.pairs)
    if not d or N % 2 or max(d) > N // 2:
        raise PreconditionError("need an even torus and distances 1..N/2")
    rows, fit = variance_experiment(N, c_value(args.c, False), d, seed=args.seed,
                                    burnin=args.burnin, sweeps=args.sweeps,
                                    batches=args.batches, chains=args.chains,
                                    threads=args.threads)
    for r in rows:
        r["c"] = format_c(H.parse_c(args.c))
        r.update(fit_a=fit["a"], fit_b=fit["b"], fit_b_stderr=fit["b_stderr"], fit_r2=fit["r2"])
    write_csv(args.out, ["N", "c", "d", "V", "stderr", "mean_increment", "increment_stderr",
                         "fit_a", "fit_b", "fit_b_stderr", "fit_r2", "batches", "sweeps", "seed"],
              [{k: _num(v) for k, v in r.items()} for r in rows])
    return EXIT_OK


def cmd_circuits(args):
    from .experiments import circuit_experiment

    rows = circuit_experiment(int_list(args.n), args.k, c_value(args.c, False), seed=args.seed,
                              burnin=args.burnin, samples=args.samples, thin=args.thin,
                              batches=args.batches, chains=args.chains, threads=args.threads)
    for r in rows:
        r["c"] = format_c(H.parse_c(args.c))
    write_csv(args.out, ["n", "k", "c", "p_circuit", "stderr", "p_circuit_abs",
                         "p_circuit_abs_stderr", "p_blocked_abs", "batches", "sweeps", "seed"],
              [{k: _num(v) for k, v in r.items()} for r in rows])
    return EXIT_OK


def _check_csv(args, results):
    from .checks.battery import REPORT_FIELDS, report_rows

    write_csv(args.out, REPORT_FIELDS, report_rows(results))
    bad = [r for r in results if r.status == 'fail']
    for r in bad:
        print(f"FAIL {r.check} {r.instance_id} c={format_c(r.c)}: {r.witness}", file=sys.stderr)
    return EXIT_VERIFY if bad else EXIT_OK


def cmd_verify(args):
    from .checks.battery import run_verify

    cs = c_list(args.c, True) if args.exact_rational else c_list(args.c, False)
    if any(c < 1 for c in cs):
        raise PreconditionError("verification needs c >= 1; use --explore-c for c < 1")
    explore = c_list(args.explore_c, True) if args.explore_c else ()
    results = run_verify(args.max_faces, cs, seed=args.seed, explore_cs=explore)
    return _check_csv(args, results)


def cmd_loopmap(args):
    from .loops import map_T_suite

    if 2 * args.L > args.N:
        raise PreconditionError("need 2L <= N")
    results = []
    for c in c_list(args.c, args.exact_rational):
        results.extend(map_T_suite(args.N, args.M, args.L, c))
    return _check_csv(args, results)


def build_parser():
    def add_globals(q, suppress):
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        q.add_argument("--seed", type=int, default=d(0))
        q.add_argument("--out", default=d(None), help="output CSV path (default stdout)")
        q.add_argument("--config", default=d(None), help="JSON file of option defaults")
        q.add_argument("--threads", type=int, default=d(1))
        q.add_argument("--exact-rational", action="store_true", default=d(False),
                       help="rational arithmetic where supported")

    p = Parser(prog="sixvertex", description="Six-vertex height-function toolkit.")
    add_globals(p, False)
    # global flags are accepted after the subcommand too
    common = Parser(add_help=False)
    add_globals(common, True)
    sub = p.add_subparsers(dest="command", parser_class=Parser)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[common], **k)

    s = sub.add_parser("enumerate", help="exact enumeration on a small domain")
    s.add_argument("--domain", required=True)
    s.add_argument("--c", default="1")
    s.add_argument("--bc", default="zero-one")
    s.add_argument("--lo", type=int, default=None)
    s.add_argument("--hi", type=int, default=None)
    s.add_argument("--what", choices=["summary", "marginals"], default="summary")
    s.add_argument("--max-log2", type=int, default=24)
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("transfer", help="cylinder sector partition functions")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--c", default="1")
    s.add_argument("--k", default=None, help="comma list of up-arrow counts")
    s.add_argument("--show-z", action="store_true")
    s.set_defaults(func=cmd_transfer)

    s = sub.add_parser("free-energy", help="sector free energies and curvature")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--c", default="1")
    s.add_argument("--kmax", type=int, default=4)
    s.set_defaults(func=cmd_free_energy)

    s = sub.add_parser("sample", help="heat-bath chain with batch-means report")
    s.add_argument("--domain", required=True)
    s.add_argument("--c", default="1")
    s.add_argument("--bc", default="zero-one")
    s.add_argument("--obs", action="append")
    s.add_argument("--burnin", type=int, default=1000)
    s.add_argument("--sweeps", type=int, default=10000)
    s.add_argument("--thin", type=int, default=1)
    s.add_argument("--batches", type=int, default=40)
    s.add_argument("--dump-heights", default=None)
    s.add_argument("--dump-arrows", default=None)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("variance", help="increment variance on the torus")
    s.add_argument("--torus", type=int, required=True)
    s.add_argument("--c", default="1")
    s.add_argument("--pairs", default="log-spaced")
    s.add_argument("--burnin", type=int, default=5000)
    s.add_argument("--sweeps", type=int, default=20000)
    s.add_argument("--batches", type=int, default=40)
    s.add_argument("--chains", type=int, default=1)
    s.set_defaults(func=cmd_variance)

    s = sub.add_parser("circuits", help="annulus circuit probabilities")
    s.add_argument("--n", default="8,16,32")
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--c", default="2")
    s.add_argument("--burnin", type=int, default=5000)
    s.add_argument("--samples", type=int, default=2000)
    s.add_argument("--thin", type=int, default=10)
    s.add_argument("--batches", type=int, default=40)
    s.add_argument("--chains", type=int, default=1)
    s.set_defaults(func=cmd_circuits)

    s = sub.add_parser("verify", help="exact structural checks")
    s.add_argument("--max-faces", type=int, default=8)
    s.add_argument("--c", default="1,3/2,2,3")
    s.add_argument("--explore-c", default="")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("loopmap", help="exhaustive loop-reversal map checks")
    s.add_argument("--N", type=int, default=4)
    s.add_argument("--M", type=int, default=3)
    s.add_argument("--L", type=int, default=1)
    s.add_argument("--c", default="1,2,3")
    s.set_defaults(func=cmd_loopmap)
    return p


def _apply_config(parser, argv, path):
    """Fill options from a JSON object; explicit command-line flags win."""
    try:
        with open(path, encoding='utf-8') as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}")
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    ns = vars(parser.parse_args(argv))
    for k, v in cfg.items():
        key = k.replace('-', '_')
        if key not in ns or key in ('func', 'command', 'config'):
            raise UsageError(f"unknown config key {k!r}")
        flag = '--' + key.replace('_', '-')
        if not any(a == flag or a.startswith(flag + '=') for a in argv):
            ns[key] = v
    return argparse.Namespace(**ns)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(parser, argv, args.config)
        if not getattr(args, "command", None):
            raise UsageError("missing subcommand")
        env = os.environ.get("SIXV_THREADS")
        if env:
            try:
                args.threads = int(env)
            except ValueError:
                raise UsageError(f"SIXV_THREADS must be an integer, got {env!r}")
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (PreconditionError, H.HeightError, lattice.DomainError, EnumerationTooLarge,
            ConvergenceError) as e:
        print(f"precondition failed: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
