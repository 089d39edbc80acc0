"""Command-line front end.

Subcommands: ``screen``, ``simulate``, ``bench`` and ``check-efficiency``.
Exit codes are 0 on success, 1 for usage errors, 2 for bad input data
and 3 for numerical failures.  ``--threads 0`` uses every CPU; when the
flag is absent the ``BOLTSSI_THREADS`` environment variable is read.
"""

import argparse
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .efficiency import efficiency_report
from .exceptions import DataError, NumericError, ScreeningError
from .ingest import load_delimited
from .screen import STATUS_REASON, Method, ScreenConfig, parse_ksa_gamma, parse_rule, screen
from .simgen import EXAMPLES, SimDesign, run_simulation

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "BOLTSSI_THREADS"

HEADER = ("rank", "var_i", "var_j", "score", "statistic", "df", "selected", "prune_reason")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return f"{v:.6g}"


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise _UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


class _UsageError(Exception):
    pass


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return v


def _pos_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _add_screen_options(p):
    p.add_argument("--method", default="bolt", choices=[m.value for m in Method])
    p.add_argument("--arity", type=_pos_int, default=3, help="levels per covariate (bolt methods)")
    p.add_argument("--select", default="topd:auto",
                   help="topd:<d|auto|max|nlogn>, threshold:<gamma> or bonferroni:<alpha>")
    p.add_argument("--ksa-gamma", default=None,
                   help="KSA pruning threshold on the deviance scale, or bonferroni:<alpha>")
    p.add_argument("--threads", type=_nonneg_int, default=None, help="0 = all CPUs")
    p.add_argument("--pseudo-count", type=float, default=0.0)


def _config(args):
    try:
        return ScreenConfig(
            method=args.method,
            selection=parse_rule(args.select),
            ksa_gamma=parse_ksa_gamma(args.ksa_gamma) if args.ksa_gamma is not None else None,
            arity=args.arity,
            threads=_threads(args),
            pseudo_count=args.pseudo_count,
            debug_rescore_pruned=getattr(args, "debug_rescore", False),
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _records(res, full):
    names = res.column_names or tuple(f"X{k + 1}" for k in range(res.p))
    sel = res.selected
    idx = list(res.order) if full else [t for t in res.order if sel[t]]
    rows = []
    for r, t in enumerate(idx):
        rows.append((r + 1, names[res.i[t]], names[res.j[t]], float(res.score[t]),
                     float(res.statistic[t]), int(res.df[t]), bool(sel[t]),
                     STATUS_REASON[int(res.status[t])]))
    if full:
        rest = np.flatnonzero(res.status != 0)
        for t in rest:
            rows.append((None, names[res.i[t]], names[res.j[t]], float(res.score[t]),
                         float(res.statistic[t]), int(res.df[t]), False,
                         STATUS_REASON[int(res.status[t])]))
    return rows


def _write_records(rows, out, as_json):
    if as_json:
        recs = []
        for row in rows:
            rec = dict(zip(HEADER, row))
            for k in ("score", "statistic"):
                if math.isnan(rec[k]):
                    rec[k] = None
            recs.append(rec)
        json.dump(recs, out, indent=1)
        out.write("\n")
        return
    out.write(",".join(HEADER) + "\n")
    for rank, a, b, score, stat, df, sel, reason in rows:
        out.write(f"{'' if rank is None else rank},{a},{b},{_fmt(score)},{_fmt(stat)},{df},"
                  f"{int(sel)},{reason}\n")


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def cmd_screen(args):
    cfg = _config(args)
    ds = load_delimited(args.input, args.response, family=args.family, delimiter=args.delimiter,
                        standardize=args.standardize)
    res = screen(ds, cfg)
    out, close = _open_out(args.output)
    try:
        _write_records(_records(res, args.full), out, args.json)
    finally:
        if close:
            out.close()
    print(f"pairs={res.n_pairs} evaluated={res.n_evaluated} pruned={res.n_pruned_by_ksa} "
          f"skipped={res.n_skipped} selected={res.n_selected} wall_time={res.wall_time:.3f}s",
          file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args):
    cfg = _config(args)
    kw = dict(n=args.n, p=args.p, rho=args.rho, seed=args.seed)
    if args.sigma is not None:
        kw["sigma"] = args.sigma
    if args.beta_inter is not None:
        kw["beta_inter"] = args.beta_inter
    try:
        design = SimDesign.from_example(args.example, **kw)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    metrics, per_rep = run_simulation(design, cfg, args.reps, workers=args.workers)
    out, close = _open_out(args.output)
    try:
        out.write("rep,coverage,model_size\n")
        for k, r in enumerate(per_rep):
            out.write(f"{k + 1},{r.coverage:.6g},{r.model_size}\n")
        out.write(f"mean,{metrics.acr:.6g},{metrics.ams:.6g}\n")
        out.write(f"se,{metrics.se['acr']:.6g},{metrics.se['ams']:.6g}\n")
    finally:
        if close:
            out.close()
    total = sum(r.wall_time for r in per_rep)
    print(f"example={args.example} method={cfg.method.value} reps={metrics.reps} "
          f"ACR={metrics.acr:.4f} AMS={metrics.ams:.1f} screen_time={total:.3f}s", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args):
    from .simgen import ar1_covariates
    from .ingest import Dataset

    rng = np.random.default_rng(args.seed)
    x = ar1_covariates(args.n, args.p, args.rho, rng)
    y = x[:, 0] * x[:, 1] + rng.standard_normal(args.n)
    ds = Dataset(x, y, "gaussian")
    base_cfg = _config(args)
    # warm up the compiled kernels outside the timed region
    small = Dataset(x[:, :4], y, "gaussian")
    screen(small, base_cfg)
    print("threads,seconds,speedup")
    base = None
    for t in args.thread_list:
        cfg = ScreenConfig(**{**base_cfg.__dict__, "threads": t})
        best = math.inf
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            screen(ds, cfg)
            best = min(best, time.perf_counter() - t0)
        base = base or best
        print(f"{t},{best:.4f},{base / best:.3f}")
    return EXIT_OK


def cmd_check_efficiency(args):
    rep = efficiency_report(args.rhos, n=args.n, reps=args.reps, seed=args.seed,
                            estimator=args.estimator)
    print(",".join(rep.columns()))
    for row in rep.rows():
        print(",".join(f"{v:.6g}" for v in row))
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="boltssi", description="Pairwise interaction screening.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("screen", help="screen all pairs of a delimited data file")
    p.add_argument("--input", required=True)
    p.add_argument("--response", required=True, help="response column name or 0-based index")
    p.add_argument("--family", default="gaussian", choices=["gaussian", "binomial"])
    p.add_argument("--delimiter", default=",")
    p.add_argument("--standardize", action="store_true", help="z-score the covariates")
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--full", action="store_true", help="emit every pair, not only selected ones")
    p.add_argument("--json", action="store_true")
    p.add_argument("--debug-rescore", action="store_true",
                   help="also fit KSA-pruned pairs so the bound can be audited")
    _add_screen_options(p)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("simulate", help="run a simulation example")
    p.add_argument("--example", type=int, required=True, choices=sorted(EXAMPLES))
    p.add_argument("--n", type=_pos_int, default=500)
    p.add_argument("--p", type=_pos_int, default=500)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--beta-inter", type=float, default=None)
    p.add_argument("--reps", type=_pos_int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_pos_int, default=1, help="replications run concurrently")
    p.add_argument("--output", "-o", default=None)
    _add_screen_options(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="time the sweep at several thread counts")
    p.add_argument("--n", type=_pos_int, default=500)
    p.add_argument("--p", type=_pos_int, default=2000)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--thread-list", type=_pos_int, nargs="+", default=[1, 2, 4])
    p.add_argument("--repeat", type=_pos_int, default=1)
    _add_screen_options(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("check-efficiency", help="tabulate the discretization efficiency checks")
    p.add_argument("--rhos", type=float, nargs="+",
                   default=[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    p.add_argument("--n", type=_pos_int, default=500)
    p.add_argument("--reps", type=_pos_int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimator", choices=["kendall", "indicator"], default="kendall")
    p.set_defaults(func=cmd_check_efficiency)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"boltssi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"boltssi: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"boltssi: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ScreeningError as exc:
        print(f"boltssi: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
