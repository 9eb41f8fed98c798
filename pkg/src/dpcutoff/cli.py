"""Command line interface.

Exit codes: 0 success, 2 invalid input (config, data or parameters),
3 file system errors.
"""

import argparse
import dataclasses
import math
import os
import sys
from pathlib import Path

from .discrepancy import DpConfig, FixedM, Heuristic, NormBound, cutoff_estimate, modified_discrepancy
from .experiments import run_experiment, summarize
from .persistence import (
    ConfigError,
    load_config,
    read_spectral_data,
    write_coefficients,
    write_records,
    write_summary,
)
from .sequence_model import Observation
from .theory import (
    RateSpec,
    apriori_k_exp,
    apriori_k_poly,
    m_opt_exp,
    rate_constant_poly,
    rate_exp,
    rate_poly,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3

OUT_ENV = "DPCUTOFF_OUT"


def _out_dir(args):
    out = args.out or os.environ.get(OUT_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _policy(args):
    if args.fixed_m is not None:
        return FixedM(args.fixed_m)
    if args.norm_bound is not None:
        return NormBound(args.norm_bound)
    return Heuristic()


def _g(x):
    return format(x, ".17g")


def cmd_simulate(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, root_seed=args.seed)
    records = run_experiment(cfg)
    out = _out_dir(args)
    write_records(records, out / "records.csv")
    write_summary(summarize(records, cfg), out / "summary.json")
    print(f"records={out / 'records.csv'}")
    print(f"summary={out / 'summary.json'}")
    print(f"rows={len(records)}")
    return EXIT_OK


def _estimate_common(args):
    spectrum, y = read_spectral_data(args.data)
    obs = Observation(y, args.delta)
    res = modified_discrepancy(obs, DpConfig(args.tau, _policy(args)), spectrum)
    return spectrum, obs, res


def cmd_estimate(args):
    spectrum, obs, res = _estimate_common(args)
    est = cutoff_estimate(obs, spectrum, res.k_dp)
    out = _out_dir(args)
    write_coefficients(est, out / "estimate.txt")
    res.save_trace(out / "trace.txt")
    print(f"k_dp={res.k_dp}")
    print(f"argmax_m={res.argmax_m}")
    print(f"m_searched={res.m_searched}")
    print("estimate=" + " ".join(_g(float(v)) for v in est))
    return EXIT_OK


def cmd_trace(args):
    _, _, res = _estimate_common(args)
    if args.out or os.environ.get(OUT_ENV):
        res.save_trace(_out_dir(args) / "trace.txt")
    print("m k")
    for m, k in res.trace:
        print(f"{m} {k}")
    return EXIT_OK


def cmd_theory(args):
    if args.family == "poly":
        spec = RateSpec.poly(args.nu, args.q, args.rho, args.delta)
        print(f"rate={_g(rate_poly(spec))}")
        print(f"k_apriori={apriori_k_poly(spec)}")
        if args.tau is not None:
            print(f"L={_g(rate_constant_poly(args.tau, args.nu, args.q))}")
    else:
        spec = RateSpec.exp(args.p, args.a, args.rho, args.delta)
        print(f"rate={_g(rate_exp(spec))}")
        m = m_opt_exp(args.delta, args.rho, args.p, args.a)
        print(f"m_opt={_g(m)}")
        print(f"m_opt_level={math.ceil(m)}")
        print(f"k_apriori={apriori_k_exp(spec)}")
    return EXIT_OK


def _add_policy(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--fixed-m", type=int, metavar="M", help="search levels m <= M")
    g.add_argument("--norm-bound", type=float, metavar="R",
                   help="search up to sqrt(m) delta <= sigma_m R")
    g.add_argument("--heuristic", action="store_true",
                   help="grow m until k(m)/m is small (default)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dpcutoff",
        description="Spectral cut-off with a discretised discrepancy principle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--seed", type=int, help="override the config root_seed")
    p.set_defaults(func=cmd_simulate)

    for name, func, helptext in (
        ("estimate", cmd_estimate, "estimate from rows 'j sigma_j y_j'"),
        ("trace", cmd_trace, "print the k(m) curve only"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--data", required=True)
        p.add_argument("--delta", type=float, required=True)
        p.add_argument("--tau", type=float, default=1.5)
        p.add_argument("--out")
        _add_policy(p)
        p.set_defaults(func=func)

    p = sub.add_parser("theory", help="closed-form rates and truncation levels")
    fam = p.add_subparsers(dest="family", required=True)
    pp = fam.add_parser("poly")
    pp.add_argument("--nu", type=float, required=True)
    pp.add_argument("--q", type=float, required=True)
    pp.add_argument("--rho", type=float, default=1.0)
    pp.add_argument("--delta", type=float, required=True)
    pp.add_argument("--tau", type=float)
    pe = fam.add_parser("exp")
    pe.add_argument("--p", type=float, required=True)
    pe.add_argument("--a", type=float, required=True)
    pe.add_argument("--rho", type=float, default=1.0)
    pe.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=cmd_theory)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError, IndexError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
