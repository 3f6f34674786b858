"""Command-line front end.

Verbs: solve, integrate, gen-worst, sample, simulate, check-sdd, verify.
Exit codes: 0 success, 2 bad input, 3 falsified invariant (the witness
instance is dumped as JSON so the failure is reproducible).
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import asdict

from . import __version__
from .formats import (dump_json, dump_text, envelope, instance_payload,
                      load_instance, report_csv, report_payload, summary_csv,
                      summary_payload)
from .integration import ExtendedHousingMarket, integrate
from .market import (InstanceTooLargeError, MarketValidationError,
                     ttc_solve)
from .random_markets import SimulationConfig, run_simulation, sample_ehm
from .sdd import sample_sdd_profile, sdd_diagnostic, verify_sdd_bound
from .verify import (run_bound_suite, run_core_suite, run_lemma_suite,
                     run_rsd_suite, run_sdd_suite, run_strategyproof_suite)
from .worst_case import WorstCaseSpec, build_worst_case

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VIOLATION = 3


def _sizes(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sizes list: {text!r}")
    if not sizes or any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="FILE", default=None,
                        help="write the JSON/CSV result here (default stdout)")
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for simulation")
    common.add_argument("--quiet", action="store_true",
                        help="suppress the status line")

    p = argparse.ArgumentParser(
        prog="sslab",
        description="Housing-market integration toolkit: trading-cycle solver, "
                    "welfare analysis, and verification suites.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", parents=[common],
                        help="core allocation of one market")
    sp.add_argument("--input", required=True, metavar="FILE")
    sp.add_argument("--trace", action="store_true",
                    help="include the trading cycles per round")

    ip = sub.add_parser("integrate", parents=[common],
                        help="segregated vs integrated solve with gain report")
    ip.add_argument("--input", required=True, metavar="FILE")
    ip.add_argument("--report", choices=("json", "csv"), default="json")

    gw = sub.add_parser("gen-worst", parents=[common],
                        help="instance achieving both worst-case bounds")
    gw.add_argument("--n", type=int, required=True)
    gw.add_argument("--k", type=int, required=True)
    gw.add_argument("--sizes", type=_sizes, default=None)

    sa = sub.add_parser("sample", parents=[common],
                        help="draw a random partitioned market")
    sa.add_argument("--sizes", type=_sizes, required=True)
    sa.add_argument("--sdd", action="store_true",
                    help="sample from the staircase (dual-dictator) domain")

    si = sub.add_parser("simulate", parents=[common],
                        help="Monte-Carlo integration statistics")
    si.add_argument("--sizes", type=_sizes, required=True)
    si.add_argument("--trials", type=int, required=True)
    si.add_argument("--report", choices=("json", "csv"), default="json")

    cs = sub.add_parser("check-sdd", parents=[common],
                        help="staircase diagnostic plus the half-harm bound")
    cs.add_argument("--input", required=True, metavar="FILE")

    ve = sub.add_parser("verify", parents=[common],
                        help="run a verification suite")
    ve.add_argument("--suite", required=True,
                    choices=("lemmas", "bounds", "core", "rsd", "sdd",
                             "strategyproof"))
    ve.add_argument("--max-n", type=int, default=None,
                    help="largest market size for the lemmas/rsd suites "
                         "(defaults 4 and 5)")
    return p


def _status(args, text: str) -> None:
    if not args.quiet and args.out not in (None, "-"):
        print(text)


def cmd_solve(args) -> int:
    thing = load_instance(args.input)
    market = thing.market if isinstance(thing, ExtendedHousingMarket) else thing
    alloc, trace = ttc_solve(market)
    payload: dict = {"allocation": alloc.as_dict()}
    if args.trace:
        payload["trace"] = {
            "iterations": [[list(c) for c in rnd] for rnd in trace.iterations],
            "num_cycles": trace.num_cycles,
            "num_iterations": trace.num_iterations,
        }
    dump_json(envelope(payload, args.argv, version=__version__), args.out)
    _status(args, f"solved {market.n} agents in {trace.num_iterations} rounds")
    return EXIT_OK


def cmd_integrate(args) -> int:
    thing = load_instance(args.input)
    if not isinstance(thing, ExtendedHousingMarket):
        raise MarketValidationError(
            f"{args.input}: integrate needs a \"communities\" field")
    report = integrate(thing)
    if args.report == "csv":
        dump_text(report_csv(report), args.out)
    else:
        dump_json(envelope(report_payload(report), args.argv,
                           version=__version__), args.out)
    _status(args, f"total gain {report.total_gain} over {report.n} agents "
                  f"({len(report.harmed)} harmed)")
    return EXIT_OK


def cmd_gen_worst(args) -> int:
    spec = WorstCaseSpec(args.n, args.k,
                         tuple(args.sizes) if args.sizes else None)
    ehm = build_worst_case(spec)
    dump_json(instance_payload(ehm), args.out)
    _status(args, f"wrote worst-case instance n={args.n} k={args.k}")
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.sdd:
        ehm = sample_sdd_profile(args.sizes, args.seed)
    else:
        ehm = sample_ehm(args.sizes, args.seed)
    dump_json(instance_payload(ehm), args.out)
    _status(args, f"sampled n={sum(args.sizes)} agents (seed {args.seed})")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = SimulationConfig(sizes=args.sizes, trials=args.trials,
                              seed=args.seed, threads=args.threads)
    summary = run_simulation(config)
    if args.report == "csv":
        dump_text(summary_csv(summary), args.out)
    else:
        dump_json(envelope(summary_payload(summary), args.argv,
                           seed=args.seed, version=__version__), args.out)
    _status(args, f"{summary.trials} trials, harmed fraction "
                  f"{summary.frac_harmed.mean:.4f}")
    return EXIT_OK


def cmd_check_sdd(args) -> int:
    thing = load_instance(args.input)
    if not isinstance(thing, ExtendedHousingMarket):
        raise MarketValidationError(
            f"{args.input}: check-sdd needs a \"communities\" field")
    diag = sdd_diagnostic(thing)
    payload: dict = {"satisfied": diag.satisfied}
    if diag.first_violation is not None:
        j, r, q = diag.first_violation
        payload["first_violation"] = {"community": j, "rank": r,
                                      "placed_agents": list(q)}
    code = EXIT_OK
    if diag.satisfied:
        bound = verify_sdd_bound(thing)
        payload["bound"] = {
            "ok": bound.ok,
            "harmed": list(bound.harmed),
            "sizes": list(bound.sizes),
            "half_margins": list(bound.half_margins),
            "cycles": list(bound.cycles),
            "max_cycle_length": bound.max_cycle_length,
            "cycle_length_histogram": {str(k): v for k, v in
                                       bound.cycle_length_histogram.items()},
        }
        if not bound.ok:
            payload["witness"] = instance_payload(thing)
            code = EXIT_VIOLATION
    dump_json(envelope(payload, args.argv, version=__version__), args.out)
    _status(args, "staircase property: "
                  + ("satisfied" if diag.satisfied else "violated"))
    return code


def cmd_verify(args) -> int:
    suites = {
        "lemmas": lambda: run_lemma_suite(max_n=args.max_n or 4),
        "bounds": lambda: run_bound_suite(seed=args.seed),
        "core": lambda: run_core_suite(seed=args.seed),
        "rsd": lambda: run_rsd_suite(seed=args.seed, max_n=args.max_n or 5),
        "sdd": lambda: run_sdd_suite(seed=args.seed),
        "strategyproof": lambda: run_strategyproof_suite(seed=args.seed),
    }
    result = suites[args.suite]()
    dump_json(asdict(result), args.out)
    _status(args, f"suite {result.name}: "
                  f"{'pass' if result.passed else 'FAIL'} "
                  f"({result.instances} instances)")
    return EXIT_OK if result.passed else EXIT_VIOLATION


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = list(argv) if argv is not None else sys.argv[1:]
    handlers = {
        "solve": cmd_solve,
        "integrate": cmd_integrate,
        "gen-worst": cmd_gen_worst,
        "sample": cmd_sample,
        "simulate": cmd_simulate,
        "check-sdd": cmd_check_sdd,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (MarketValidationError, InstanceTooLargeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
