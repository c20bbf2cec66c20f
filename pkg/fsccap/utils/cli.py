"""Provide cli for fsccap."""

import argparse
import json
import sys
from argparse import ArgumentDefaultsHelpFormatter
from typing import List, Optional

import pandas as pd

from fsccap.bounds.bounds import BoundCache, capacity_to_precision, sandwich
from fsccap.channel.families import FAMILIES, build_family
from fsccap.channel.fsc import FscParams, format_rational, load_channel
from fsccap.experiments import demos
from fsccap.indecomp.indecomposability import indecomposable_test
from fsccap.info.interval import format_lower, format_upper
from fsccap.utils import config_helper, custom_logger
from fsccap.utils.exceptions import BudgetError, FscError

logger = custom_logger.setup_logging(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_PARTIAL = 2

COMMANDS = ["bounds", "capacity", "indecomp", "demo-gap", "demo-discontinuity"]


def _parse_stage_range(input_str):
    """
    Parse a stage range.

    Parameters
    ----------
    input_str : str
        a single stage "2" or an inclusive range "0..2"

    Returns
    -------
    stages : list
        list of stages

    """
    try:
        if ".." in input_str:
            start, stop = (int(part) for part in input_str.split(".."))
        else:
            start = stop = int(input_str)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"'{input_str}' is not a stage range") from err
    if start < 0 or stop < start:
        raise argparse.ArgumentTypeError(f"'{input_str}' is an empty stage range")
    return list(range(start, stop + 1))


def _parse_list(input_str):
    """Parse a comma separated list."""
    items = [item.strip() for item in input_str.split(",") if item.strip()]
    if not items:
        raise argparse.ArgumentTypeError(f"'{input_str}' is an empty list")
    return items


def _add_common_arguments(parser):
    parser.add_argument(
        "-o",
        "--output",
        type=str,
        default=None,
        help="The file to write to, stdout when omitted",
    )
    parser.add_argument(
        "-f",
        "--format",
        type=str,
        choices=["csv", "json"],
        default="csv",
        help="The output format",
    )
    parser.add_argument(
        "-t",
        "--threads",
        type=int,
        default=None,
        help="Worker threads, defaults to the config value",
    )
    parser.add_argument(
        "--tol",
        type=float,
        default=None,
        help="Optimizer tolerance in bits, defaults to the config value",
    )
    parser.add_argument(
        "--precision-bits",
        type=int,
        default=None,
        help="Working precision of the interval enclosures",
    )
    parser.add_argument(
        "--config",
        type=str,
        default=None,
        help="An alternate YAML config for numerics and experiment presets",
    )
    parser.add_argument(
        "--log-level",
        type=str,
        choices=custom_logger.LEVELS,
        default=None,
        help="The log level of the package loggers",
    )


def _add_channel_arguments(parser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument(
        "-c",
        "--channel",
        type=str,
        default=None,
        help="A channel JSON file",
    )
    source.add_argument(
        "--family",
        type=str,
        choices=FAMILIES,
        default=None,
        help="A named channel family",
    )
    parser.add_argument(
        "--eps", type=str, default=None, help="Crossover probability as 'a/b'"
    )
    parser.add_argument(
        "--lambda",
        dest="lam",
        type=str,
        default=None,
        help="Switching probability of p-qlambda as 'a/b'",
    )
    parser.add_argument("--k", type=int, default=None, help="The k of p-qk")
    parser.add_argument("--nx", type=int, default=2, help="Input alphabet size")
    parser.add_argument("--ny", type=int, default=2, help="Output alphabet size")
    parser.add_argument("--ns", type=int, default=2, help="State count")


def _create_argparser():
    description = """Certified capacity bounds of finite state channels."""
    _parser = argparse.ArgumentParser(
        prog="fsccap",
        description=description,
        formatter_class=ArgumentDefaultsHelpFormatter,
    )

    # creating subparsers for separate commands
    _subparsers = _parser.add_subparsers(dest="command", help="command to choose")

    # subparser: bounds
    _bounds_parser = _subparsers.add_parser(
        "bounds",
        help="sandwich bounds per stage",
        formatter_class=ArgumentDefaultsHelpFormatter,
    )
    _add_channel_arguments(_bounds_parser)
    _bounds_parser.add_argument(
        "-M",
        "--M",
        dest="M",
        type=_parse_stage_range,
        default=[0],
        help="The stages as 'M' or an inclusive range 'M0..M1'",
    )
    _add_common_arguments(_bounds_parser)

    # subparser: capacity
    _capacity_parser = _subparsers.add_parser(
        "capacity",
        help="bracket the capacity to N bits",
        formatter_class=ArgumentDefaultsHelpFormatter,
    )
    _add_channel_arguments(_capacity_parser)
    _capacity_parser.add_argument(
        "-N", "--N", dest="N", type=int, default=1, help="Target bits"
    )
    _capacity_parser.add_argument(
        "--budget-M",
        dest="budget_M",
        type=int,
        default=None,
        help="The largest stage, defaults to the config value",
    )
    _add_common_arguments(_capacity_parser)

    # subparser: indecomp
    _indecomp_parser = _subparsers.add_parser(
        "indecomp",
        help="indecomposability gap profile",
        formatter_class=ArgumentDefaultsHelpFormatter,
    )
    _add_channel_arguments(_indecomp_parser)
    _indecomp_parser.add_argument(
        "-n", "--n", dest="n", type=int, default=4, help="The largest blocklength"
    )
    _indecomp_parser.add_argument(
        "--threshold",
        type=str,
        default="0",
        help="The tolerance the worst gap is tested against as 'a/b'",
    )
    _indecomp_parser.add_argument(
        "--kernel",
        type=str,
        choices=["transition", "marginal"],
        default="transition",
        help="How the state kernel is computed",
    )
    _add_common_arguments(_indecomp_parser)

    # subparser: demo-gap
    _gap_parser = _subparsers.add_parser(
        "demo-gap",
        help="brackets of p-qlambda as lambda goes to 0",
        formatter_class=ArgumentDefaultsHelpFormatter,
    )
    _gap_parser.add_argument("--eps", type=str, default=None, help="Crossover 'a/b'")
    _gap_parser.add_argument(
        "--lambdas", type=_parse_list, default=None, help="Comma separated lambdas"
    )
    _gap_parser.add_argument("-M", "--M", dest="M", type=int, default=None)
    _gap_parser.add_argument("-n", "--n", dest="n", type=int, default=None)
    _add_common_arguments(_gap_parser)

    # subparser: demo-discontinuity
    _disc_parser = _subparsers.add_parser(
        "demo-discontinuity",
        help="brackets of p-qk as q_k approaches q_hat",
        formatter_class=ArgumentDefaultsHelpFormatter,
    )
    _disc_parser.add_argument("--eps", type=str, default=None, help="Crossover 'a/b'")
    _disc_parser.add_argument(
        "--ks", type=_parse_list, default=None, help="Comma separated k values"
    )
    _disc_parser.add_argument("-M", "--M", dest="M", type=int, default=None)
    _disc_parser.add_argument("-n", "--n", dest="n", type=int, default=None)
    _add_common_arguments(_disc_parser)

    return _parser


parser = _create_argparser()


def _channel(args) -> FscParams:
    if args.channel:
        return load_channel(args.channel)
    return build_family(
        args.family,
        eps=args.eps,
        lam=args.lam,
        k=args.k,
        nx=args.nx,
        ny=args.ny,
        ns=args.ns,
    )


def _settings(args) -> dict:
    """Collect the numeric flags, None falls back to the loaded settings."""
    return {
        "tol": args.tol,
        "precision": args.precision_bits,
        "threads": args.threads,
    }


def _preset(args, name: str) -> dict:
    path = args.config if args.config else config_helper.config_file
    return config_helper.get_config_options(path, "experiments", name)


def _emit(args, frame: pd.DataFrame, record=None) -> None:
    """Write a table as csv or a record as json."""
    if args.format == "json":
        text = json.dumps(
            record if record is not None else frame.to_dict(orient="records"),
            indent=2,
        )
        text += "\n"
    else:
        text = frame.to_csv(index=False, lineterminator="\n")
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logger.info(f"wrote {args.command} output to {args.output}")
    else:
        sys.stdout.write(text)


def run_bounds(args) -> int:
    """Emit one sandwich report per stage."""
    fsc = _channel(args)
    settings = _settings(args)
    cache = BoundCache()
    reports, status = [], EXIT_OK
    for M in args.M:
        try:
            reports.append(sandwich(fsc, M, cache=cache, **settings))
        except BudgetError as err:
            logger.warning(f"stopped before stage {M}: {err}")
            status = EXIT_PARTIAL
            break
    _emit(
        args,
        demos.reports_frame(reports),
        record=[report.to_dict() for report in reports],
    )
    return status


def run_capacity(args) -> int:
    """Emit the bracket of the precision loop."""
    fsc = _channel(args)
    settings = _settings(args)
    result = capacity_to_precision(
        fsc, args.N, budget_M=args.budget_M, cache=BoundCache(), **settings
    )
    row = {
        "status": result.status,
        "interval_lo": format_lower(result.interval.lo) if result.interval else "",
        "interval_hi": format_upper(result.interval.hi) if result.interval else "",
        "stages": result.stages,
        "reason": result.reason,
    }
    _emit(args, pd.DataFrame([row]), record=result.to_dict())
    return EXIT_OK if result.status == "converged" else EXIT_PARTIAL


def run_indecomp(args) -> int:
    """Emit the worst gap for every blocklength up to n."""
    fsc = _channel(args)
    reports = [
        indecomposable_test(fsc, n, args.threshold, kernel=args.kernel)
        for n in range(1, args.n + 1)
    ]
    rows = [
        {
            "n": report.n,
            "worst_gap": format_rational(report.worst_gap),
            "pass": report.passed,
            "input_independent": report.input_independent,
        }
        for report in reports
    ]
    _emit(args, pd.DataFrame(rows), record=[report.to_dict() for report in reports])
    return EXIT_OK


def run_demo_gap(args) -> int:
    """Emit the lambda table."""
    preset = _preset(args, "demo-gap")
    table = demos.gap_table(
        eps=args.eps or preset.get("eps"),
        lambdas=args.lambdas or preset.get("lambdas"),
        M=args.M if args.M is not None else int(preset.get("m")),
        n=args.n if args.n is not None else int(preset.get("n")),
        cache=BoundCache(),
        **_settings(args),
    )
    _emit(args, table)
    return EXIT_OK


def run_demo_discontinuity(args) -> int:
    """Emit the k table."""
    preset = _preset(args, "demo-discontinuity")
    ks = args.ks or preset.get("ks")
    table = demos.discontinuity_table(
        eps=args.eps or preset.get("eps"),
        ks=[int(k) for k in ks],
        M=args.M if args.M is not None else int(preset.get("m")),
        n=args.n if args.n is not None else int(preset.get("n")),
        cache=BoundCache(),
        **_settings(args),
    )
    _emit(args, table)
    return EXIT_OK


RUNNERS = {
    "bounds": run_bounds,
    "capacity": run_capacity,
    "indecomp": run_indecomp,
    "demo-gap": run_demo_gap,
    "demo-discontinuity": run_demo_discontinuity,
}


def cli(argv: Optional[List[str]] = None) -> int:
    """
    Command line interface.

    Parameters
    ----------
    argv : list of str, optional
        the arguments, defaults to sys.argv

    Returns
    -------
    exit_code : int
        0 complete, 1 invalid input, 2 partial result

    """
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_OK if err.code in (0, None) else EXIT_INPUT_ERROR
    if args.command not in RUNNERS:
        parser.print_help()
        return EXIT_INPUT_ERROR
    try:
        if args.config:
            config_helper.load_settings(args.config)
        custom_logger.set_log_level(args.log_level or config_helper.LOG_LEVEL)
        return RUNNERS[args.command](args)
    except BudgetError as err:
        logger.warning(f"{args.command} stopped at a budget: {err}")
        return EXIT_PARTIAL
    except (FscError, ValueError, FileNotFoundError, OSError) as err:
        logger.error(f"{type(err).__name__}: {err}")
        return EXIT_INPUT_ERROR
    finally:
        if args.config:
            config_helper.load_settings()


if __name__ == "__main__":
    sys.exit(cli())
