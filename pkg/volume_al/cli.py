import argparse
import csv
import logging
import sys
import typing
from pathlib import Path

from volume_al import __version__
from volume_al.config import ExperimentConfig
from volume_al.dataset import LabelOracle, Shape, gen_synthetic, load_csv, save_csv
from volume_al.errors import ConfigError, IoError, VolumeALError
from volume_al.geometry import TheoremReport, run_theory_suite
from volume_al.kernel import KernelSpec
from volume_al.report import emit_csv, emit_svg
from volume_al.runner import run_experiment
from volume_al.strategies import SeedSet, StrategyConfig, StrategyName, make_strategy

__all__ = ["main", "build_parser"]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
REPORT_COLUMNS = ("theorem", "trials", "violations", "max_deviation", "tolerance")


def _cmd_run(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_file(args.config)
    curve = run_experiment(config)
    csv_path = emit_csv(curve, config.output_dir / "curve.csv")
    svg_path = emit_svg(curve, config.output_dir / "curve.svg")
    print(csv_path)
    print(svg_path)
    return EXIT_OK


def _cmd_select(args: argparse.Namespace) -> int:
    dataset = load_csv(args.data, args.label_col)
    oracle = LabelOracle(dataset, budget=args.k)
    seeds = SeedSet.first_of_each_class(oracle)
    strategy = make_strategy(
        StrategyConfig(
            name=args.strategy,
            budget=args.k,
            kernel=KernelSpec(gamma=args.gamma),
            seed=args.seed,
        )
    )
    strategy.check_budget(dataset, seeds, args.k)
    for index in strategy.select(dataset, oracle, seeds, args.k):
        print(index)
    return EXIT_OK


def _cmd_gen_data(args: argparse.Namespace) -> int:
    dataset = gen_synthetic(
        args.shape,
        args.classes,
        args.per_class,
        args.separation,
        args.noise_std,
        args.seed,
    )
    save_csv(dataset, args.out)
    logger.info("Wrote %d points of %s to %s", dataset.n, dataset.name, args.out)
    return EXIT_OK


def _write_reports(reports: typing.List[TheoremReport], out: typing.TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS + ("passed",))
    for report in reports:
        writer.writerow(
            [
                report.theorem,
                report.trials,
                report.violations,
                repr(report.max_deviation),
                repr(report.tolerance),
                str(report.passed).lower(),
            ]
        )


def _cmd_verify_theory(args: argparse.Namespace) -> int:
    reports = run_theory_suite(trials=args.trials, seed=args.seed)
    for report in reports:
        if not report.passed:
            logger.warning(
                "%s: %d of %d checks violated (worst deviation %g)",
                report.theorem,
                report.violations,
                report.trials,
                report.max_deviation,
            )
    if args.out is None:
        _write_reports(reports, sys.stdout)
    else:
        try:
            with open(args.out, "w", newline="") as f:
                _write_reports(reports, f)
        except OSError as e:
            raise IoError(f"cannot write {args.out}: {e}") from e
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volume-al",
        description="Label-free active learning by sparsification and local centers.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="log at INFO, or DEBUG when given twice",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run an experiment from a config file")
    run.add_argument("--config", type=Path, required=True)
    run.set_defaults(handler=_cmd_run)

    select = commands.add_parser("select", help="print the indices a strategy queries")
    select.add_argument(
        "--strategy", type=StrategyName, required=True, metavar="NAME"
    )
    select.add_argument("--k", type=int, required=True)
    select.add_argument("--data", type=Path, required=True)
    select.add_argument("--label-col", default=None)
    select.add_argument("--gamma", type=float, default=None)
    select.add_argument("--seed", type=int, default=0)
    select.set_defaults(handler=_cmd_select)

    gen = commands.add_parser("gen-data", help="write a synthetic data set as CSV")
    gen.add_argument("--shape", type=Shape, default=Shape.BLOBS)
    gen.add_argument("--classes", type=int, default=3)
    gen.add_argument("--per-class", type=int, default=50)
    gen.add_argument("--separation", type=float, default=10.0)
    gen.add_argument("--noise-std", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, required=True)
    gen.set_defaults(handler=_cmd_gen_data)

    verify = commands.add_parser(
        "verify-theory", help="run the geometric property checks"
    )
    verify.add_argument("--trials", type=int, default=50)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--out", type=Path, default=None)
    verify.set_defaults(handler=_cmd_verify_theory)
    return parser


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format=LOG_FORMAT)
    try:
        return args.handler(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except VolumeALError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception("Unexpected failure in %s", args.command)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
