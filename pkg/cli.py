"""
Command-line entry point

    python cli.py test x.csv y.csv --weights "N(1,1)" --perms 199 --seed 7
    python cli.py power study.json --json
    python cli.py generate --alternative circle --n 30 --seed 1
    python cli.py sigma2 --scale sd
    python cli.py validate oracles
"""
import argparse
import logging
import sys
from typing import Dict, List, Optional

import numpy as np
from dotenv import load_dotenv
from pydantic import ValidationError

# Load environment variables from .env file
load_dotenv()

from rrindep import settings
from rrindep.core.asymptotics import diagonal_curve
from rrindep.core.data import PairedSample, load_paired_sample
from rrindep.core.generators import AlternativeSpec, generate, normal_scores
from rrindep.core.permutation import independence_test
from rrindep.core.weights import parse_weights
from rrindep.errors import ConfigError, RRIndepError
from rrindep.study.formatter import ResultFormatter
from rrindep.study.models import PowerStudyConfig
from rrindep.study.runner import PowerStudyRunner
from rrindep.study.validation import SUITES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION_FAILED = 2
EXIT_REJECTED = 3


def _threads(args) -> int:
    return args.threads if args.threads is not None else settings.get_threads()


def cmd_test(args) -> int:
    sample = load_paired_sample(
        args.x_csv, args.y_csv, header=args.header, metric_x=args.metric_x, metric_y=args.metric_y
    )
    if args.normal_scores:
        if "precomputed" in (args.metric_x, args.metric_y):
            raise ConfigError("--normal-scores needs coordinates, not precomputed distances")
        sample = PairedSample(
            xs=normal_scores(sample.xs), ys=normal_scores(sample.ys), metric_x=args.metric_x, metric_y=args.metric_y
        )
    result = independence_test(
        sample,
        w=parse_weights(args.weights),
        kind=args.kind,
        m=args.perms,
        seed=args.seed,
        estimator=args.estimator,
        workers=_threads(args),
    )
    if args.json:
        print(result.to_json(timings=args.timings))
    else:
        print(ResultFormatter.summary_line(result, args.level))
    return EXIT_REJECTED if result.p_value < args.level else EXIT_OK


def cmd_power(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as f:
            raw = f.read()
    except OSError as e:
        raise ConfigError(f"Cannot read config {args.config}: {e}") from e
    config = PowerStudyConfig.model_validate_json(raw)
    table = PowerStudyRunner(config, workers=_threads(args)).run()
    if args.json:
        print(ResultFormatter.table_json(table, timings=args.timings))
    else:
        sys.stdout.write(ResultFormatter.table_csv(table, timings=args.timings))
    return EXIT_OK


def _parse_params(items: Optional[List[str]]) -> Dict[str, float]:
    params = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError as e:
            raise ConfigError(f"--param {key}: {value!r} is not a number") from e
    return params


def cmd_generate(args) -> int:
    spec = AlternativeSpec(
        name=args.alternative,
        params=_parse_params(args.param),
        link=args.link,
        n=args.n,
        seed=args.seed,
    )
    sample = generate(spec)
    if args.out_x or args.out_y:
        if not (args.out_x and args.out_y):
            raise ConfigError("--out-x and --out-y go together")
        for path, values in ((args.out_x, sample.xs), (args.out_y, sample.ys)):
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(ResultFormatter.points_csv(values))
        logger.info(f"Wrote {spec.key()} (n={spec.n}, seed={spec.seed}) to {args.out_x}, {args.out_y}")
    else:
        sys.stdout.write(ResultFormatter.sample_csv(sample.xs, sample.ys))
    return EXIT_OK


def cmd_sigma2(args) -> int:
    if args.points < 2 or not args.r_max > 0:
        raise ConfigError("--points must be at least 2 and --r-max positive")
    r, values = diagonal_curve(np.linspace(args.r_max / args.points, args.r_max, args.points))
    if args.scale == "sd":
        sys.stdout.write(ResultFormatter.curve_csv(r, np.sqrt(values), value_name="sd"))
    else:
        sys.stdout.write(ResultFormatter.curve_csv(r, values))
    return EXIT_OK


def cmd_validate(args) -> int:
    options = {}
    if args.suite in ("oracles", "lemma2", "size"):
        options["seed"] = args.seed
    if args.suite == "size":
        options["workers"] = _threads(args)
        if args.reps is not None:
            options["reps"] = args.reps
    report = run_suite(args.suite, **options)
    print(ResultFormatter.report_json(report))
    return EXIT_OK if report.passed else EXIT_VALIDATION_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cli.py", description="Recurrence-rate tests of independence")
    sub = parser.add_subparsers(dest="command", required=True)

    test = sub.add_parser("test", help="permutation test on one paired dataset")
    test.add_argument("x_csv")
    test.add_argument("y_csv")
    test.add_argument("--header", action="store_true", help="CSV files have a header row")
    test.add_argument("--metric-x", choices=["euclidean", "absolute", "precomputed"], default="euclidean")
    test.add_argument("--metric-y", choices=["euclidean", "absolute", "precomputed"], default="euclidean")
    test.add_argument("--normal-scores", action="store_true", help="rank-transform each coordinate first")
    test.add_argument("--weights", default="auto", help='auto | preset | "N(mu,sigma2)" | "N(..)xN(..)"')
    test.add_argument("--kind", choices=["cvm", "sup"], default="cvm")
    test.add_argument("--perms", type=int, default=None)
    test.add_argument("--seed", type=int, default=0)
    test.add_argument("--estimator", choices=["paper", "plus_one"], default="paper")
    test.add_argument("--level", type=float, default=0.05)
    test.add_argument("--threads", type=int, default=None)
    test.add_argument("--json", action="store_true")
    test.add_argument("--timings", action="store_true")
    test.set_defaults(handler=cmd_test)

    power = sub.add_parser("power", help="run a power study from a JSON config")
    power.add_argument("config")
    power.add_argument("--json", action="store_true")
    power.add_argument("--timings", action="store_true")
    power.add_argument("--threads", type=int, default=None)
    power.set_defaults(handler=cmd_power)

    gen = sub.add_parser("generate", help="draw one sample from an alternative")
    gen.add_argument("--alternative", required=True)
    gen.add_argument("--param", action="append", metavar="KEY=VALUE")
    gen.add_argument("--link", default=None)
    gen.add_argument("--n", type=int, default=30)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out-x", default=None)
    gen.add_argument("--out-y", default=None)
    gen.set_defaults(handler=cmd_generate)

    sigma2 = sub.add_parser("sigma2", help="emit the diagonal of the normal-model variance surface")
    sigma2.add_argument("--scale", choices=["variance", "sd"], default="variance")
    sigma2.add_argument("--points", type=int, default=120)
    sigma2.add_argument("--r-max", type=float, default=6.0)
    sigma2.set_defaults(handler=cmd_sigma2)

    validate = sub.add_parser("validate", help="run a validation suite")
    validate.add_argument("suite", choices=list(SUITES))
    validate.add_argument("--seed", type=int, default=0)
    validate.add_argument("--reps", type=int, default=None, help="power replicates for the size suite")
    validate.add_argument("--threads", type=int, default=None)
    validate.set_defaults(handler=cmd_validate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=settings.get_log_level(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except ValidationError as e:
        for error in e.errors():
            location = ".".join(str(part) for part in error["loc"]) or "<root>"
            print(f"error: {location}: {error['msg']}", file=sys.stderr)
        logger.error(f"Invalid input for {args.command}", exc_info=True)
        return EXIT_ERROR
    except RRIndepError as e:
        print(f"error: {e}", file=sys.stderr)
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
