"""Command-line interface.

Exit codes: 0 success, 1 certification or feasibility failure,
2 usage, validation or I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, InvalidOperation

from . import __version__
from .adjust import DEFAULT_GRID_STEPS, ReferenceStudy, derive_accuracy_band
from .core import (
    NO_ASSUMPTION,
    STANDARD_SCENARIOS,
    STANDARD_Q_BAND,
    AccuracyBand,
    ObservedCounty,
    SelectionBand,
    scenario_bounds,
)
from .errors import EmptyInput, NoFeasibleDistribution, PrevBoundsError
from .ingest import CountyFormat, config_to_json, read_config, read_counties
from .oracle import OracleConfig, certify, random_sweep
from .report import build_report, format_interval, render_certification, render_table

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(PrevBoundsError):
    pass


def probability_arg(text: str) -> float:
    """Accept "0.90%" (percent) or "0.0090" (fraction)."""
    raw = text.strip()
    scale = Decimal(1)
    if raw.endswith("%"):
        raw, scale = raw[:-1].strip(), Decimal(100)
    try:
        value = Decimal(raw)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value.is_finite():
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return float(value / scale)


def kappa_arg(text: str) -> float:
    if text.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(value):
        raise argparse.ArgumentTypeError("kappa must not be NaN")
    return value


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=default(None), metavar="PATH", help="JSON run configuration")
    parser.add_argument("--format", choices=("md", "csv", "json"), default=default("md"), help="output format")
    parser.add_argument("--output", default=default(None), metavar="PATH", help="write data here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prevbounds",
        description="Sharp prevalence bounds from voluntary mass-testing data.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    _common(common, suppress=True)

    accuracy = argparse.ArgumentParser(add_help=False)
    accuracy.add_argument("--sigma", nargs=2, type=probability_arg, metavar=("LO", "HI"),
                          help="sensitivity band (default: config, else the Standard Q band)")
    accuracy.add_argument("--pi", nargs=2, type=probability_arg, metavar=("LO", "HI"),
                          help="specificity band (default: config, else the Standard Q band)")

    p = sub.add_parser("bounds", parents=[common, accuracy], help="bounds for a single county")
    p.add_argument("--gamma", required=True, type=probability_arg, help='test yield, "0.90%%" or "0.009"')
    p.add_argument("--tau", required=True, type=probability_arg, help="participation share")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--kappa", nargs=2, type=kappa_arg, metavar=("LO", "HI"),
                      help='selection-ratio band; HI may be "inf"')
    mode.add_argument("--no-assumption", action="store_true", help="no selection assumption (default)")

    counties = argparse.ArgumentParser(add_help=False)
    counties.add_argument("counties", metavar="COUNTIES", help="county CSV file")
    counties.add_argument("--counts", action="store_true",
                          help="county file holds n_positive, n_tested, population instead of percentages")

    sub.add_parser("table", parents=[common, accuracy, counties], help="scenario table for every county")

    v = sub.add_parser("verify", parents=[common, accuracy, counties], help="certify bounds against the grid oracle")
    v.add_argument("--grid-steps", type=int, help="oracle grid points per axis (overrides config)")
    v.add_argument("--tolerance", type=float, help="acceptance slack (overrides config)")
    v.add_argument("--random", type=int, default=0, metavar="N", help="also check N random instances")
    v.add_argument("--seed", type=int, default=0, help="seed for --random")

    a = sub.add_parser("adjust", parents=[common], help="accuracy band from an imperfect-reference study")
    a.add_argument("--apparent-sens", required=True, type=probability_arg)
    a.add_argument("--apparent-spec", required=True, type=probability_arg)
    a.add_argument("--ref-sens", required=True, nargs=2, type=probability_arg, metavar=("LO", "HI"),
                   help="reference test sensitivity band")
    a.add_argument("--ref-spec", type=probability_arg, default=1.0, help="reference test specificity (default 1)")
    a.add_argument("--ref-positive-share", type=probability_arg, default=None,
                   help="share of reference positives in the study, if known")
    a.add_argument("--grid-steps", type=int, default=DEFAULT_GRID_STEPS)
    a.add_argument("--write-config", metavar="PATH", help="store the derived band in this config file")
    return parser


def _load_config(args):
    if args.config is None:
        return None
    return read_config(args.config)


def _accuracy(args, config) -> AccuracyBand:
    base = config[0] if config else STANDARD_Q_BAND
    sigma = args.sigma or (base.sigma_lo, base.sigma_hi)
    pi = args.pi or (base.pi_lo, base.pi_hi)
    band = AccuracyBand(sigma[0], sigma[1], pi[0], pi[1])
    band.require_informative()
    return band


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bounds(args) -> int:
    config = _load_config(args)
    acc = _accuracy(args, config)
    county = ObservedCounty("input", args.gamma, args.tau)
    selection = NO_ASSUMPTION if args.kappa is None else SelectionBand(*args.kappa)
    iv = scenario_bounds(county, acc, selection)
    if args.format == "json":
        doc = {"gamma": county.gamma, "tau": county.tau, "lo": iv.lo, "hi": iv.hi, "interval": format_interval(iv)}
        _emit(args, json.dumps(doc) + "\n")
    elif args.format == "csv":
        _emit(args, f"lo,hi\n{iv.lo!r},{iv.hi!r}\n")
    else:
        _emit(args, format_interval(iv) + "\n")
    return EXIT_OK


def _dataset(args):
    fmt = CountyFormat.COUNTS if args.counts else CountyFormat.PERCENT
    dataset = read_counties(args.counties, fmt)
    if len(dataset) == 0:
        raise EmptyInput("no counties")
    return dataset


def cmd_table(args) -> int:
    config = _load_config(args)
    acc = _accuracy(args, config)
    scenarios = config[1] if config else STANDARD_SCENARIOS
    dataset = _dataset(args)
    rows = build_report(dataset, acc, scenarios)
    _emit(args, render_table(rows, scenarios, args.format, acc))
    return EXIT_OK


def cmd_verify(args) -> int:
    config = _load_config(args)
    acc = _accuracy(args, config)
    scenarios = config[1] if config else STANDARD_SCENARIOS
    oracle = config[2] if config else OracleConfig()
    steps = args.grid_steps if args.grid_steps is not None else oracle.grid_steps
    tolerance = args.tolerance if args.tolerance is not None else oracle.tolerance
    cfg = OracleConfig(steps, tolerance)
    dataset = _dataset(args)
    report = certify(dataset, acc, scenarios, cfg)
    text = render_certification(report, args.format)
    passed = report.passed
    if args.random:
        sweep = random_sweep(args.random, cfg, seed=args.seed)
        passed = passed and sweep.passed
        line = (
            f"{'PASS' if sweep.passed else 'FAIL'}: {sweep.n_instances} random instances, "
            f"oracle within analytic: {sweep.all_contained}, max gap {sweep.max_gap:.3e} "
            f"(spacing {sweep.spacing:g})"
        )
        if args.format == "json":
            doc = json.loads(text)
            doc["random"] = {"n": sweep.n_instances, "contained": sweep.all_contained,
                             "max_gap": sweep.max_gap, "passed": sweep.passed}
            doc["passed"] = passed
            text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
        elif args.format == "md":
            text += line + "\n"
        else:
            print(line, file=sys.stderr)
    _emit(args, text)
    if not passed:
        print("certification failed", file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAIL


def _round4(x: float, rounding) -> float:
    return float(Decimal(repr(x)).quantize(Decimal("0.0001"), rounding=rounding))


def _write_band(path, band: AccuracyBand) -> None:
    # Rounded outwards so the stored band still contains the derived one.
    outer = AccuracyBand(
        _round4(band.sigma_lo, ROUND_FLOOR), _round4(band.sigma_hi, ROUND_CEILING),
        _round4(band.pi_lo, ROUND_FLOOR), _round4(band.pi_hi, ROUND_CEILING),
    )
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise UsageError(f"{path}: config must be a JSON object")
    except FileNotFoundError:
        doc = {}
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc.msg}") from exc
    doc["accuracy"] = config_to_json(outer)["accuracy"]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _compare_lines(derived: AccuracyBand, reference: AccuracyBand) -> list[str]:
    def side(name, d_lo, d_hi, r_lo, r_hi):
        contained = d_lo <= r_lo and r_hi <= d_hi
        return (
            f"{name}: reference [{r_lo:.4f}, {r_hi:.4f}] "
            f"{'contained' if contained else 'NOT contained'}; "
            f"discrepancy lo {d_lo - r_lo:+.4f}, hi {d_hi - r_hi:+.4f}"
        )

    return [
        side("sigma", derived.sigma_lo, derived.sigma_hi, reference.sigma_lo, reference.sigma_hi),
        side("pi", derived.pi_lo, derived.pi_hi, reference.pi_lo, reference.pi_hi),
    ]


def cmd_adjust(args) -> int:
    config = _load_config(args)
    reference = config[0] if config else STANDARD_Q_BAND
    study = ReferenceStudy(
        args.apparent_sens, args.apparent_spec, args.ref_sens[0], args.ref_sens[1],
        ref_spec=args.ref_spec, ref_positive_share=args.ref_positive_share,
    )
    band = derive_accuracy_band(study, args.grid_steps)
    if args.format == "json":
        doc = {
            "sigma": [band.sigma_lo, band.sigma_hi],
            "pi": [band.pi_lo, band.pi_hi],
            "informative": band.is_informative,
            "reference": {"sigma": [reference.sigma_lo, reference.sigma_hi], "pi": [reference.pi_lo, reference.pi_hi]},
            "comparison": _compare_lines(band, reference),
        }
        text = json.dumps(doc, indent=2) + "\n"
    elif args.format == "csv":
        text = (
            "parameter,lo,hi\n"
            f"sigma,{band.sigma_lo:.4f},{band.sigma_hi:.4f}\n"
            f"pi,{band.pi_lo:.4f},{band.pi_hi:.4f}\n"
        )
    else:
        text = "\n".join([
            f"sigma: [{band.sigma_lo:.4f}, {band.sigma_hi:.4f}]",
            f"pi:    [{band.pi_lo:.4f}, {band.pi_hi:.4f}]",
            *_compare_lines(band, reference),
        ]) + "\n"
    _emit(args, text)
    if not band.is_informative:
        print(
            "warning: derived band is not informative (sigma_lo + pi_lo - 1 <= 0); "
            "it cannot be used for prevalence bounds without more study information "
            "such as --ref-positive-share",
            file=sys.stderr,
        )
    if args.write_config:
        _write_band(args.write_config, band)
    return EXIT_OK


COMMANDS = {"bounds": cmd_bounds, "table": cmd_table, "verify": cmd_verify, "adjust": cmd_adjust}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except NoFeasibleDistribution as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (PrevBoundsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
