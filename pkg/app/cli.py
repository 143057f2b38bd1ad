import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import BaseModel

from app.config import load_families, settings
from app.core.exceptions import KneadingError, UnknownFamily
from app.models.schemas import OutputFormat
from app.services import reports
from app.services.maps import MapFamily, family_from_params
from app.services.pipeline import VerificationSweep
from app.services.symbolic import enumerate_admissible

logger = logging.getLogger("app.cli")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_VERIFICATION_FAILED = 4


class UsageError(Exception):
    """Raised for flag combinations argparse cannot reject on its own."""


def _render_text(data, indent: str = "") -> list[str]:
    lines: list[str] = []
    for key, value in data.items():
        if isinstance(value, list) and value and isinstance(value[0], list):
            lines.append(f"{indent}{key}:")
            lines.extend(f"{indent}  " + " ".join(f"{v:>2}" for v in row) for row in value)
        elif isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            lines.extend(_render_text(value, indent + "  "))
        elif isinstance(value, list):
            lines.append(f"{indent}{key}: " + ", ".join(str(v) for v in value))
        else:
            lines.append(f"{indent}{key}: {value}")
    return lines


def render(result: BaseModel | list, fmt: OutputFormat) -> str:
    if fmt == OutputFormat.JSON:
        if isinstance(result, BaseModel):
            return result.model_dump_json(indent=2) + "\n"
        return json.dumps([r.model_dump(mode="json") if isinstance(r, BaseModel) else r for r in result], indent=2) + "\n"
    if fmt == OutputFormat.TEXT:
        if isinstance(result, BaseModel):
            return "\n".join(_render_text(result.model_dump(mode="json"))) + "\n"
        return "\n".join(str(r) for r in result) + "\n"
    raise UsageError("csv output is only available for scan and enumerate")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
        logger.info("Wrote %s", out)
    else:
        sys.stdout.write(text)


def _family_spec(name: str) -> dict:
    spec = load_families().get(name)
    if spec is None:
        raise UnknownFamily(f"Unknown family '{name}'")
    return spec


def _family(args) -> MapFamily:
    params = {"family": args.family}
    if args.param is not None:
        params[_family_spec(args.family)["parameter"]] = args.param
    return family_from_params(params)


def cmd_knead(args) -> int:
    report = reports.knead_report(args.sequence, laps=args.laps, order=args.order, tol=args.tol)
    _emit(render(report, args.format), args.out)
    return EXIT_DOMAIN if report.error else EXIT_OK


def cmd_markov(args) -> int:
    _emit(render(reports.markov_report(args.sequence, args.allow_interior), args.format), args.out)
    return EXIT_OK


def cmd_theta(args) -> int:
    _emit(render(reports.theta_report(args.sequence, args.allow_interior), args.format), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if (args.sequence is None) == (args.all_upto is None):
        raise UsageError("verify takes either a sequence or --all-upto P")
    if args.sequence is not None:
        report = reports.verify_report(args.sequence, args.tol)
        _emit(render(report, args.format), args.out)
        return EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED

    sweep = VerificationSweep(args.all_upto, args.jobs).run()
    if args.format == OutputFormat.TEXT:
        _emit(sweep.summary + "\n", args.out)
    else:
        _emit(render(sweep, args.format), args.out)
    return EXIT_OK if sweep.failures == 0 else EXIT_VERIFICATION_FAILED


def cmd_enumerate(args) -> int:
    found = enumerate_admissible(
        args.period, require_markov_form=not args.any_form, allow_interior_discontinuity=args.allow_interior
    )
    words = [str(s) for s in found]
    if args.format == OutputFormat.CSV:
        _emit("word\n" + "".join(f"{w}\n" for w in words), args.out)
    else:
        _emit(render(words, args.format), args.out)
    return EXIT_OK


def cmd_laps(args) -> int:
    report = reports.lap_report(_family(args), args.n)
    _emit(render(report, args.format), args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    scan_range = _family_spec(args.family)["scan"]
    lo = args.lo if args.lo is not None else scan_range["start"]
    hi = args.hi if args.hi is not None else scan_range["stop"]
    step = args.step if args.step is not None else scan_range["step"]
    if step <= 0:
        raise UsageError("--step must be positive")
    rows = reports.scan(_family(args), lo, hi, step, args.depth)
    if args.format == OutputFormat.CSV:
        _emit(reports.scan_csv(rows), args.out)
    else:
        _emit(render(rows, args.format), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", type=OutputFormat, default=OutputFormat.JSON,
                        choices=list(OutputFormat), help="output format (default: json)")
    common.add_argument("--out", default=None, help="write the report to a file instead of stdout")
    common.add_argument("--tol", type=float, default=None, help="numeric tolerance override")

    interior = argparse.ArgumentParser(add_help=False)
    interior.add_argument("--allow-interior", action="store_true",
                          help="accept A or B inside a markov-form sequence")

    parser = argparse.ArgumentParser(
        prog="python -m app",
        description="Kneading invariants and Markov matrices of odd discontinuous bimodal maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("knead", parents=[common], help="kneading determinant, growth number and lap numbers")
    p.add_argument("sequence")
    p.add_argument("--laps", type=int, default=0, help="number of lap numbers to expand")
    p.add_argument("--order", type=int, default=0, help="print the D(t) series up to this order")
    p.set_defaults(handler=cmd_knead)

    p = sub.add_parser("markov", parents=[common, interior], help="orbit order, pi and the Markov matrix")
    p.add_argument("sequence")
    p.set_defaults(handler=cmd_markov)

    p = sub.add_parser("theta", parents=[common, interior], help="the s vector, gamma and Theta")
    p.add_argument("sequence")
    p.set_defaults(handler=cmd_theta)

    p = sub.add_parser("verify", parents=[common], help="check every identity for one sequence or a whole sweep")
    p.add_argument("sequence", nargs="?")
    p.add_argument("--all-upto", type=int, default=None, metavar="P")
    p.add_argument("--jobs", type=int, default=settings.sweep_jobs)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("enumerate", parents=[common, interior], help="list admissible sequences of one period")
    p.add_argument("period", type=int)
    p.add_argument("--any-form", action="store_true", help="include sequences not of markov form")
    p.set_defaults(handler=cmd_enumerate)

    p = sub.add_parser("laps", parents=[common], help="numeric lap numbers of a map family")
    p.add_argument("--family", required=True)
    p.add_argument("--param", type=float, default=None)
    p.add_argument("-n", type=int, default=settings.default_lap_terms)
    p.set_defaults(handler=cmd_laps)

    p = sub.add_parser("scan", parents=[common], help="kneading and lap growth over a parameter range")
    p.add_argument("--family", required=True)
    p.add_argument("--from", dest="lo", type=float, default=None)
    p.add_argument("--to", dest="hi", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--depth", type=int, default=settings.lap_depth)
    p.set_defaults(handler=cmd_scan, param=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, UsageError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except KneadingError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_DOMAIN
