"""
Command-line frontend.

stdout carries exactly one JSON document per run (the result, or the error
object); logs go to stderr. Exit codes: 0 verified, 2 violation, 1 error or
indecisive.
"""
import argparse
import sys
from typing import List, Optional

import orjson
import structlog

from src.core.config import RunConfig, default_table_cache, init_precision
from src.core.errors import VerificationError
from src.core.journal import CertificateJournal
from src.core.logger import LEVELS, bind_run, configure_logging, get_logger
from src.core.types import SCHEMA_VERSION
from src.core.verdict import Verdict, VerdictStatus

from .commands import DEFAULTS, HANDLERS, CommandResult

logger = get_logger(__name__)


class UsageError(VerificationError):
    kind = "usage"


class Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors share the error object."""

    def error(self, message: str):
        raise UsageError(message, prog=self.prog)


def build_parser() -> Parser:
    parser = Parser(prog="abcv", description="Certified explicit abc and generalized Fermat bounds.")
    parser.add_argument("--log-level", type=str.upper, choices=LEVELS, default="INFO")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--precision", choices=["standard", "extended"], default="standard")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--table-cache", default=None, help="prime table cache directory (default $ABCV_TABLE_CACHE)")
    parser.add_argument("--out", default=None, help="certificate journal (JSON lines)")
    parser.add_argument("--resume", action="store_true", help="reuse re-validated certificates already in --out")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("sieve", help="build and cache prime tables")
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--out", dest="table_out", default=None, help="cache file path")

    p = sub.add_parser("vol", help="log-volume of R_l or R'_l")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--variant", choices=["rl", "rlprime"], default="rl")
    p.add_argument("--method", default="exact", help="exact | relaxed | closed | f2")
    p.add_argument("--limit", type=int, default=None)

    p = sub.add_parser("sweep-f1", help="f1(n) below its linear target for every n in range")
    p.add_argument("--from", dest="n_from", type=int, default=200_000)
    p.add_argument("--to", dest="n_to", type=int, default=None)
    p.add_argument("--chunk", type=int, default=1 << 20)
    p.add_argument("--limit", type=int, default=None)

    p = sub.add_parser("check-f3f4", help="f3/f4 closed forms at x (e.g. e31)")
    p.add_argument("--x", required=True)
    p.add_argument("--to", default=None, help="upper end of a log-spaced grid")
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--limit", type=int, default=None)

    p = sub.add_parser("check-aux", help="prime-sum inequalities used by the f1/f2 estimates")
    p.add_argument("--limit", type=int, default=None)

    p = sub.add_parser("sweep-abc", help="exclusion certificates over [h-min, h-max]")
    p.add_argument("--h-min", default=DEFAULTS["h_min"])
    p.add_argument("--h-max", default=None, help="number or e<exponent>; default e31")
    p.add_argument("--step", type=float, default=DEFAULTS["step"])
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--variant", choices=["rl", "rlprime"], default="rl")
    p.add_argument("--exact-max-l", type=int, default=200)
    p.add_argument("--large-method", default="f2", help="f2 | closed")
    p.add_argument("--allow-13", action="store_true")

    sub.add_parser("check-cor33", help="epsilon-version constants and tail constants")

    p = sub.add_parser("table1", help="height bounds per signature class")
    p.add_argument("--rows", nargs="*", default=None)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=DEFAULTS["tolerance"])
    p.add_argument("--cap", type=float, default=DEFAULTS["cap"])
    p.add_argument("--vol-constant", default=None, help="use this Vol(l) bound for every l")
    p.add_argument("--skip-cap", action="store_true")

    p = sub.add_parser("flt", help="no x^p + y^p = z^p for prime p from the height bound")
    p.add_argument("--p", type=int, default=11)
    p.add_argument("--bound", default=str(DEFAULTS["fermat_bound"]))

    p = sub.add_parser("cor48", help="(3,3,n) exponent bound against the literature")
    p.add_argument("--bound", required=True)
    p.add_argument("--literature", type=int, default=DEFAULTS["literature"])

    p = sub.add_parser("search", help="exhaustive x^r + y^s = z^t below a height")
    p.add_argument("--h-max", required=True)
    p.add_argument("--min-exp", type=int, required=True)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--all", action="store_true", help="include non-primitive solutions")
    p.add_argument("--no-one-plus", action="store_true", help="skip the base-1 scan")

    sub.add_parser("verify-catalog", help="known solutions by exact arithmetic")

    p = sub.add_parser("recheck", help="re-validate a certificate file")
    p.add_argument("--cert", required=True)
    p.add_argument("--limit", type=int, default=None)
    return parser


def _ensure_logging():
    # usage errors arrive before the run configured logging; stdout must stay clean
    if not structlog.is_configured():
        configure_logging()


def emit(document: dict):
    sys.stdout.write(orjson.dumps(document, option=orjson.OPT_SORT_KEYS).decode() + "\n")
    sys.stdout.flush()


def _write_out(result: CommandResult, config: RunConfig):
    if not config.out or result.streamed:
        return
    with CertificateJournal(config.out) as journal:
        for record in result.records or [result.payload]:
            journal.append(record)


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    config = RunConfig(
        command=args.command,
        precision=args.precision,
        workers=args.workers,
        table_cache=args.table_cache or default_table_cache(),
        out=args.out,
        resume=args.resume,
        seed=args.seed,
    )
    init_precision(config.precision)
    bind_run(config.command, config.config_hash())
    logger.info("run_start", workers=config.workers, precision=config.precision)
    result = HANDLERS[args.command](args, config)
    _write_out(result, config)
    emit(result.payload)
    verdict = Verdict(result.status, config.command, items_checked=result.payload.get("points_checked", 0))
    logger.info("run_done", status=verdict.status.value, summary=verdict.summary())
    return verdict.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    try:
        return run(argv)
    except VerificationError as e:
        _ensure_logging()
        logger.error(e.kind, message=e.message)
        emit({**e.to_dict(), "schema": SCHEMA_VERSION})
        return Verdict(VerdictStatus.ERROR, e.kind, error_message=e.message).exit_code
    except Exception as e:
        _ensure_logging()
        logger.exception("unexpected_error")
        emit({"error": "internal", "message": str(e), "details": {"type": type(e).__name__}, "schema": SCHEMA_VERSION})
        return Verdict(VerdictStatus.ERROR, "internal", error_message=str(e)).exit_code


if __name__ == "__main__":
    sys.exit(main())
