"""Command-line entry point.

Exit status: 0 when every selected check passes, 1 when any check fails
or errors, 2 for usage and configuration errors.
"""

import argparse
import logging
import sys

from .config import CHECKS, ConfigError, load_config
from .render import latex_report, report_json, text_summary
from .runner import run

log = logging.getLogger("dualjet")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def build_parser():
    p = argparse.ArgumentParser(
        prog="dualjet",
        description="Verify torsion, curvature and the Ricci, deflection and Bianchi identities "
        "of an h-normal connection described by a config file.",
    )
    p.add_argument("--config", required=True, metavar="PATH", help="run configuration file")
    p.add_argument("--check", action="append", choices=CHECKS + ("all",), metavar="NAME",
                   help="check to run (repeatable; overrides the config): " + ", ".join(CHECKS) + ", all")
    p.add_argument("--mode", choices=("symbolic", "numeric", "both"))
    p.add_argument("--tol", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--report", metavar="PATH", help="write the JSON report here")
    p.add_argument("--latex", metavar="PATH", help="write a LaTeX rendering here")
    p.add_argument("--summary", metavar="PATH", help="write the plain-text summary here")
    p.add_argument("--quiet", action="store_true", help="print nothing on stdout")
    return p


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s",
                        stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        cfg = cfg.with_overrides(
            checks=args.check, mode=args.mode, tol=args.tol, samples=args.samples, seed=args.seed,
            report=args.report, latex=args.latex, summary=args.summary,
        )
    except ConfigError as exc:
        print(f"dualjet: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    def progress(r):
        log.info("%-20s %s (%.2fs)", r.name, r.status, r.seconds)

    result = run(cfg, log=progress)
    summary = text_summary(result)
    # outputs are written one after another from this process
    if cfg.report:
        _write(cfg.report, report_json(result))
    if cfg.summary:
        _write(cfg.summary, summary)
    if cfg.latex:
        _write(cfg.latex, latex_report(result))
    if not args.quiet:
        sys.stdout.write(summary)
    return result.exit_status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
