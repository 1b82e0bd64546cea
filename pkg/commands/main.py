"""Command-line surface: parser assembly, error handlers and exit codes.

Machine output (JSON, CSV) goes to standard output or files; logs and error
diagnostics go to standard error.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from commands import analysis, transmission
from errors import EprLabError
from logconfig import new_run_id, setup_logging
from settings import VERSION, Settings

EXIT_ERROR = 2


def build_parser(config: Settings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=config.seed, help="master seed (env EPRLAB_SEED)")
    common.add_argument("--workers", type=int, default=config.worker_count(),
                        help="worker threads; results do not depend on it")
    common.add_argument("--out", metavar="PATH", help="write JSON here, with PATH.manifest.json")

    with_state = argparse.ArgumentParser(add_help=False, parents=[common])
    with_state.add_argument("input", nargs="?", help="density matrix JSON file")
    with_state.add_argument("--state", help="built-in state, e.g. singlet, phi-plus, max-entangled:3, mixed:4")

    parser = argparse.ArgumentParser(prog="eprlab", description="Invariant perfect EPR correlations")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument("--log-level", default=config.log_level)
    parser.set_defaults(config=config)
    sub = parser.add_subparsers(dest="command", required=True)
    analysis.register(sub, with_state, common, config)
    transmission.register(sub, with_state, common, config)
    return parser


def _diagnostic(error: str, kind: str, details) -> None:
    sys.stderr.write(json.dumps({"error": error, "type": kind, "details": details}, default=str) + "\n")


def run(argv: Optional[List[str]] = None, config: Optional[Settings] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    config = config or Settings()
    try:
        args = build_parser(config).parse_args(argv)
    except SystemExit as e:            # usage errors and --help
        return e.code if isinstance(e.code, int) else EXIT_ERROR
    args.argv = argv

    setup_logging(args.log_level)
    run_id = new_run_id()
    logging.info(f"eprlab {VERSION} {args.command} (run {run_id}, seed {args.seed}, workers {args.workers})")
    try:
        return args.handler(args)
    except EprLabError as error:
        logging.error(f"{type(error).__name__}: {error.message} - Details: {error.details}")
        _diagnostic(error.message, type(error).__name__, error.details)
        return error.exit_code
    except ValidationError as error:
        logging.warning(f"Validation Error: {error.error_count()} problem(s) in input")
        _diagnostic("Validation Error", "ValidationError", json.loads(error.json(include_url=False)))
        return EXIT_ERROR
    except Exception as error:
        logging.critical(f"Unhandled Exception: {error}", exc_info=True)
        _diagnostic("An unexpected error occurred.", type(error).__name__, {})
        return EXIT_ERROR
