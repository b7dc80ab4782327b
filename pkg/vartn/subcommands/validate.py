"""Cross-checks the tensor-network machinery against the dense oracle.
"""

import argparse
import os

from typing import Any, Dict

from ..lib import args as _args, config as _config, errors, reporting, utils, validation
from ..lib.constants import REPORT_FILE


def _level(args: Dict[str, Any]) -> str:
    if args.get("level"):
        return args["level"]
    if args.get("config"):
        return _config.load_run_config(args["config"])["validate_level"]
    return "fast"


async def call(args: Dict[str, Any]) -> None:
    """Execute the subcommand.

    Args:
        args (Dict): Arguments parsed from the command line.
    """

    try:
        level = _level(args)
        results = validation.run_validation(level, args.get("seed") or 0, args.get("suite") or ())
    except errors.VartnError as e:
        errors.report(str(e), fatal=True, exitcode=e.exitcode)
        return

    out = utils.ensure_dir(args["out"])
    utils.write_json(
        {"level": level, "results": [r.to_dict() for r in results]},
        os.path.join(out, REPORT_FILE),
    )
    reporting.print_dicts_as_table(
        [
            {"Invariant": r.name, "Status": "passed" if r.passed else "FAILED", "Detail": r.detail}
            for r in results
        ],
        grid_style=args.get("grid_style"),
    )

    try:
        validation.assert_passed(results)
    except errors.InvariantViolation as e:
        errors.report(str(e), fatal=True, exitcode=e.exitcode)


def register_subparser(
    subparser: argparse._SubParsersAction,  # pylint: disable=protected-access
) -> argparse.ArgumentParser:
    """Registers a subparser for the current command.

    Args:
        subparser (argparse._SubParsersAction): Subparsers action.
    """

    subcommand = subparser.add_parser(
        "validate", help=__doc__.split("\n", maxsplit=1)[0]
    )
    _args.add_config_arg(subcommand, required=False)
    _args.add_output_args(subcommand)
    subcommand.add_argument(
        "-l",
        "--level",
        choices=validation.LEVELS,
        default=None,
        help="Instance counts per suite. Defaults to the config's validate_level, or fast.",
    )
    subcommand.add_argument(
        "-s",
        "--suite",
        nargs="+",
        choices=list(validation.SUITES),
        default=None,
        help="Run only these suites.",
    )
    subcommand.add_argument("--seed", type=int, default=0, help="Base seed of the random instances.")
    subcommand.set_defaults(func=call)
    return subcommand
