"""Fits a power law y = a * x^b to positive (x, y) pairs.
"""

import argparse
import os

from typing import Any, Dict

from ..lib import args as _args, config as _config, errors, fitting, reporting, utils
from ..lib.constants import FIT_FILE


async def call(args: Dict[str, Any]) -> None:
    """Execute the subcommand.

    Args:
        args (Dict): Arguments parsed from the command line.
    """

    try:
        source = args.get("input")
        if not source:
            if not args.get("config"):
                raise errors.ConfigError("Pass --input or a --config with fit_input set.")
            source = _config.load_run_config(args["config"])["fit_input"]
        if not source:
            raise errors.ConfigError("The run configuration does not set fit_input.")
        result = fitting.fit_power_law(fitting.load_pairs(source))
    except errors.VartnError as e:
        errors.report(str(e), fatal=True, exitcode=e.exitcode)
        return

    out = utils.ensure_dir(args["out"])
    utils.write_json(result.to_dict(), os.path.join(out, FIT_FILE))
    reporting.print_dicts_as_table(
        [
            {
                "Prefactor": reporting.format_float(result.prefactor),
                "Exponent": reporting.format_float(result.exponent),
                "R Squared": reporting.format_float(result.r_squared),
                "Points": result.points,
            }
        ],
        grid_style=args.get("grid_style"),
    )


def register_subparser(
    subparser: argparse._SubParsersAction,  # pylint: disable=protected-access
) -> argparse.ArgumentParser:
    """Registers a subparser for the current command.

    Args:
        subparser (argparse._SubParsersAction): Subparsers action.
    """

    subcommand = subparser.add_parser("fit", help=__doc__.split("\n", maxsplit=1)[0])
    _args.add_config_arg(subcommand, required=False)
    _args.add_output_args(subcommand)
    subcommand.add_argument(
        "-i", "--input", default=None, help="CSV or JSON of (x, y) pairs; overrides fit_input."
    )
    subcommand.set_defaults(func=call)
    return subcommand
