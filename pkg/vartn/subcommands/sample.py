"""Photon-number samples of a (possibly lossy) Gaussian instance.
"""

import argparse

from typing import Any, Dict

from ..lib import args as _args
from ._common import run_simulation

SUBCOMMAND_NAME = "sample"


async def call(args: Dict[str, Any]) -> None:
    """Execute the subcommand.

    Args:
        args (Dict): Arguments parsed from the command line.
    """

    await run_simulation(SUBCOMMAND_NAME, args)


def register_subparser(
    subparser: argparse._SubParsersAction,  # pylint: disable=protected-access
) -> argparse.ArgumentParser:
    """Registers a subparser for the current command.

    Args:
        subparser (argparse._SubParsersAction): Subparsers action.
    """

    subcommand = subparser.add_parser(
        SUBCOMMAND_NAME, help=__doc__.split("\n", maxsplit=1)[0]
    )
    _args.add_run_args(subcommand)
    subcommand.set_defaults(func=call)
    return subcommand
