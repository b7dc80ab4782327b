import argparse

from .reporting import DEFAULT_GRID_STYLE

DEFAULT_OUT_DIR = "./vartn-out"


def add_version_arg(parser: argparse.ArgumentParser) -> None:
    """adds version arguments to a parser."""

    parser.add_argument(
        "--version",
        help="Displays the current version of the tool.",
        default=False,
        action="store_true",
    )


def add_loglevel_group(parser: argparse.ArgumentParser, required: bool = False) -> None:
    """Adds log level groups to a parser."""

    loglevel_group = parser.add_mutually_exclusive_group(required=required)
    loglevel_group.add_argument(
        "--debug",
        help="Set the log level to debug.",
        default=False,
        action="store_true",
    )
    loglevel_group.add_argument(
        "-v",
        "--verbose",
        help="Set the log level to INFO.",
        default=False,
        action="store_true",
    )


def add_config_arg(
    parser: argparse._ActionsContainer,  # pylint: disable=protected-access
    required: bool = True,
) -> None:
    parser.add_argument(
        "-c",
        "--config",
        help="Run configuration (JSON).",
        required=required,
        default=None,
    )


def add_output_args(
    parser: argparse._ActionsContainer,  # pylint: disable=protected-access
) -> None:
    parser.add_argument(
        "-o",
        "--out",
        help=f"Output directory. Defaults to '{DEFAULT_OUT_DIR}'.",
        default=DEFAULT_OUT_DIR,
    )
    parser.add_argument(
        "--grid-style",
        help="Any valid `tabulate` format for the summary table.",
        default=DEFAULT_GRID_STYLE,
    )


def add_run_args(parser: argparse.ArgumentParser) -> None:
    """Arguments shared by every subcommand that runs a simulation."""

    add_config_arg(parser)
    add_output_args(parser)
    parser.add_argument(
        "--allow-unconverged",
        help="Write results and exit 0 even if the optimization hit its budget.",
        default=False,
        action="store_true",
    )
