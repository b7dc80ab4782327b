#!/usr/bin/env python3
import asyncio
import argparse
import logging
import sys

from typing import Any, cast

import logzero

from vartn import __version__
from vartn.lib import args as _args, errors
from vartn.subcommands import config, fit, gbs, nongauss, sample, validate

SUBCOMMANDS = {
    "config": config,
    "fit": fit,
    "gbs": gbs,
    "nongauss": nongauss,
    "sample": sample,
    "validate": validate,
}


async def run() -> None:
    parser = argparse.ArgumentParser(
        description="Variational tensor-network simulation of continuous-variable boson sampling."
    )
    _args.add_version_arg(parser)
    _args.add_loglevel_group(parser)

    # Subparsers
    subparsers = parser.add_subparsers(dest="subcommand")

    for name, module in SUBCOMMANDS.items():
        if not hasattr(module, "register_subparser") or not hasattr(module, "call"):
            errors.report(
                f"Subcommand does not have required methods: {name}!",
                fatal=True,
                exitcode=errors.ERROR_INTERNAL_ERROR,
            )
        subparser = cast(Any, module).register_subparser(subparsers)
        _args.add_loglevel_group(subparser)

    args = vars(parser.parse_args())

    if args.get("version"):
        print(f"vartn v{__version__}")
        sys.exit(0)

    if not args.get("subcommand"):
        parser.print_help()
        sys.exit(1)

    logzero.loglevel(logging.WARN)
    if args.get("verbose"):
        logzero.loglevel(logging.INFO)
    elif args.get("debug"):
        logzero.loglevel(logging.DEBUG)

    await args["func"](args)


def main() -> None:
    asyncio.run(run())


if __name__ == "__main__":
    main()
