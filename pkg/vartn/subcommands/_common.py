"""Shared body of the subcommands that run a simulation pipeline."""

from typing import Any, Dict, List

from logzero import logger

from ..lib import config as _config, errors, pipelines, reporting


async def run_simulation(kind: str, args: Dict[str, Any]) -> List[pipelines.SimulationReport]:
    """Loads the run configuration, runs every instance and writes the outputs.

    Args:
        kind (str): one of pipelines.PIPELINES.
        args (Dict): Arguments parsed from the command line.

    Returns:
        List[SimulationReport]: reports in instance order (only when nothing exited).
    """

    try:
        config = _config.load_run_config(args["config"])
        reports = await pipelines.run_pipeline(kind, config)
        pipelines.write_outputs(reports, args["out"])
    except errors.VartnError as e:
        errors.report(str(e), fatal=True, exitcode=e.exitcode)
        return []

    reporting.print_dicts_as_table(
        [r.summary_row() for r in reports], grid_style=args.get("grid_style")
    )

    unconverged = [str(r.instance) for r in reports if not r.converged]
    if unconverged:
        message = f"Instances {', '.join(unconverged)} did not converge; results were written to {args['out']}."
        if args.get("allow_unconverged"):
            logger.warning(message)
        else:
            errors.report(message, fatal=True, exitcode=errors.ERROR_NO_CONVERGENCE)
    return reports
