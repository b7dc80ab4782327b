from typing import Any, Callable, Dict, List, Optional

import pendulum
from tabulate import tabulate

from . import errors

DEFAULT_HEADER_ORDER = [
    "Instance",
    "Basis",
    "Modes",
    "Energy",
    "Sigma H",
    "Eps Chi",
    "Eps D",
    "Fidelity",
    "Converged",
    "Time",
]

DEFAULT_GRID_STYLE = "fancy_grid"

EMPTY_CELLS = (None, "")


def duration_to_text(duration: pendulum.Duration) -> str:
    parts = []
    attrs = ["days", "hours", "minutes", "remaining_seconds"]
    for attr in attrs:
        if hasattr(duration, attr):
            value = getattr(duration, attr)
            # pendulum calls the leftover seconds `remaining_seconds`
            if attr == "remaining_seconds":
                attr = "seconds"

            if value > 0:
                parts.append(f"{value} {attr}")

    if not parts:
        millis = int(duration.total_seconds() * 1000)
        return f"{millis} milliseconds"
    return " ".join(parts)


def seconds_to_text(seconds: float) -> str:
    return duration_to_text(pendulum.duration(seconds=seconds))


def format_float(value: Optional[float], digits: int = 10) -> Optional[str]:
    if value is None:
        return None
    return f"{value:.{digits}g}"


def _column_rank(header_order: List[str]) -> Callable[[str], int]:
    return lambda h: header_order.index(h) if h in header_order else len(header_order)


def print_dicts_as_table(
    rows: List[Dict[str, Any]],
    grid_style: Optional[str] = None,
    fill: str = "",
    header_order: Optional[List[str]] = None,
) -> None:
    """Prints one table row per dict with `tabulate`.

    Columns named in `header_order` (DEFAULT_HEADER_ORDER by default) lead in
    that order, the rest follow in first-seen order. Columns that are empty in
    every row are dropped.

    Args:
        rows (List[Dict]): one dict per row.
        grid_style (str, optional): a `tabulate` table format. Defaults to "fancy_grid".
        fill (str, optional): value of missing cells.
        header_order (List[str], optional): leading columns.
    """

    if not rows:
        return
    if not all(isinstance(row, dict) for row in rows):
        errors.report(
            "Table rows must be dicts.",
            fatal=True,
            exitcode=errors.ERROR_INTERNAL_ERROR,
        )

    headers = sorted(
        dict.fromkeys(key for row in rows for key in row),
        key=_column_rank(header_order or DEFAULT_HEADER_ORDER),
    )
    headers = [h for h in headers if any(row.get(h) not in EMPTY_CELLS for row in rows)]
    print(
        tabulate(
            [[row.get(h, fill) for h in headers] for row in rows],
            headers=headers,
            tablefmt=grid_style or DEFAULT_GRID_STYLE,
        )
    )
