"""Export AHFA and chart statistics to an Excel file."""

import dataclasses
import pathlib
from typing import Any, Optional

import xlsxwriter

from chafparse.features import reports
from chafparse.model import ahfa_mod, recognizer_mod


def write(
    excel_path: pathlib.Path,
    states: Optional[list[ahfa_mod.AhfaState]] = None,
    ahfa_stats: Optional[ahfa_mod.AhfaStats] = None,
    chart_stats: Optional[recognizer_mod.ChartStats] = None,
) -> None:
    """Write whichever statistics are given to a Microsoft Excel file."""
    workbook = xlsxwriter.Workbook(excel_path)
    if states is not None:
        _write_sheet(
            workbook,
            "States",
            [
                {
                    "state": state.label,
                    "kind": str(state.kind),
                    "size": len(state),
                    "completed lhs": len(state.completed_lhs()),
                    "items": "; ".join(str(dotted) for dotted in state.sorted_items()),
                }
                for state in states
            ],
        )
    if ahfa_stats is not None:
        rows = reports.ahfa_stats_rows(ahfa_stats)
        _write_sheet(workbook, "AHFA Statistics", [_cells(row) for row in rows])
    if chart_stats is not None:
        _write_sheet(
            workbook,
            "Earley Sets",
            [
                {"set": idx, "items": count}
                for idx, count in enumerate(chart_stats.items_per_set)
            ],
        )
        totals = dataclasses.asdict(chart_stats)
        del totals["items_per_set"]
        phase_counts = totals.pop("phase_counts")
        totals.update({f"{phase} items": count for phase, count in phase_counts.items()})
        _write_sheet(workbook, "Chart Totals", [totals])
    workbook.close()


def _cells(row: dict[str, Any]) -> dict[str, Any]:
    """Keep numbers as numbers and everything else as text."""
    return {
        key: value if isinstance(value, (int, float)) else str(value)
        for key, value in row.items()
    }


def _write_sheet(
    workbook: xlsxwriter.Workbook, sheet_name: str, data: list[dict[str, Any]]
) -> None:
    """Write a table of data to a worksheet."""
    sheet = workbook.add_worksheet(sheet_name)
    if not data:
        return
    sheet.write_row(row=0, col=0, data=list(data[0].keys()))
    for row_number, row_values in enumerate(data):
        sheet.write_row(row=row_number + 1, col=0, data=list(row_values.values()))
