"""
Utilities for exporting run reports and benchmark tables to JSON, TSV, Excel and CSV.
"""

import csv
import json
import logging
import sys
from pathlib import Path

import jsonschema
import openpyxl
from openpyxl.styles import Alignment, Font, PatternFill
from openpyxl.utils import get_column_letter

logger = logging.getLogger(__name__)

REPORT_SCHEMA_PATH = Path(__file__).resolve().parent.parent / "schemas" / "run_report.schema.json"


def report_to_json(report_dict):
    """Serialize a report dict deterministically.

    Keys are sorted and floats use the shortest repr that round-trips, which is
    exact to 17 significant digits.

    Args:
        report_dict (dict): Output of ``RunReport.to_dict``

    Returns:
        str: JSON text ending with a newline
    """
    return json.dumps(report_dict, sort_keys=True, indent=2, allow_nan=False) + "\n"


def validate_report(report_dict, schema_path=REPORT_SCHEMA_PATH):
    """Check a report dict against the published run-report schema.

    Raises:
        jsonschema.ValidationError: If the report does not match the schema
    """
    schema = json.loads(Path(schema_path).read_text(encoding="utf-8"))
    try:
        jsonschema.validate(report_dict, schema, cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as e:
        logger.error(f"Report does not match {schema_path}: {e.message}")
        raise


def report_to_tsv(partition_dict):
    """(node, label) pairs, one per line, in the order of the partition dict."""
    return "".join(f"{node}\t{label}\n" for node, label in partition_dict.items())


def write_text(file_path, text):
    """Write ``text`` to ``file_path``, or to standard output when the path is None."""
    if file_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(file_path).write_text(text, encoding="utf-8")
        logger.info(f"Report written to {file_path}")
    except OSError as e:
        logger.error(f"Error writing report: {str(e)}")
        raise


def export_to_excel(file_path, sheets):
    """Export tables to an Excel file, one sheet per entry.

    Args:
        file_path (str): Path where to save the Excel file
        sheets (dict): Sheet name -> {"headers": [...], "data": [[...], ...]}
    """
    try:
        workbook = openpyxl.Workbook()
        # Remove default sheet
        workbook.remove(workbook.active)

        for sheet_name, sheet_data in sheets.items():
            create_excel_sheet(workbook, sheet_name, sheet_data.get("headers", []), sheet_data.get("data", []))

        # Save the workbook
        workbook.save(file_path)
        logger.info(f"Data exported to Excel file: {file_path}")

    except Exception as e:
        logger.error(f"Error exporting to Excel: {str(e)}")
        raise


def create_excel_sheet(workbook, sheet_name, headers, data):
    """Create and populate a sheet in the Excel workbook.

    Args:
        workbook: The openpyxl Workbook
        sheet_name (str): Name of the sheet
        headers (list): List of column headers
        data (list): List of data rows
    """
    # Create sheet
    sheet = workbook.create_sheet(title=sheet_name)

    # Add headers
    if headers:
        for col_idx, header in enumerate(headers, 1):
            cell = sheet.cell(row=1, column=col_idx, value=header)
            cell.font = Font(bold=True)
            cell.alignment = Alignment(horizontal='center')
            cell.fill = PatternFill(start_color="DDDDDD", end_color="DDDDDD", fill_type="solid")

    # Add data rows
    for row_idx, row_data in enumerate(data, 2 if headers else 1):
        for col_idx, cell_value in enumerate(row_data, 1):
            sheet.cell(row=row_idx, column=col_idx, value=cell_value)

    # Auto-adjust column widths
    for col_idx, _ in enumerate(headers if headers else (data[0] if data else []), 1):
        col_letter = get_column_letter(col_idx)
        max_length = 0
        for row_idx in range(1, len(data) + (2 if headers else 1)):
            cell_value = sheet.cell(row=row_idx, column=col_idx).value
            if cell_value is not None:
                max_length = max(max_length, len(str(cell_value)))
        adjusted_width = max(max_length + 2, 10)  # Min width of 10
        sheet.column_dimensions[col_letter].width = min(adjusted_width, 50)  # Max width of 50

    # Freeze header row if we have headers
    if headers:
        sheet.freeze_panes = "A2"


def export_to_csv(file_path, headers, data):
    """Export data to CSV file.

    Args:
        file_path (str): Path where to save the CSV file
        headers (list): List of column headers
        data (list): List of data rows
    """
    try:
        with open(file_path, 'w', newline='', encoding='utf-8') as csv_file:
            writer = csv.writer(csv_file)
            # Write headers
            if headers:
                writer.writerow(headers)
            # Write data
            for row in data:
                writer.writerow(row)

        logger.info(f"Data exported to CSV file: {file_path}")

    except Exception as e:
        logger.error(f"Error exporting to CSV: {str(e)}")
        raise


def rows_to_table(rows, headers=None):
    """Turn a list of dicts into (headers, data) with one column per key.

    Args:
        rows (list): Benchmark rows as dicts
        headers (list, optional): Column order; defaults to the keys of the first row

    Returns:
        tuple: (headers, data rows)
    """
    if headers is None:
        headers = list(rows[0].keys()) if rows else []
    data = [[row.get(header) for header in headers] for row in rows]
    return headers, data


def export_rows(file_path, rows, sheet_name="Benchmark"):
    """Export benchmark rows, choosing Excel or CSV by file extension."""
    headers, data = rows_to_table(rows)
    if Path(file_path).suffix.lower() == ".xlsx":
        export_to_excel(file_path, {sheet_name: {"headers": headers, "data": data}})
    else:
        export_to_csv(file_path, headers, data)
