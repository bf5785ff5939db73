"""
Report writing: canonical JSON, CSV tables and an optional Excel workbook.
"""
import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import openpyxl
from openpyxl.styles import Alignment, Font, PatternFill

from . import __version__, conf


def jsonable(value):
    """Plain JSON types; non-finite floats become the strings inf, -inf and nan."""
    if hasattr(value, 'to_dict'):
        return jsonable(value.to_dict())
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    return value


def canonical_json(data):
    return json.dumps(jsonable(data), sort_keys=True, indent=2, allow_nan=False) + '\n'


def _timestamp():
    return conf.get('WEIGHTLAB_TIMESTAMP') or datetime.now(timezone.utc).isoformat(timespec='seconds')


@dataclass
class RunManifest:
    subcommand: str
    input_path: str
    parameters: dict
    seed: int | None = None
    version: str = __version__
    timestamp: str = field(default_factory=_timestamp)

    def to_dict(self):
        return {
            'subcommand': self.subcommand,
            'input': self.input_path,
            'parameters': self.parameters,
            'seed': self.seed,
            'version': self.version,
            'timestamp': self.timestamp,
        }


def _cell(value):
    if isinstance(value, (float, np.floating)):
        value = jsonable(value)
        return repr(value) if isinstance(value, float) else value
    return value


def write_csv(path, header, rows):
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    return path


def export_workbook(path, tables, manifest):
    """One sheet per table plus a manifest sheet."""
    wb = openpyxl.Workbook()
    header_font = Font(bold=True, color="FFFFFF")
    header_fill = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
    center_align = Alignment(horizontal="center", vertical="center")

    ws = wb.active
    ws.title = 'Manifest'
    for row_idx, (key, value) in enumerate(sorted(manifest.to_dict().items()), start=1):
        ws.cell(row=row_idx, column=1, value=key).font = Font(bold=True)
        ws.cell(row=row_idx, column=2, value=json.dumps(jsonable(value), sort_keys=True))

    for name, (header, rows) in tables.items():
        sheet = wb.create_sheet(title=name[:31])
        for col_idx, title in enumerate(header, start=1):
            cell = sheet.cell(row=1, column=col_idx, value=title)
            cell.font = header_font
            cell.fill = header_fill
            cell.alignment = center_align
        for row_idx, row in enumerate(rows, start=2):
            for col_idx, value in enumerate(row, start=1):
                value = jsonable(value)
                if isinstance(value, (list, dict)):
                    value = json.dumps(value)
                sheet.cell(row=row_idx, column=col_idx, value=value)

    for sheet in wb.worksheets:
        for col in sheet.columns:
            width = max((len(str(cell.value)) for cell in col if cell.value is not None), default=0)
            sheet.column_dimensions[col[0].column_letter].width = min(width + 2, 40)

    wb.save(path)
    return path


def emit_report(name, result, manifest, out_dir=None, tables=None, xlsx=False):
    """Write <name>.json, one CSV per table and optionally <name>.xlsx; returns the paths written."""
    out = Path(out_dir or conf.get('WEIGHTLAB_OUT_DIR'))
    out.mkdir(parents=True, exist_ok=True)
    tables = tables or {}

    written = [out / f'{name}.json']
    written[0].write_text(
        canonical_json({'manifest': manifest.to_dict(), 'result': result}),
        encoding='utf-8',
    )
    for table, (header, rows) in tables.items():
        written.append(write_csv(out / f'{name}_{table}.csv', header, rows))
    if xlsx:
        written.append(export_workbook(out / f'{name}.xlsx', tables, manifest))
    return written
