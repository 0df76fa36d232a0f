"""Report model and TEXT / CSV / JSON renderers.

Numbers are carried at full precision and rounded only here. An ROI ratio is
shown together with the percentage of its *displayed* value, so "3.50" always
reads as "350%" and never as a percentage that disagrees with the ratio.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

# field kinds
MONEY = "money"
RATIO = "ratio"  # ROI ratio, displayed with its percentage
PERCENT = "percent"
NUMBER = "number"
COUNT = "count"
TEXT = "text"


@dataclass
class Field:
    key: str
    label: str
    value: object
    kind: str = NUMBER


@dataclass
class Report:
    command: str
    title: str
    fields: list[Field] = field(default_factory=list)
    columns: list[str] = field(default_factory=list)
    rows: list[list] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    currency: str = "USD"

    def add(self, key, label, value, kind=NUMBER):
        self.fields.append(Field(key, label, value, kind))
        return self

    def value(self, key):
        for f in self.fields:
            if f.key == key:
                return f.value
        raise KeyError(key)


def _round(x, precision):
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return x
    x = float(x)
    if not math.isfinite(x):
        return None
    r = round(x, precision)
    return 0.0 if r == 0 else r  # no "-0.0"


def _fixed(x, precision):
    return f"{_round(x, precision):.{precision}f}"


def format_money(x, currency, precision=2):
    ax = abs(x)
    for scale, suffix in ((1e9, "B"), (1e6, "M"), (1e3, "k")):
        if ax >= scale:
            return f"{_fixed(x / scale, precision)}{suffix} {currency}"
    return f"{_fixed(x, precision)} {currency}"


def format_ratio(x, precision=2):
    shown = _round(x, precision)
    pct = shown * 100
    pct_digits = max(precision - 2, 0)
    return f"{shown:.{precision}f} ({_round(pct, pct_digits):.{pct_digits}f}%)"


def _text_value(f: Field, currency, precision):
    v = f.value
    if v is None:
        return "n/a"
    if f.kind == MONEY:
        return format_money(v, currency, precision)
    if f.kind == RATIO:
        return format_ratio(v, precision)
    if f.kind == PERCENT:
        return f"{_fixed(v, precision)}%"
    if f.kind == COUNT:
        return str(int(v))
    if f.kind == TEXT:
        return str(v)
    return _fixed(v, precision)


def _cell(v, precision):
    if v is None:
        return ""
    if isinstance(v, (int, str)) and not isinstance(v, bool):
        return str(v)
    return repr(_round(v, precision))


def render_text(report: Report, precision=2) -> str:
    lines = [report.title, "=" * len(report.title)]
    if report.fields:
        width = max(len(f.label) for f in report.fields)
        for f in report.fields:
            lines.append(f"{f.label:<{width}}  {_text_value(f, report.currency, precision)}")
    if report.columns:
        if report.fields:
            lines.append("")
        cells = [[_cell(v, precision) for v in row] for row in report.rows]
        widths = [max([len(c)] + [len(r[k]) for r in cells]) for k, c in enumerate(report.columns)]
        lines.append("  ".join(c.rjust(w) for c, w in zip(report.columns, widths)))
        lines.append("  ".join("-" * w for w in widths))
        for r in cells:
            lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    for note in report.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def render_csv(report: Report, precision=2) -> str:
    """Tabular reports emit their table; scalar reports emit ``field,value`` rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.columns:
        w.writerow(report.columns)
        for row in report.rows:
            w.writerow([_cell(v, precision) for v in row])
    else:
        w.writerow(["field", "value"])
        for f in report.fields:
            w.writerow([f.key, _cell(f.value, precision)])
    return buf.getvalue()


def report_to_obj(report: Report, precision=2) -> dict:
    obj = {
        "command": report.command,
        "currency": report.currency,
        "results": {f.key: _round(f.value, precision) for f in report.fields},
    }
    if report.columns:
        obj["table"] = {
            "columns": list(report.columns),
            "rows": [[_round(v, precision) for v in row] for row in report.rows],
        }
    obj["notes"] = list(report.notes)
    return obj


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def render_json(report: Report, precision=2) -> str:
    return dump_json(report_to_obj(report, precision))


def render(report: Report, fmt="text", precision=2) -> str:
    if fmt == "text":
        return render_text(report, precision)
    if fmt == "csv":
        return render_csv(report, precision)
    if fmt == "json":
        return render_json(report, precision)
    raise ValueError(f"unknown output format {fmt!r}")
