"""Read sweep CSVs and emit gnuplot scripts for them."""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import DomainError

# the mu = N/2 figure is drawn on a clipped axis
NARROW_YMAX = 0.42


@dataclass(frozen=True)
class SweepCSV:
    columns: tuple[str, ...]
    n_values: tuple[int, ...]
    values: tuple[tuple[float, ...], ...]  # one tuple per row


def read_sweep_csv(path: str) -> SweepCSV:
    """Parse a CSV written by the sweep commands, raising DomainError if malformed."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DomainError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    if len(header) < 2 or header[0] != "N":
        raise DomainError(f"{path}: header must be 'N,<series>...', got {header}")
    if not body:
        raise DomainError(f"{path} has no data rows")
    n_values, values = [], []
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DomainError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            n_values.append(int(row[0]))
            values.append(tuple(float(v) for v in row[1:]))
        except ValueError as exc:
            raise DomainError(f"{path}:{lineno}: {exc}") from exc
    return SweepCSV(tuple(header[1:]), tuple(n_values), tuple(values))


def gnuplot_script(data: SweepCSV, csv_path: str, title: str = "", ymax: float | None = None) -> str:
    if ymax is None:
        top = max(max(row) for row in data.values)
        ymax = NARROW_YMAX if top <= NARROW_YMAX else 1.0
    lo, hi = min(data.n_values), max(data.n_values)
    if lo == hi:
        lo, hi = lo - 1, hi + 1
    quoted = csv_path.replace('"', '\\"')
    lines = [
        "# gnuplot script; the CSV it reads is the source of truth",
        'set datafile separator ","',
        f'set title "{title}"' if title else "unset title",
        'set xlabel "N"',
        'set ylabel "A"',
        f"set xrange [{lo}:{hi}]",
        f"set yrange [0:{ymax:g}]",
        "set key bottom left",
    ]
    series = [
        f'"{quoted}" using 1:{k + 2} skip 1 with linespoints title "{name}"'
        for k, name in enumerate(data.columns)
    ]
    lines.append("plot " + ", \\\n     ".join(series))
    return "\n".join(lines) + "\n"


def write_plot(csv_path: str, out_path: str, title: str = "", ymax: float | None = None) -> str:
    data = read_sweep_csv(csv_path)
    # path kept as given: gnuplot resolves it against its working directory
    text = gnuplot_script(data, csv_path, title, ymax)
    with open(out_path, "w") as fh:
        fh.write(text)
    return text
