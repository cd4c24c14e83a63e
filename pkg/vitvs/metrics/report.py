"""Result tables: aligned text for terminals, CSV for scripts."""

import csv

from vitvs.common.exceptions import DataIOError

COLUMNS = ('method', 'split', 'F1', 'IoU', 'Dice', 'SDR')


def _cell(value):
    if value is None:
        return '-'
    if isinstance(value, float):
        return '{:.2f}'.format(value)
    return str(value)


def format_table(rows, columns=COLUMNS):
    """Render dict ``rows`` as a left-aligned text table with a header."""
    cells = [list(columns)] + [[_cell(row.get(col)) for col in columns] for row in rows]
    widths = [max(len(line[i]) for line in cells) for i in range(len(columns))]
    lines = ['  '.join(text.ljust(width) for text, width in zip(line, widths)).rstrip()
             for line in cells]
    lines.insert(1, '  '.join('-' * width for width in widths))
    return '\n'.join(lines)


def write_csv(path, rows, columns=COLUMNS):
    try:
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(columns)
            for row in rows:
                writer.writerow(['' if row.get(col) is None else
                                 ('{:.4f}'.format(row[col]) if isinstance(row[col], float) else row[col])
                                 for col in columns])
    except OSError as exc:
        raise DataIOError('Cannot write CSV `{}`: {}'.format(path, exc)) from exc
