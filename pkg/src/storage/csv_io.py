"""
CSV Module
Full-precision CSV codecs for series, curves and recurrence pair lists.
"""

import io
import logging

import numpy as np

from src.errors import InputFormatError, SamplingError
from src.storage.atomic import atomic_write_text
from src.timeseries import TimeSeries

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
UNIFORMITY_TOLERANCE = 1e-9


def format_columns(header, columns, fmt=FLOAT_FORMAT):
    """CSV text with a header row and '\\n' line ends."""
    buffer = io.StringIO()
    np.savetxt(buffer, np.column_stack(columns), fmt=fmt, delimiter=',',
               header=','.join(header), comments='', newline='\n')
    return buffer.getvalue()


def write_columns(path, header, columns, fmt=FLOAT_FORMAT):
    atomic_write_text(path, format_columns(header, columns, fmt))
    logger.debug(f"wrote {len(columns[0])} rows to {path}")
    return path


def write_series(path, series):
    """Write `t,<name>` columns."""
    return write_columns(path, ('t', series.name), (series.times, series.values))


def write_rows(path, header, rows):
    """Mixed-type rows; floats at full precision, everything else via str()."""
    def cell(value):
        return format(value, '.17g') if isinstance(value, float) else str(value)
    lines = [','.join(header)] + [','.join(cell(v) for v in row) for row in rows]
    atomic_write_text(path, '\n'.join(lines) + '\n')
    return path


def write_recurrence(path, rm):
    """Sparse i,j pair list preceded by a '# n=..., epsilon=...' line."""
    body = format_columns(('i', 'j'), (rm.rows, rm.cols), fmt='%d')
    atomic_write_text(path, f"# n={rm.n}, epsilon={rm.epsilon:.17g}\n{body}")
    return path


def parse_columns(text, expected=2):
    """
    Parse CSV text with a header row into (header, array).

    Raises:
        InputFormatError: with the 1-based line number of the first bad line
    """
    lines = text.split('\n')
    if lines and lines[-1] == '':
        lines.pop()
    lines = [line.rstrip('\r') for line in lines]
    if not lines:
        raise InputFormatError("file is empty", line=1)
    header = [name.strip() for name in lines[0].split(',')]
    if len(header) != expected or any(not name for name in header):
        raise InputFormatError(f"expected a header of {expected} column names, got {lines[0]!r}", line=1)
    rows = np.empty((len(lines) - 1, expected))
    for k, line in enumerate(lines[1:]):
        fields = line.split(',')
        if len(fields) != expected:
            raise InputFormatError(f"expected {expected} fields, got {len(fields)}", line=k + 2)
        try:
            rows[k] = [float(value) for value in fields]
        except ValueError:
            raise InputFormatError(f"not a number: {line!r}", line=k + 2) from None
        if not np.all(np.isfinite(rows[k])):
            raise InputFormatError(f"non-finite value: {line!r}", line=k + 2)
    return header, rows


def check_uniform(times, tolerance=UNIFORMITY_TOLERANCE):
    """
    Sampling step of a monotone, uniformly spaced time column.

    Raises:
        SamplingError: if the steps are not positive or deviate from their
            mean by more than tolerance (relative)
    """
    if times.size < 2:
        raise SamplingError("at least two samples are needed to determine the sampling step")
    steps = np.diff(times)
    dt = (times[-1] - times[0]) / (times.size - 1)
    if not np.all(steps > 0):
        bad = int(np.argmax(steps <= 0)) + 1
        raise SamplingError(f"time column is not increasing at sample {bad}")
    deviation = float(np.max(np.abs(steps - dt)) / dt)
    if deviation > tolerance:
        bad = int(np.argmax(np.abs(steps - dt))) + 1
        raise SamplingError(f"non-uniform sampling: relative step deviation {deviation:.3g} at sample {bad}")
    return float(dt)


def read_series(path, min_length=2):
    """
    Load a `t,<name>` CSV as a TimeSeries; the samples are reproduced bit-exactly.

    Raises:
        InputFormatError: on malformed content or fewer than min_length rows
        SamplingError: on non-uniform sampling
    """
    try:
        with open(path, 'r', newline='') as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise InputFormatError(f"cannot read {path}: {e}") from e
    header, rows = parse_columns(text)
    if rows.shape[0] < min_length:
        raise InputFormatError(f"{path} holds {rows.shape[0]} samples, at least {min_length} are needed")
    times = rows[:, 0]
    dt = check_uniform(times)
    logger.info(f"Loaded {rows.shape[0]} samples of '{header[1]}' from {path} (dt={dt:.6g})")
    return TimeSeries(times[0], dt, rows[:, 1], header[1])
