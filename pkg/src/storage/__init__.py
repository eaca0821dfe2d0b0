"""
Storage package.
Full-precision CSV files, atomic writes and result-bundle manifests.
"""

from .atomic import atomic_write_bytes, atomic_write_text
from .csv_io import check_uniform, read_series, write_columns, write_recurrence, write_rows, write_series
from .bundle import ResultBundle, read_manifest, write_manifest

__all__ = [
    'atomic_write_bytes', 'atomic_write_text',
    'check_uniform', 'read_series', 'write_columns', 'write_recurrence', 'write_rows', 'write_series',
    'ResultBundle', 'read_manifest', 'write_manifest',
]
