"""
Bundle Module
Result bundles: the files written by one run and the manifest that ties
them to the configuration that produced them.
"""

import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Optional

from src import __version__
from src.storage.atomic import atomic_write_text

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'


def _jsonable(value):
    """Replace NaN and infinities by None and numpy scalars by Python ones."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, 'item') and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def dump_manifest(payload):
    """Key-sorted JSON text of a manifest."""
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + '\n'


def write_manifest(path, payload):
    atomic_write_text(path, dump_manifest(payload))
    return path


def read_manifest(path):
    """Parsed manifest, or None when the file is missing or unreadable."""
    if not os.path.exists(path):
        return None
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except (OSError, ValueError) as e:
        logger.error(f"Error loading manifest {path}: {e}")
        return None


@dataclass
class ResultBundle:
    """
    Files of one run, relative to `directory`.

    Args:
        directory (str): Output directory
        config (dict): Serialized configuration
        config_hash (str): sha1 of the key-sorted config
        files (dict): role -> file name
        label (str): Regime label, when one was computed
        extra (dict): Further manifest entries (features, failures, ...)
    """

    directory: str
    config: dict
    config_hash: str
    files: dict = field(default_factory=dict)
    label: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def path(self, name):
        return os.path.join(self.directory, name)

    def add(self, role, name):
        """Register a written file under a role and return its full path."""
        self.files[role] = name
        return self.path(name)

    def missing_files(self):
        return sorted(name for name in self.files.values() if not os.path.exists(self.path(name)))

    @property
    def manifest_path(self):
        return self.path(MANIFEST_NAME)

    def manifest(self):
        payload = {
            'config': self.config,
            'config_hash': self.config_hash,
            'files': dict(self.files),
            'label': self.label,
            'tool': 'qosc',
            'version': __version__,
        }
        payload.update(self.extra)
        return payload

    def write_manifest(self):
        """Write the manifest last, once every referenced file exists."""
        missing = self.missing_files()
        if missing:
            raise FileNotFoundError(f"bundle files missing: {', '.join(missing)}")
        write_manifest(self.manifest_path, self.manifest())
        logger.info(f"Wrote manifest for {len(self.files)} files to {self.manifest_path}")
        return self.manifest_path

    @classmethod
    def load(cls, directory):
        payload = read_manifest(os.path.join(directory, MANIFEST_NAME))
        if payload is None:
            return None
        extra = {k: v for k, v in payload.items()
                 if k not in ('config', 'config_hash', 'files', 'label', 'tool', 'version')}
        return cls(directory, payload['config'], payload['config_hash'],
                   payload.get('files', {}), payload.get('label'), extra)
