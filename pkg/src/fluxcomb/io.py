"""Deterministic run output: CSV tables and a manifest.

Floats are rendered as {:.12e} with LF line endings so identical
configurations produce byte-identical files on every platform.
"""

import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__

FLOAT_FMT = "{:.12e}"


def format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return FLOAT_FMT.format(float(value))


def write_csv(path: Path, header: str, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(format_cell(v) for v in row) + "\n")
    return path


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def file_entry(out_dir: Path, path: Path) -> dict:
    path = Path(path)
    return {
        "path": path.relative_to(out_dir).as_posix(),
        "sha256": sha256_of(path),
        "bytes": path.stat().st_size,
    }


def write_manifest(out_dir: Path, scenario: str, config: dict, seed,
                   files, backend: str) -> Path:
    """files: paths inside out_dir; entries are sorted by path so the
    manifest itself is reproducible."""
    entries = sorted((file_entry(out_dir, p) for p in files),
                     key=lambda e: e["path"])
    manifest = {
        "scenario": scenario,
        "config": config,
        "seed": seed,
        "backend": backend,
        "versions": {
            "python": ".".join(str(v) for v in sys.version_info[:3]),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "fluxcomb": __version__,
        },
        "files": entries,
    }
    path = Path(out_dir) / "manifest.json"
    with open(path, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
