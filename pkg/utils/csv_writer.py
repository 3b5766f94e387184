"""
CSV artifacts with a provenance header, written atomically.
"""

from pathlib import Path
from typing import Any, Dict, Iterable, Sequence
import csv
import json
import logging
import os
import tempfile

logger = logging.getLogger(__name__)


def format_cell(value: Any) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return f"{float(value):.12g}"


def provenance_line(provenance: Dict[str, Any]) -> str:
    """'# ' followed by the provenance mapping as sorted compact JSON."""
    return "# " + json.dumps(provenance, sort_keys=True, separators=(",", ":"), default=str)


def write_csv(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    provenance: Dict[str, Any],
) -> Path:
    """
    Write a CSV table next to its final location, then rename it into place.

    Args:
        path: Destination file
        columns: Header names
        rows: Row values; floats are written with 12 significant digits
        provenance: Resolved configuration and seed, stored on the first line

    Returns:
        The destination path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as f:
            f.write(provenance_line(provenance) + "\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(list(columns))
            for row in rows:
                writer.writerow([format_cell(v) for v in row])
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.info(f"Wrote {path}")
    return path


def read_csv(path: Path):
    """
    Read a table written by write_csv.

    Returns:
        Tuple of (provenance dict, column names, rows of strings)
    """
    with Path(path).open(newline="", encoding="utf-8") as f:
        first = f.readline()
        provenance = json.loads(first[2:]) if first.startswith("# ") else {}
        reader = csv.reader(f)
        columns = next(reader)
        rows = [row for row in reader]
    return provenance, columns, rows
