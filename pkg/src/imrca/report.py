"""Output plumbing shared by the CLI: number formatting, atomic writes, run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import shutil
import tempfile
from importlib import metadata
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .catalog import CATALOG_VERSION

SIG_DIGITS = 12


def fmt(x: float) -> str:
    """12 significant digits; integral values keep a trailing ``.0``; nan/inf spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.{SIG_DIGITS}g}"
    if not any(ch in s for ch in ".e"):
        s += ".0"
    return s


def csv_text(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_text(path: Path | str, text: str) -> Path:
    """Write via a sibling temp file and rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def replace_dir(tmp: Path, dest: Path) -> None:
    """Move a fully written temp directory into place, replacing any previous one."""
    if dest.exists():
        old = dest.with_name(f".{dest.name}.old")
        shutil.rmtree(old, ignore_errors=True)
        os.replace(dest, old)
        os.replace(tmp, dest)
        shutil.rmtree(old, ignore_errors=True)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        os.replace(tmp, dest)


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def manifest_text(command: str, config: Mapping[str, object], outputs: Sequence[Path], base: Path | None = None) -> str:
    """JSON manifest: config, catalog and tool version, and a digest per output.

    Contains no timestamps or absolute paths so identical runs give identical bytes.
    """

    def rel(p: Path) -> str:
        if base is not None:
            try:
                return p.resolve().relative_to(base.resolve()).as_posix()
            except ValueError:
                pass
        return p.name

    body = {
        "command": command,
        "config": dict(sorted(config.items())),
        "catalog_version": CATALOG_VERSION,
        "tool_version": tool_version(),
        "outputs": {rel(p): sha256(p) for p in sorted(outputs, key=rel)},
    }
    return json.dumps(body, indent=2, sort_keys=False, default=str) + "\n"
