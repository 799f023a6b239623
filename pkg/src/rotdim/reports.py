"""Deterministic report files and the run manifest.

Data files never contain timestamps; the manifest holds them together with a
sha256 for every emitted file.  All writes go through a temporary file in the
target directory followed by os.replace.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional

from . import __version__


def _default(o):
    if isinstance(o, Fraction):
        return str(o)
    if hasattr(o, "to_json"):
        return o.to_json()
    try:
        import numpy as np
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return repr(float(o))
    except ImportError:  # pragma: no cover
        pass
    return str(o)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default, ensure_ascii=False) + "\n"


def csv_text(rows: List[dict], header: Optional[List[str]] = None) -> str:
    if header is None:
        header = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def atomic_write(path: Path, data: str) -> str:
    """Write UTF-8 text atomically; returns its sha256."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix="." + path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return hashlib.sha256(raw).hexdigest()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    config_sha256: str
    out_dir: Path
    tool_version: str = __version__
    started: str = field(default_factory=_now)
    finished: Optional[str] = None
    exit_code: int = 0
    files: List[dict] = field(default_factory=list)

    def write_json(self, name: str, obj) -> Path:
        return self._emit(name, dumps(obj))

    def write_csv(self, name: str, rows: List[dict], header: Optional[List[str]] = None) -> Path:
        return self._emit(name, csv_text(rows, header))

    def _emit(self, name: str, text: str) -> Path:
        p = Path(self.out_dir) / name
        digest = atomic_write(p, text)
        self.files = [f for f in self.files if f["name"] != name]
        self.files.append({"name": name, "sha256": digest, "bytes": len(text.encode("utf-8"))})
        return p

    def close(self, exit_code: int = 0) -> Path:
        self.finished = _now()
        self.exit_code = exit_code
        body = {
            "command": self.command,
            "config_sha256": self.config_sha256,
            "tool_version": self.tool_version,
            "started": self.started,
            "finished": self.finished,
            "exit_code": exit_code,
            "files": sorted(self.files, key=lambda f: f["name"]),
        }
        p = Path(self.out_dir) / "manifest.json"
        atomic_write(p, dumps(body))
        return p
