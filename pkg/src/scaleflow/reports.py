"""Report emission: CSV tables, JSON certificates, plot-ready curves.

Outputs are byte-stable for a fixed config: float fields use shortest
round-trip formatting, JSON keys are sorted, and no timestamps appear.
Every file starts from a header carrying the tool version, the kernel
backend, the sampling seed and the SHA-256 digest of the config file.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os

from . import __version__
from .kernels import BACKEND


def config_digest(path: str) -> str:
    with open(path, "rb") as handle:
        return hashlib.sha256(handle.read()).hexdigest()


def report_header(digest: str, seed: int) -> dict:
    return {
        "tool": "scaleflow",
        "version": __version__,
        "backend": BACKEND,
        "seed": seed,
        "config_sha256": digest,
    }


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, complex):
        return repr(value)
    if isinstance(value, float):
        return repr(value)
    return value


def write_csv(path: str, fieldnames, rows, header: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    buffer = io.StringIO()
    for key, value in header.items():
        buffer.write(f"# {key}: {value}\n")
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _format(row.get(k)) for k in fieldnames})
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(buffer.getvalue())


class _Encoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, complex):
            return {"re": o.real, "im": o.imag}
        if isinstance(o, float) and not math.isfinite(o):
            return repr(o)
        try:
            import numpy as np

            if isinstance(o, np.ndarray):
                return o.tolist()
            if isinstance(o, (np.floating, np.integer)):
                return o.item()
            if isinstance(o, np.complexfloating):
                return {"re": float(o.real), "im": float(o.imag)}
        except ImportError:
            pass
        return super().default(o)

    def iterencode(self, o, _one_shot=False):
        # route non-finite floats through repr so output stays valid text
        return super().iterencode(_sanitize(o), _one_shot)


def _sanitize(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def write_json(path: str, payload: dict, header: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    document = {"header": header, **payload}
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, cls=_Encoder, sort_keys=True, indent=2)
        handle.write("\n")


def write_curve(path: str, points, header: dict) -> None:
    """Two-column whitespace-separated plot data, one file per curve."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for key, value in header.items():
            handle.write(f"# {key}: {value}\n")
        for x, y in points:
            handle.write(f"{_format(float(x))} {_format(float(y))}\n")


def log_error_curve(rows, eps_key: str = "eps", err_key: str = "abs_err", floor: float = 1e-300):
    return [
        (math.log(abs(row[eps_key])), math.log(max(row[err_key], floor)))
        for row in rows
    ]
