"""Stable output formats: CSV with 17-significant-digit floats and JSON
manifests carrying the fully resolved configuration."""

from __future__ import annotations

import json
import os


def fmt(x) -> str:
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path: str, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def write_manifest(path: str, payload: dict):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)

    def default(o):
        import numpy as np
        if isinstance(o, complex):
            return {"re": o.real, "im": o.imag}
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.complexfloating):
            return {"re": float(o.real), "im": float(o.imag)}
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"not JSON serializable: {type(o)}")

    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=default)
        fh.write("\n")
