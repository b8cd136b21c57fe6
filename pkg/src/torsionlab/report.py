"""Deterministic report emission: versioned JSON, CSV tables.

Reports are written with sorted keys and a fixed float formatting so that
re-running an identical configuration reproduces byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os

from .errors import IoFailure

SCHEMA_VERSION = "1"


def _normalize(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_normalize(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float):
        return float(obj)
    return obj


def write_json(payload: dict, path) -> str:
    data = {"version": SCHEMA_VERSION}
    data.update(_normalize(payload))
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            json.dump(data, fh, indent=1, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write report {path}: {exc}") from exc
    return str(path)


def write_form_csv(form, path) -> str:
    """Dump a sampled form: chart, grid multi-index, component, value."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["chart", "multi_index", "component", "value"])
            import itertools

            comp_idx = list(
                itertools.combinations(range(form.atlas.dim), form.degree)
            )
            for ci, chart in enumerate(form.atlas.charts):
                for comp_i, comp in enumerate(comp_idx):
                    arr = form.comps[ci][comp_i]
                    for idx in itertools.product(*(range(s) for s in arr.shape)):
                        writer.writerow(
                            [
                                chart.name,
                                " ".join(map(str, idx)),
                                " ".join(map(str, comp)),
                                f"{float(arr[idx]):.12g}",
                            ]
                        )
    except OSError as exc:
        raise IoFailure(f"cannot write form dump {path}: {exc}") from exc
    return str(path)


def write_triples_csv(rows, path, header=("input", "value", "error_bound")) -> str:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(header))
            for row in rows:
                writer.writerow([str(c) for c in row])
    except OSError as exc:
        raise IoFailure(f"cannot write table {path}: {exc}") from exc
    return str(path)
