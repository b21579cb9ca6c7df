"""Metric JSON files: {dim, row-major entries, lambda_min, config echo}.

Floats serialize via Python's shortest round-trip repr, so save -> load ->
save reproduces the file byte for byte on the same platform.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import GraphMetric, SymmetricMatrix, validate_graph_metric


def metric_to_dict(metric: GraphMetric, config: dict | None = None) -> dict:
    return {
        "dim": metric.dim,
        "entries": [float(v) for v in metric.matrix.entries.ravel()],
        "lambda_min": float(metric.certificate.lambda_min),
        "config": config or {},
    }


def save_metric(metric: GraphMetric, path: str | Path,
                config: dict | None = None) -> None:
    payload = metric_to_dict(metric, config)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_metric(path: str | Path) -> tuple[GraphMetric, dict]:
    """Read a metric file and re-certify the matrix.

    Returns (metric, config echo).  The stored lambda_min is cross-checked
    against the fresh certificate.
    """
    payload = json.loads(Path(path).read_text())
    dim = int(payload["dim"])
    entries = np.array(payload["entries"], dtype=float)
    if entries.shape != (dim * dim,):
        raise ValueError(
            f"{path}: expected {dim * dim} entries, found {entries.shape[0]}")
    matrix = SymmetricMatrix(entries.reshape(dim, dim))
    metric = validate_graph_metric(matrix)
    stored = float(payload["lambda_min"])
    fresh = metric.certificate.lambda_min
    if abs(stored - fresh) > 1e-6 * max(1.0, abs(fresh)):
        raise ValueError(
            f"{path}: stored lambda_min {stored} disagrees with "
            f"recomputed {fresh}")
    return metric, payload.get("config", {})
