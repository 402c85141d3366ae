"""Deterministic CSV/JSON emission for experiment results.

Floats are written with ``repr``, the shortest decimal that round-trips to
the same double, and nothing time- or host-dependent ever enters a file, so
reruns are byte-identical.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .harness import CoefficientMoments, ResultTable
from .training import RunTrace

MSE_SWEEP_COLUMNS = ("axis", "scheme", "empirical", "closed_form", "stderr",
                     "emp_comp_interf", "emp_noise", "cf_computation",
                     "cf_interference", "cf_noise")
MOMENTS_COLUMNS = ("scheme", "device_type", "device_index", "mean",
                   "mean_stderr", "mean_target", "mean_z", "variance",
                   "var_stderr", "var_target", "var_z", "trials")
TRACE_COLUMNS = ("round", "train_loss", "test_accuracy", "global_grad_norm",
                 "error_sq_norm")


def fmt(value) -> str:
    """Round-trip-safe cell formatting; None becomes the explicit NA marker."""
    if value is None:
        return "NA"
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    return str(value)


def write_csv(path: str, header, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    lines = [",".join(header)]
    lines += [",".join(fmt(c) for c in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return "inf" if np.isinf(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_sidecar(path: str, payload: dict) -> None:
    """JSON sidecar with the full config snapshot and seed."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_mse_table(table: ResultTable, csv_path: str) -> None:
    rows = [(r["axis"], r["case"], r["empirical"], r["closed_form"],
             r["stderr"], r["emp_comp_interf"], r["emp_noise"],
             r["cf_computation"], r["cf_interference"], r["cf_noise"])
            for r in table.rows]
    write_csv(csv_path, MSE_SWEEP_COLUMNS, rows)
    write_sidecar(os.path.splitext(csv_path)[0] + ".json", table.metadata)


def moments_rows(scheme: str, moments: CoefficientMoments):
    for i, (m, v) in enumerate(zip(moments.targets, moments.target_vars)):
        yield (scheme, "target", i, m.mean, m.stderr, m.target, m.z_score,
               v.mean, v.stderr, v.target, v.z_score, moments.trials)
    for i, (m, v) in enumerate(zip(moments.interferers,
                                   moments.interferer_vars)):
        yield (scheme, "interferer", i, m.mean, m.stderr, m.target, m.z_score,
               v.mean, v.stderr, v.target, v.z_score, moments.trials)


def write_trace(trace: RunTrace, csv_path: str) -> None:
    write_csv(csv_path, TRACE_COLUMNS, trace.rows())
    write_sidecar(os.path.splitext(csv_path)[0] + ".json", trace.metadata)
