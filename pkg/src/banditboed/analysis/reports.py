"""Delimited and JSON report writers for the analysis outputs."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .plots import MODEL_LABELS


def write_confusion_csv(confusion, path, labels=MODEL_LABELS) -> None:
    norm = confusion.normalized()
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true_model"] + [f"inferred_{m.lower()}" for m in labels] + ["n"])
        for i, label in enumerate(labels):
            writer.writerow(
                [label] + [f"{v:.6f}" for v in norm[i]] + [int(confusion.counts[i].sum())]
            )


def write_entropy_csv(reports, path) -> None:
    """One row per dataset: condition, kind, entropy."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["condition", "kind", "entropy_nats"])
        for report in reports:
            for value in report.entropies:
                writer.writerow([report.condition, report.kind, f"{value:.8f}"])


def write_json(payload, path) -> None:
    Path(path).write_text(json.dumps(_to_jsonable(payload), indent=2) + "\n")


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj
