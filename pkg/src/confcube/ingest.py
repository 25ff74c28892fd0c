"""Fold-log parsing, serialization, and run assembly.

A fold log is one JSON document per (run, fold) holding the class alphabet
and per-iteration results in one of two payload variants:

* perInstance - ground-truth ``labels`` once, plus per-epoch ``predictions``
  (one predicted class index per instance). The smallest thing a training
  loop can log.
* aggregated - per-epoch ``confusion`` matrices (row-major, row = ground
  truth), for producers that pre-aggregate large datasets.

Field names are part of the wire contract: ``runId``, ``dataset``,
``fold``, ``classes``, ``labels``, ``epochs[].iterationId``,
``epochs[].predictions``, ``epochs[].confusion``. Unknown fields are
ignored so logging adapters can attach their own metadata. The formal
schema ships in docs/foldlog.schema.json.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .errors import (
    AggregatedShapeMismatch,
    AlphabetMismatch,
    DuplicateRunId,
    InvariantViolation,
    MalformedDocument,
    SchemaViolation,
)
from .model import (
    ClassAlphabet,
    ConfusionCube,
    EpochConfusion,
    RunMeta,
    RunSet,
    confusion_from_predictions,
)

__all__ = [
    "FoldLog",
    "EpochPredictions",
    "EpochMatrix",
    "parse_fold_log",
    "serialize_fold_log",
    "build_run",
    "merge_runs",
]


@dataclass(frozen=True)
class EpochPredictions:
    iteration_id: int
    predictions: tuple[int, ...]


@dataclass(frozen=True)
class EpochMatrix:
    iteration_id: int
    confusion: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class FoldLog:
    """Parsed fold-log document. Exactly one of ``labels``/``matrices``
    payload variants is populated."""

    run_id: str
    dataset: str
    fold: str
    classes: tuple[str, ...]
    labels: tuple[int, ...] | None = None
    prediction_epochs: tuple[EpochPredictions, ...] | None = None
    matrix_epochs: tuple[EpochMatrix, ...] | None = None
    description: str | None = None

    @property
    def k(self) -> int:
        return len(self.classes)

    @property
    def is_per_instance(self) -> bool:
        return self.labels is not None


def _require(doc: dict, key: str, kind: type, kindname: str) -> object:
    if key not in doc:
        raise SchemaViolation(f"missing required field {key!r}")
    value = doc[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaViolation(f"field {key!r} must be a {kindname}")
    return value


def _int_list(values: object, where: str) -> tuple[int, ...]:
    if not isinstance(values, list) or not values:
        raise SchemaViolation(f"{where} must be a non-empty array")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, int):
            raise SchemaViolation(f"{where} must contain only integers")
        out.append(v)
    return tuple(out)


def _matrix(values: object, where: str) -> tuple[tuple[int, ...], ...]:
    if not isinstance(values, list) or not values:
        raise SchemaViolation(f"{where} must be a non-empty array of rows")
    rows = []
    width = None
    for r, row in enumerate(values):
        parsed = _int_list(row, f"{where} row {r}")
        if width is None:
            width = len(parsed)
        elif len(parsed) != width:
            raise SchemaViolation(f"{where} is not rectangular")
        rows.append(parsed)
    return tuple(rows)


def parse_fold_log(data: bytes | str) -> FoldLog:
    """Parse and validate one fold-log document.

    Raises MalformedDocument for non-JSON input, SchemaViolation for
    structural problems (missing fields, both or neither payload variant,
    ragged matrices), and InvariantViolation for violated data invariants
    (fewer than two classes, non-increasing iteration ids, empty epochs).
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"input is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"input is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedDocument("top level must be a JSON object")

    run_id = _require(doc, "runId", str, "string")
    dataset = _require(doc, "dataset", str, "string")
    fold = _require(doc, "fold", str, "string")
    classes = _require(doc, "classes", list, "array")
    if not all(isinstance(c, str) for c in classes):
        raise SchemaViolation("field 'classes' must contain only strings")
    if len(classes) < 2:
        raise SchemaViolation(f"need at least 2 classes, got {len(classes)}")
    if len(set(classes)) != len(classes):
        raise InvariantViolation("class names must be unique")
    description = doc.get("description")
    if description is not None and not isinstance(description, str):
        raise SchemaViolation("field 'description' must be a string")

    epochs = _require(doc, "epochs", list, "array")
    if not epochs:
        raise SchemaViolation("field 'epochs' must be non-empty")

    has_labels = "labels" in doc
    iteration_ids: list[int] = []
    pred_epochs: list[EpochPredictions] = []
    matrix_epochs: list[EpochMatrix] = []
    for idx, epoch in enumerate(epochs):
        if not isinstance(epoch, dict):
            raise SchemaViolation(f"epochs[{idx}] must be an object")
        t = epoch.get("iterationId")
        if isinstance(t, bool) or not isinstance(t, int):
            raise SchemaViolation(f"epochs[{idx}].iterationId must be an integer")
        if t < 0:
            raise InvariantViolation(f"epochs[{idx}].iterationId must be >= 0")
        iteration_ids.append(t)
        has_preds = "predictions" in epoch
        has_matrix = "confusion" in epoch
        if has_preds and has_matrix:
            raise SchemaViolation(
                f"epochs[{idx}] carries both 'predictions' and 'confusion'"
            )
        if has_preds:
            if not has_labels:
                raise SchemaViolation(
                    "per-instance epochs require a top-level 'labels' field"
                )
            pred_epochs.append(
                EpochPredictions(t, _int_list(epoch["predictions"], f"epochs[{idx}].predictions"))
            )
        elif has_matrix:
            if has_labels:
                raise SchemaViolation(
                    "'labels' is only valid together with per-instance predictions"
                )
            matrix_epochs.append(
                EpochMatrix(t, _matrix(epoch["confusion"], f"epochs[{idx}].confusion"))
            )
        else:
            raise SchemaViolation(
                f"epochs[{idx}] needs either 'predictions' or 'confusion'"
            )
    if pred_epochs and matrix_epochs:
        raise SchemaViolation("cannot mix per-instance and aggregated epochs")

    if any(b <= a for a, b in zip(iteration_ids, iteration_ids[1:])):
        raise InvariantViolation("iterationId values must be strictly increasing")

    labels = None
    if has_labels:
        if not pred_epochs:
            raise SchemaViolation("'labels' given but epochs carry no 'predictions'")
        labels = _int_list(doc["labels"], "labels")

    return FoldLog(
        run_id=run_id,
        dataset=dataset,
        fold=fold,
        classes=tuple(classes),
        labels=labels,
        prediction_epochs=tuple(pred_epochs) or None,
        matrix_epochs=tuple(matrix_epochs) or None,
        description=description,
    )


def serialize_fold_log(log: FoldLog, indent: int | None = None) -> str:
    """Inverse of parse_fold_log: parse(serialize(log)) == log."""
    doc: dict = {
        "runId": log.run_id,
        "dataset": log.dataset,
        "fold": log.fold,
        "classes": list(log.classes),
    }
    if log.description is not None:
        doc["description"] = log.description
    if log.is_per_instance:
        doc["labels"] = list(log.labels or ())
        doc["epochs"] = [
            {"iterationId": e.iteration_id, "predictions": list(e.predictions)}
            for e in log.prediction_epochs or ()
        ]
    else:
        doc["epochs"] = [
            {"iterationId": e.iteration_id, "confusion": [list(r) for r in e.confusion]}
            for e in log.matrix_epochs or ()
        ]
    return json.dumps(doc, indent=indent)


def build_run(log: FoldLog) -> tuple[RunMeta, ConfusionCube]:
    """Turn a fold log into run metadata plus a confusion cube.

    Per-instance payloads are aggregated; matrix payloads are copied
    verbatim after a shape check. The hue index stays -1 until the run
    joins a RunSet. Every epoch must classify at least one instance.
    """
    alphabet = ClassAlphabet(log.classes)
    meta = RunMeta(
        run_id=log.run_id,
        dataset=log.dataset,
        fold=log.fold,
        description=log.description,
    )
    if log.is_per_instance:
        assert log.prediction_epochs is not None and log.labels is not None
        cube = confusion_from_predictions(
            list(log.labels),
            [list(e.predictions) for e in log.prediction_epochs],
            alphabet,
            iteration_ids=[e.iteration_id for e in log.prediction_epochs],
        )
        return meta, cube

    assert log.matrix_epochs is not None
    epochs = []
    for e in log.matrix_epochs:
        counts = np.asarray(e.confusion, dtype=np.int64)
        if counts.shape != (log.k, log.k):
            raise AggregatedShapeMismatch(
                f"iteration {e.iteration_id}: matrix is {counts.shape[0]}x"
                f"{counts.shape[1]}, expected {log.k}x{log.k}"
            )
        if counts.min() < 0:
            raise InvariantViolation(
                f"iteration {e.iteration_id}: negative confusion count"
            )
        if counts.sum() == 0:
            raise InvariantViolation(
                f"iteration {e.iteration_id}: epoch classifies no instances"
            )
        epochs.append(EpochConfusion(e.iteration_id, counts))
    return meta, ConfusionCube(alphabet=alphabet, epochs=tuple(epochs))


def merge_runs(logs: Iterable[FoldLog]) -> RunSet:
    """Build a RunSet from fold logs, in input order.

    Hue indices are the input positions, so colors are reproducible across
    restarts. All logs must share an identical alphabet (same labels, same
    order); reconciliation is out of scope because silent reindexing would
    corrupt comparisons.
    """
    logs = list(logs)
    if not logs:
        raise SchemaViolation("need at least one fold log")
    runs: list[tuple[RunMeta, ConfusionCube]] = []
    seen: set[str] = set()
    reference: tuple[str, ...] | None = None
    for log in logs:
        if log.run_id in seen:
            raise DuplicateRunId(f"duplicate run id {log.run_id!r}")
        seen.add(log.run_id)
        if reference is None:
            reference = log.classes
        elif log.classes != reference:
            raise AlphabetMismatch(
                f"run {log.run_id!r}: classes {list(log.classes)} do not match "
                f"{list(reference)}"
            )
        meta, cube = build_run(log)
        runs.append((replace(meta, hue_index=len(runs)), cube))
    return RunSet(runs=tuple(runs))
