import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confcube.errors import (
    AggregatedShapeMismatch,
    AlphabetMismatch,
    DuplicateRunId,
    IndexOutOfAlphabet,
    InvariantViolation,
    MalformedDocument,
    SchemaViolation,
)
from confcube.ingest import (
    EpochMatrix,
    EpochPredictions,
    FoldLog,
    build_run,
    merge_runs,
    parse_fold_log,
    serialize_fold_log,
)
from confcube.model import confusion_from_predictions, validate_cube

from conftest import FIVE_LABELS, FIVE_PREDS_E0, FIVE_COUNTS_E0


def doc_aggregated(run_id="r1", classes=("a", "b"), epochs=None, **extra):
    doc = {
        "runId": run_id,
        "dataset": "toy",
        "fold": "train",
        "classes": list(classes),
        "epochs": epochs
        if epochs is not None
        else [{"iterationId": 0, "confusion": [[1, 0], [0, 1]]}],
    }
    doc.update(extra)
    return json.dumps(doc)


def doc_per_instance(run_id="r1", classes=("a", "b", "c"), labels=None, epochs=None):
    return json.dumps(
        {
            "runId": run_id,
            "dataset": "toy",
            "fold": "train",
            "classes": list(classes),
            "labels": labels if labels is not None else FIVE_LABELS,
            "epochs": epochs
            if epochs is not None
            else [{"iterationId": 0, "predictions": FIVE_PREDS_E0}],
        }
    )


class TestParse:
    def test_minimal_aggregated(self):
        log = parse_fold_log(doc_aggregated())
        assert log.k == 2
        assert not log.is_per_instance
        assert len(log.matrix_epochs) == 1

    def test_single_class_rejected(self):
        with pytest.raises(SchemaViolation):
            parse_fold_log(doc_aggregated(classes=("a",)))

    def test_per_instance_example(self):
        log = parse_fold_log(doc_per_instance())
        meta, cube = build_run(log)
        assert cube.epochs[0].counts.tolist() == FIVE_COUNTS_E0
        assert meta.run_id == "r1"
        assert meta.hue_index == -1

    def test_malformed_json(self):
        with pytest.raises(MalformedDocument):
            parse_fold_log(b"{not json")

    def test_non_utf8(self):
        with pytest.raises(MalformedDocument):
            parse_fold_log(b"\xff\xfe{}")

    def test_top_level_array(self):
        with pytest.raises(MalformedDocument):
            parse_fold_log(b"[1, 2]")

    def test_missing_field(self):
        doc = json.loads(doc_aggregated())
        del doc["fold"]
        with pytest.raises(SchemaViolation):
            parse_fold_log(json.dumps(doc))

    def test_both_payload_variants(self):
        doc = json.loads(doc_per_instance())
        doc["epochs"][0]["confusion"] = [[1, 0], [0, 1]]
        with pytest.raises(SchemaViolation):
            parse_fold_log(json.dumps(doc))

    def test_neither_payload_variant(self):
        with pytest.raises(SchemaViolation):
            parse_fold_log(doc_aggregated(epochs=[{"iterationId": 0}]))

    def test_labels_without_predictions(self):
        with pytest.raises(SchemaViolation):
            parse_fold_log(doc_aggregated(labels=[0, 1]))

    def test_non_rectangular_matrix(self):
        with pytest.raises(SchemaViolation):
            parse_fold_log(
                doc_aggregated(epochs=[{"iterationId": 0, "confusion": [[1, 0], [1]]}])
            )

    def test_duplicate_iteration_id(self):
        epochs = [
            {"iterationId": 3, "confusion": [[1, 0], [0, 1]]},
            {"iterationId": 3, "confusion": [[1, 0], [0, 1]]},
        ]
        with pytest.raises(InvariantViolation):
            parse_fold_log(doc_aggregated(epochs=epochs))

    def test_negative_iteration_id(self):
        with pytest.raises(InvariantViolation):
            parse_fold_log(
                doc_aggregated(epochs=[{"iterationId": -1, "confusion": [[1, 0], [0, 1]]}])
            )

    def test_empty_epochs(self):
        with pytest.raises(SchemaViolation):
            parse_fold_log(doc_aggregated(epochs=[]))

    def test_unknown_fields_ignored(self):
        log = parse_fold_log(doc_aggregated(framework="torch", note=42))
        assert log.run_id == "r1"

    def test_boolean_is_not_an_integer(self):
        with pytest.raises(SchemaViolation):
            parse_fold_log(
                doc_aggregated(epochs=[{"iterationId": True, "confusion": [[1, 0], [0, 1]]}])
            )

    def test_description_carried(self):
        log = parse_fold_log(doc_aggregated(description="baseline net"))
        assert log.description == "baseline net"
        meta, _ = build_run(log)
        assert meta.description == "baseline net"

    def test_duplicate_class_names(self):
        with pytest.raises(InvariantViolation):
            parse_fold_log(doc_aggregated(classes=("a", "a")))


class TestBuildRun:
    def test_aggregated_pass_through(self):
        log = parse_fold_log(
            doc_aggregated(epochs=[{"iterationId": 0, "confusion": [[5, 0], [0, 5]]}])
        )
        _, cube = build_run(log)
        assert cube.epochs[0].counts.tolist() == [[5, 0], [0, 5]]

    def test_aggregated_shape_mismatch(self):
        epochs = [{"iterationId": 0, "confusion": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}]
        with pytest.raises(AggregatedShapeMismatch):
            build_run(parse_fold_log(doc_aggregated(epochs=epochs)))

    def test_negative_count_rejected_at_build(self):
        epochs = [{"iterationId": 0, "confusion": [[1, -1], [0, 1]]}]
        with pytest.raises(InvariantViolation):
            build_run(parse_fold_log(doc_aggregated(epochs=epochs)))

    def test_empty_epoch_rejected_at_build(self):
        epochs = [{"iterationId": 0, "confusion": [[0, 0], [0, 0]]}]
        with pytest.raises(InvariantViolation):
            build_run(parse_fold_log(doc_aggregated(epochs=epochs)))

    def test_prediction_out_of_alphabet_propagates(self):
        doc = doc_per_instance(
            classes=("a", "b"), labels=[0, 1], epochs=[{"iterationId": 0, "predictions": [0, 5]}]
        )
        with pytest.raises(IndexOutOfAlphabet):
            build_run(parse_fold_log(doc))

    def test_built_cube_validates_clean(self):
        _, cube = build_run(parse_fold_log(doc_per_instance()))
        assert validate_cube(cube) == []


class TestMergeRuns:
    def test_two_folds_hue_order(self):
        logs = [
            parse_fold_log(doc_aggregated(run_id="train")),
            parse_fold_log(doc_aggregated(run_id="test")),
        ]
        rs = merge_runs(logs)
        assert rs.run_ids == ["train", "test"]
        assert [m.hue_index for m, _ in rs.runs] == [0, 1]

    def test_alphabet_order_matters(self):
        logs = [
            parse_fold_log(doc_aggregated(run_id="a", classes=("a", "b"))),
            parse_fold_log(doc_aggregated(run_id="b", classes=("b", "a"))),
        ]
        with pytest.raises(AlphabetMismatch):
            merge_runs(logs)

    def test_three_fold_comparison_setup(self):
        # train / test / alternative-test on one alphabet
        logs = [
            parse_fold_log(doc_aggregated(run_id="cifar-train")),
            parse_fold_log(doc_aggregated(run_id="cifar-test")),
            parse_fold_log(doc_aggregated(run_id="cifar-test-v2")),
        ]
        rs = merge_runs(logs)
        assert len(rs.runs) == 3
        assert [m.hue_index for m, _ in rs.runs] == [0, 1, 2]

    def test_duplicate_run_id(self):
        logs = [
            parse_fold_log(doc_aggregated(run_id="same")),
            parse_fold_log(doc_aggregated(run_id="same")),
        ]
        with pytest.raises(DuplicateRunId):
            merge_runs(logs)

    def test_no_logs(self):
        with pytest.raises(SchemaViolation):
            merge_runs([])

    @given(st.integers(1, 8))
    @settings(max_examples=20)
    def test_hue_assignment_is_bijective(self, n_runs):
        logs = [parse_fold_log(doc_aggregated(run_id=f"r{i}")) for i in range(n_runs)]
        rs = merge_runs(logs)
        hues = [m.hue_index for m, _ in rs.runs]
        assert sorted(hues) == list(range(n_runs))


# Strategies for round-trip checks.
@st.composite
def fold_logs(draw):
    k = draw(st.integers(2, 5))
    classes = tuple(f"c{i}" for i in range(k))
    run_id = draw(st.text(min_size=1, max_size=8))
    per_instance = draw(st.booleans())
    n_epochs = draw(st.integers(1, 4))
    iteration_ids = sorted(
        draw(
            st.lists(
                st.integers(0, 50), min_size=n_epochs, max_size=n_epochs, unique=True
            )
        )
    )
    if per_instance:
        n = draw(st.integers(1, 15))
        labels = tuple(draw(st.integers(0, k - 1)) for _ in range(n))
        epochs = tuple(
            EpochPredictions(
                t, tuple(draw(st.integers(0, k - 1)) for _ in range(n))
            )
            for t in iteration_ids
        )
        return FoldLog(
            run_id=run_id,
            dataset="ds",
            fold="train",
            classes=classes,
            labels=labels,
            prediction_epochs=epochs,
        )
    epochs = []
    for t in iteration_ids:
        matrix = tuple(
            tuple(draw(st.integers(0, 9)) for _ in range(k)) for _ in range(k)
        )
        epochs.append(EpochMatrix(t, matrix))
    return FoldLog(
        run_id=run_id,
        dataset="ds",
        fold="test",
        classes=classes,
        matrix_epochs=tuple(epochs),
    )


class TestRoundTrip:
    @given(fold_logs())
    @settings(max_examples=60)
    def test_serialize_parse_identity(self, log):
        assert parse_fold_log(serialize_fold_log(log)) == log

    def test_serialize_parse_identity_example(self):
        log = parse_fold_log(doc_per_instance())
        assert parse_fold_log(serialize_fold_log(log)) == log

    @given(st.integers(2, 5), st.integers(1, 20), st.integers(1, 4))
    @settings(max_examples=40)
    def test_per_instance_equals_pre_aggregated(self, k, n, n_epochs):
        rng = random.Random(k * 1009 + n * 13 + n_epochs)
        labels = [rng.randrange(k) for _ in range(n)]
        preds = [[rng.randrange(k) for _ in range(n)] for _ in range(n_epochs)]
        classes = tuple(f"c{i}" for i in range(k))
        per_instance = FoldLog(
            run_id="r",
            dataset="ds",
            fold="train",
            classes=classes,
            labels=tuple(labels),
            prediction_epochs=tuple(
                EpochPredictions(t, tuple(p)) for t, p in enumerate(preds)
            ),
        )
        oracle = confusion_from_predictions(labels, preds, k)
        aggregated = FoldLog(
            run_id="r",
            dataset="ds",
            fold="train",
            classes=classes,
            matrix_epochs=tuple(
                EpochMatrix(t, tuple(tuple(int(v) for v in row) for row in e.counts))
                for t, e in enumerate(oracle.epochs)
            ),
        )
        _, cube_a = build_run(per_instance)
        _, cube_b = build_run(aggregated)
        assert cube_a == cube_b


class TestSchemaDocument:
    def test_examples_validate_against_shipped_schema(self):
        jsonschema = pytest.importorskip("jsonschema")
        from pathlib import Path

        schema = json.loads(
            (Path(__file__).resolve().parents[1] / "docs" / "foldlog.schema.json").read_text()
        )
        jsonschema.validate(json.loads(doc_aggregated()), schema)
        jsonschema.validate(json.loads(doc_per_instance()), schema)
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate({"runId": "x"}, schema)
