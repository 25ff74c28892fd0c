"""Core domain model: class alphabets, per-epoch confusion matrices, and
confusion cubes (one K x K count matrix per logged training iteration).

Orientation is fixed throughout the package: row = ground-truth class,
column = predicted class. Iteration indices are opaque integers; they may
stand for epochs, minibatches, or labeling steps and need not be evenly
spaced.

Cubes and run sets are immutable after construction and safe for concurrent
reads. Construction is deliberately permissive; ``validate_cube`` reports
invariant violations as data so that broken inputs can be diagnosed rather
than only rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AlphabetMismatch,
    DuplicateRunId,
    EmptyInput,
    IndexOutOfAlphabet,
    InvariantViolation,
    LengthMismatch,
    UnknownClass,
)

__all__ = [
    "ClassAlphabet",
    "EpochConfusion",
    "ConfusionCube",
    "RunMeta",
    "RunSet",
    "Violation",
    "confusion_from_predictions",
    "validate_cube",
]


@dataclass(frozen=True)
class ClassAlphabet:
    """Ordered, immutable list of class names. Index of a label is stable."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) < 2:
            raise InvariantViolation(
                f"alphabet needs at least 2 classes, got {len(self.labels)}"
            )
        if len(set(self.labels)) != len(self.labels):
            raise InvariantViolation("alphabet labels must be unique")

    @property
    def size(self) -> int:
        return len(self.labels)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownClass(f"unknown class label {label!r}") from None

    @classmethod
    def of_size(cls, k: int) -> "ClassAlphabet":
        """Anonymous alphabet with stringified indices as labels."""
        return cls(tuple(str(i) for i in range(k)))


def _freeze(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts)
    counts.setflags(write=False)
    return counts


@dataclass(frozen=True, eq=False)
class EpochConfusion:
    """One confusion matrix at iteration ``iteration``.

    ``counts[i, j]`` is the number of instances with ground-truth class i
    that were predicted as class j at this iteration.
    """

    iteration: int
    counts: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", _freeze(self.counts))

    @property
    def total(self) -> float:
        """Number of instances classified at this iteration."""
        return self.counts.sum()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EpochConfusion):
            return NotImplemented
        return self.iteration == other.iteration and np.array_equal(self.counts, other.counts)

    def __hash__(self) -> int:
        return hash((self.iteration, self.counts.tobytes()))


@dataclass(frozen=True, eq=False)
class ConfusionCube:
    """Confusion matrices for one run across its logged iterations."""

    alphabet: ClassAlphabet
    epochs: tuple[EpochConfusion, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "epochs", tuple(self.epochs))

    @property
    def iterations(self) -> list[int]:
        return [e.iteration for e in self.epochs]

    def epoch_at(self, iteration: int) -> EpochConfusion | None:
        for e in self.epochs:
            if e.iteration == iteration:
                return e
        return None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConfusionCube):
            return NotImplemented
        return self.alphabet == other.alphabet and self.epochs == other.epochs

    def __hash__(self) -> int:
        return hash((self.alphabet, self.epochs))


@dataclass(frozen=True)
class RunMeta:
    """Identity of one classification run on one dataset fold.

    ``hue_index`` is -1 until the run is inserted into a RunSet, which
    assigns hues deterministically by insertion order.
    """

    run_id: str
    dataset: str
    fold: str
    description: str | None = None
    hue_index: int = -1


@dataclass(frozen=True)
class RunSet:
    """Ordered collection of runs sharing one class alphabet.

    Runs may differ in iteration counts and per-epoch instance totals;
    they must agree on the alphabet (same labels, same order) so that cell
    (i, j) means the same class pair in every run.
    """

    runs: tuple[tuple[RunMeta, ConfusionCube], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "runs", tuple(self.runs))
        seen: set[str] = set()
        for meta, _ in self.runs:
            if meta.run_id in seen:
                raise DuplicateRunId(f"duplicate run id {meta.run_id!r}")
            seen.add(meta.run_id)
        if self.runs:
            first = self.runs[0][1].alphabet
            for meta, cube in self.runs[1:]:
                if cube.alphabet != first:
                    raise AlphabetMismatch(
                        f"run {meta.run_id!r} has a different class alphabet"
                    )

    @property
    def alphabet(self) -> ClassAlphabet | None:
        return self.runs[0][1].alphabet if self.runs else None

    @property
    def run_ids(self) -> list[str]:
        return [meta.run_id for meta, _ in self.runs]

    def get(self, run_id: str) -> tuple[RunMeta, ConfusionCube] | None:
        for meta, cube in self.runs:
            if meta.run_id == run_id:
                return meta, cube
        return None


def confusion_from_predictions(
    labels: Sequence[int],
    predictions: Sequence[Sequence[int]],
    k: int | ClassAlphabet,
    iteration_ids: Sequence[int] | None = None,
) -> ConfusionCube:
    """Aggregate raw per-instance predictions into a confusion cube.

    ``labels`` holds the ground-truth class index of each of the N
    instances; ``predictions`` holds one length-N prediction list per
    logged iteration. Epoch e then has
    ``counts[i][j] = |{n : labels[n] == i and predictions[e][n] == j}|``,
    so every epoch's counts sum to N.

    ``k`` is the class count or a full alphabet. ``iteration_ids``
    defaults to 0..E-1 and must be strictly increasing.
    """
    alphabet = k if isinstance(k, ClassAlphabet) else ClassAlphabet.of_size(k)
    k = alphabet.size
    y = np.asarray(labels, dtype=np.int64)
    if y.ndim != 1 or y.size == 0:
        raise EmptyInput("labels must be a non-empty 1-D sequence")
    n = y.size
    if len(predictions) == 0:
        raise EmptyInput("need at least one iteration of predictions")
    if y.min() < 0 or y.max() >= k:
        raise IndexOutOfAlphabet(f"label outside [0, {k})")

    if iteration_ids is None:
        iteration_ids = range(len(predictions))
    ids = list(iteration_ids)
    if len(ids) != len(predictions):
        raise LengthMismatch("one iteration id per prediction list required")
    if any(b <= a for a, b in zip(ids, ids[1:])):
        raise InvariantViolation("iteration ids must be strictly increasing")

    epochs = []
    for t, preds in zip(ids, predictions):
        p = np.asarray(preds, dtype=np.int64)
        if p.shape != (n,):
            raise LengthMismatch(
                f"iteration {t}: expected {n} predictions, got {p.size}"
            )
        if p.min() < 0 or p.max() >= k:
            raise IndexOutOfAlphabet(f"iteration {t}: prediction outside [0, {k})")
        counts = np.zeros((k, k), dtype=np.int64)
        np.add.at(counts, (y, p), 1)
        epochs.append(EpochConfusion(iteration=int(t), counts=counts))
    return ConfusionCube(alphabet=alphabet, epochs=tuple(epochs))


@dataclass(frozen=True)
class Violation:
    """One broken cube invariant; ``epoch_index`` is positional, or None
    for cube-level violations."""

    code: str
    message: str
    epoch_index: int | None = None


def validate_cube(cube: ConfusionCube) -> list[Violation]:
    """Check every cube invariant; returns an empty list iff all hold.

    Violations are data, not exceptions: a report names each offending
    epoch so that broken fold logs can be fixed at the source.
    """
    report: list[Violation] = []
    if not cube.epochs:
        report.append(Violation("EMPTY_CUBE", "cube has no epochs"))
        return report
    k = cube.alphabet.size
    prev_iter: int | None = None
    for idx, epoch in enumerate(cube.epochs):
        c = epoch.counts
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            report.append(
                Violation("NON_SQUARE", f"counts shape {c.shape} is not square", idx)
            )
        elif c.shape[0] != k:
            report.append(
                Violation(
                    "SHAPE_MISMATCH",
                    f"matrix side {c.shape[0]} != alphabet size {k}",
                    idx,
                )
            )
        if c.size and c.min() < 0:
            report.append(Violation("NEGATIVE_COUNT", "negative confusion count", idx))
        if prev_iter is not None and epoch.iteration <= prev_iter:
            report.append(
                Violation(
                    "NON_INCREASING_ITERATION",
                    f"iteration {epoch.iteration} after {prev_iter}",
                    idx,
                )
            )
        prev_iter = epoch.iteration
    return report
