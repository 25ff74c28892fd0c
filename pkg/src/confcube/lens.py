"""View-state transformations over confusion cubes.

A lens narrows what is visible without changing the underlying run data:
an iteration range, a class subset or a superclass aggregation, plus the
display settings (normalization, scale, rotation) that downstream
consumers echo back.

Evaluation order is fixed: iteration slicing first, then the class
transform. Slicing commutes with class selection, but selection and
aggregation do not commute with each other, so a lens carries at most one
of the two.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    EmptySlice,
    InvalidFocus,
    InvalidMapping,
    InvalidRange,
    TooFewClasses,
    UnknownClass,
)
from .metrics import ScaleMode, f1_series
from .model import ClassAlphabet, ConfusionCube, EpochConfusion

__all__ = [
    "ViewLens",
    "SuperclassMapping",
    "ManyClassesWarning",
    "MANY_CLASSES_LIMIT",
    "select_classes",
    "aggregate_superclasses",
    "slice_iterations",
    "apply_lens",
    "rank_classes_by_final_f1",
    "rank_cells_by_final_confusion",
    "CellRanking",
]

# Beyond this many visible classes the matrix view degrades; selection or
# aggregation should be offered instead of raising.
MANY_CLASSES_LIMIT = 20


class ManyClassesWarning(UserWarning):
    """Lens would show more classes than the matrix view handles well."""


@dataclass(frozen=True)
class SuperclassMapping:
    """Named groups of class indices that partition the alphabet."""

    groups: tuple[tuple[str, tuple[int, ...]], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "groups",
            tuple((str(name), tuple(members)) for name, members in self.groups),
        )

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.groups]

    def validate(self, k: int) -> None:
        """Raise InvalidMapping unless the groups partition 0..k-1 into
        at least two disjoint, non-empty superclasses."""
        if len(self.groups) < 2:
            raise InvalidMapping("need at least 2 superclasses")
        if len(set(self.names)) != len(self.groups):
            raise InvalidMapping("superclass names must be unique")
        seen: set[int] = set()
        for name, members in self.groups:
            if not members:
                raise InvalidMapping(f"superclass {name!r} is empty")
            for m in members:
                if not 0 <= m < k:
                    raise InvalidMapping(f"superclass {name!r}: index {m} outside [0, {k})")
                if m in seen:
                    raise InvalidMapping(f"class index {m} appears in two superclasses")
                seen.add(m)
        if len(seen) != k:
            missing = sorted(set(range(k)) - seen)
            raise InvalidMapping(f"classes not covered by any superclass: {missing}")

    @classmethod
    def from_document(cls, doc: object, alphabet: ClassAlphabet) -> "SuperclassMapping":
        """Build from the JSON document form: a list of
        ``{"name": ..., "members": [class names]}`` entries."""
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        if not isinstance(doc, list):
            raise InvalidMapping("mapping document must be a JSON array")
        groups = []
        for entry in doc:
            if not isinstance(entry, dict) or "name" not in entry or "members" not in entry:
                raise InvalidMapping("each mapping entry needs 'name' and 'members'")
            members = tuple(alphabet.index_of(m) for m in entry["members"])
            groups.append((str(entry["name"]), members))
        mapping = cls(tuple(groups))
        mapping.validate(alphabet.size)
        return mapping


@dataclass(frozen=True)
class ViewLens:
    """Active view specification.

    ``selected_classes`` and ``superclasses`` are mutually exclusive;
    neither set means the full alphabet is visible. ``iteration_range`` is
    inclusive on both ends; None means the full extent. ``rotated`` only
    affects rendering and is carried along untouched.
    """

    selected_classes: tuple[int, ...] | None = None
    superclasses: SuperclassMapping | None = None
    iteration_range: tuple[int, int] | None = None
    focused_iteration: int | None = None
    normalization: str = "absolute"
    scale_mode: ScaleMode = "linear"
    gamma: float = 1.0
    rotated: bool = False

    def __post_init__(self) -> None:
        if self.selected_classes is not None:
            object.__setattr__(self, "selected_classes", tuple(self.selected_classes))

    def validate(self, k: int) -> None:
        if self.selected_classes is not None and self.superclasses is not None:
            raise InvalidMapping("choose class selection or aggregation, not both")
        if self.selected_classes is not None:
            _check_subset(self.selected_classes, k)
        if self.superclasses is not None:
            self.superclasses.validate(k)
        if self.normalization not in ("absolute", "relative"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.iteration_range is not None:
            lo, hi = self.iteration_range
            if lo > hi:
                raise InvalidRange(f"range [{lo}, {hi}] has from > to")
        if self.focused_iteration is not None and self.iteration_range is not None:
            lo, hi = self.iteration_range
            if not lo <= self.focused_iteration <= hi:
                raise InvalidFocus(
                    f"focused iteration {self.focused_iteration} outside [{lo}, {hi}]"
                )

    def visible_class_count(self, k: int) -> int:
        if self.superclasses is not None:
            return len(self.superclasses.groups)
        if self.selected_classes is not None:
            return len(self.selected_classes)
        return k

    def diagnostics(self, k: int) -> list[str]:
        """Soft warnings: the lens is legal but may render poorly."""
        visible = self.visible_class_count(k)
        if visible > MANY_CLASSES_LIMIT:
            return [
                f"{visible} visible classes exceed the practical matrix limit of "
                f"{MANY_CLASSES_LIMIT}; consider class selection or aggregation"
            ]
        return []


def _check_subset(subset: Sequence[int], k: int) -> None:
    if len(subset) < 2:
        raise TooFewClasses(
            f"a confusion view needs at least 2 classes, got {len(subset)}"
        )
    if len(set(subset)) != len(subset):
        raise UnknownClass("class subset contains duplicates")
    for j in subset:
        if not 0 <= j < k:
            raise UnknownClass(f"class index {j} outside [0, {k})")


def select_classes(cube: ConfusionCube, subset: Sequence[int]) -> ConfusionCube:
    """Restrict the cube to the given class indices, in the given order.

    Entries involving unselected classes are dropped, not redistributed,
    so per-epoch totals may shrink; the distribution view makes the shrink
    visible.
    """
    subset = tuple(int(j) for j in subset)
    _check_subset(subset, cube.alphabet.size)
    idx = np.asarray(subset)
    alphabet = ClassAlphabet(tuple(cube.alphabet.labels[j] for j in subset))
    epochs = tuple(
        EpochConfusion(e.iteration, e.counts[np.ix_(idx, idx)]) for e in cube.epochs
    )
    return ConfusionCube(alphabet=alphabet, epochs=epochs)


def aggregate_superclasses(
    cube: ConfusionCube, mapping: SuperclassMapping
) -> ConfusionCube:
    """Sum confusion blocks into superclass cells.

    ``out[a][b]`` sums counts[i][j] over i in group a and j in group b, so
    within-superclass confusion lands on the diagonal and per-epoch totals
    are preserved exactly.
    """
    k = cube.alphabet.size
    mapping.validate(k)
    g = len(mapping.groups)
    onehot = np.zeros((g, k), dtype=np.int64)
    for a, (_, members) in enumerate(mapping.groups):
        onehot[a, list(members)] = 1
    alphabet = ClassAlphabet(tuple(mapping.names))
    epochs = []
    for e in cube.epochs:
        counts = onehot @ e.counts @ onehot.T
        epochs.append(EpochConfusion(e.iteration, counts))
    return ConfusionCube(alphabet=alphabet, epochs=tuple(epochs))


def slice_iterations(cube: ConfusionCube, start: int, stop: int) -> ConfusionCube:
    """Keep epochs with start <= iteration <= stop, order preserved."""
    if start > stop:
        raise InvalidRange(f"range [{start}, {stop}] has from > to")
    epochs = tuple(e for e in cube.epochs if start <= e.iteration <= stop)
    if not epochs:
        raise EmptySlice(f"no epochs with iteration in [{start}, {stop}]")
    return ConfusionCube(alphabet=cube.alphabet, epochs=epochs)


def apply_lens(cube: ConfusionCube, lens: ViewLens) -> ConfusionCube:
    """Slice the iteration range, then select or aggregate classes.

    Emits ManyClassesWarning when the result is wider than the matrix
    view comfortably renders. Normalization and scaling are display
    transforms and are NOT applied here.
    """
    lens.validate(cube.alphabet.size)
    for message in lens.diagnostics(cube.alphabet.size):
        warnings.warn(message, ManyClassesWarning)
    out = cube
    if lens.iteration_range is not None:
        out = slice_iterations(out, *lens.iteration_range)
    if lens.superclasses is not None:
        out = aggregate_superclasses(out, lens.superclasses)
    elif lens.selected_classes is not None:
        out = select_classes(out, lens.selected_classes)
    return out


def rank_classes_by_final_f1(
    cube: ConfusionCube, k: int, ascending: bool = True
) -> list[int]:
    """Class indices ordered by F1 at the final epoch.

    Ascending order puts the worst classes first, which is the usual way
    to pick a subset worth inspecting on a many-class problem. Absent F1
    values sort as worst; ties break by ascending class index. Returns
    exactly min(k, K) indices.
    """
    if k < 2:
        raise TooFewClasses(f"need at least 2 ranked classes, got {k}")
    n_classes = cube.alphabet.size
    scores: list[tuple[float, int]] = []
    for j in range(n_classes):
        f1 = f1_series(cube, j).values[-1]
        scores.append((float("-inf") if f1 is None else f1, j))
    scores.sort(key=lambda s: (s[0], s[1]) if ascending else (-s[0], s[1]))
    return [j for _, j in scores[: min(k, n_classes)]]


@dataclass(frozen=True)
class CellRanking:
    """Off-diagonal cells ranked by final-epoch confusion, plus the set of
    classes those cells touch (useful for building a selection subset)."""

    cells: tuple[tuple[int, int], ...]
    classes: tuple[int, ...] = field(default=())


def rank_cells_by_final_confusion(cube: ConfusionCube, k: int) -> CellRanking:
    """The k largest off-diagonal cells at the final epoch.

    Ties break lexicographically by (row, column) so results are
    reproducible. The induced class set is the sorted union of the pair
    members; it has at most 2k entries.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    final = cube.epochs[-1].counts
    n = cube.alphabet.size
    cells = [(i, j) for i in range(n) for j in range(n) if i != j]
    cells.sort(key=lambda ij: (-int(final[ij[0], ij[1]]), ij[0], ij[1]))
    top = tuple(cells[: min(k, len(cells))])
    induced = tuple(sorted({c for ij in top for c in ij}))
    return CellRanking(cells=top, classes=induced)
