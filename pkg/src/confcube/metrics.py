"""Global and class-level metric series computed from confusion cubes.

All functions are pure and operate on immutable cubes, so they can be
evaluated concurrently across (run, class, metric) combinations.

Zero-denominator convention: a metric whose denominator is zero at some
iteration (e.g. precision for a class that was never predicted) is ABSENT
at that iteration, represented as ``None``. Absent is not 0 and not an
error; early-training or growing-dataset epochs legitimately lack
predictions for some classes, and coercing the score to 0 would fabricate
a value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import BadGamma, EmptyEpoch, ScaleDomainError, UnknownClass, UnknownIteration
from .model import ConfusionCube, EpochConfusion

__all__ = [
    "MetricSeries",
    "ScaleAllZeroWarning",
    "accuracy_series",
    "class_counts",
    "precision_series",
    "recall_series",
    "f1_series",
    "fp_series",
    "fn_series",
    "class_distribution",
    "instance_series",
    "normalize_relative",
    "apply_scale",
]

ScaleMode = Literal["linear", "log", "exponential"]


@dataclass(frozen=True)
class MetricSeries:
    """Per-iteration values of one scalar metric for one run.

    ``values`` is parallel to ``iterations``; ``None`` marks an absent
    value (zero denominator). Present values of rate metrics lie in [0, 1].
    """

    metric_name: str
    iterations: tuple[int, ...]
    values: tuple[float | None, ...]
    run_id: str = ""
    class_index: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "iterations", tuple(self.iterations))
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.iterations) != len(self.values):
            raise ValueError("iterations and values must be parallel")

    def to_wire(self) -> dict:
        """JSON-ready dict; absent values become null."""
        return {
            "metricName": self.metric_name,
            "runId": self.run_id,
            "classIndex": self.class_index,
            "iterations": list(self.iterations),
            "values": [v for v in self.values],
        }


def _check_class(cube: ConfusionCube, j: int) -> None:
    if not 0 <= j < cube.alphabet.size:
        raise UnknownClass(f"class index {j} outside [0, {cube.alphabet.size})")


def _epoch(cube: ConfusionCube, iteration: int) -> EpochConfusion:
    epoch = cube.epoch_at(iteration)
    if epoch is None:
        raise UnknownIteration(f"iteration {iteration} not present in cube")
    return epoch


def accuracy_series(cube: ConfusionCube, run_id: str = "") -> MetricSeries:
    """Fraction of correctly classified instances per iteration:
    trace / total. Never absent; an epoch with zero instances is an error."""
    values = []
    for epoch in cube.epochs:
        total = epoch.counts.sum()
        if total == 0:
            raise EmptyEpoch(f"iteration {epoch.iteration} has no instances")
        values.append(float(np.trace(epoch.counts) / total))
    return MetricSeries("accuracy", tuple(cube.iterations), tuple(values), run_id)


def class_counts(cube: ConfusionCube, j: int, iteration: int) -> tuple[int, int, int]:
    """(TP, FP, FN) for class j at one iteration.

    TP is the diagonal entry; FP the rest of column j (instances of other
    classes predicted as j); FN the rest of row j (instances of class j
    predicted as something else).
    """
    _check_class(cube, j)
    c = _epoch(cube, iteration).counts
    tp = c[j, j]
    fp = c[:, j].sum() - tp
    fn = c[j, :].sum() - tp
    return int(tp), int(fp), int(fn)


def _per_class_series(
    cube: ConfusionCube, j: int
) -> tuple[list[float], list[float], list[float]]:
    """Raw per-epoch TP/FP/FN sums for class j (floats; works for ratio
    cubes as well as count cubes)."""
    _check_class(cube, j)
    tps, fps, fns = [], [], []
    for epoch in cube.epochs:
        c = epoch.counts
        tp = c[j, j]
        tps.append(float(tp))
        fps.append(float(c[:, j].sum() - tp))
        fns.append(float(c[j, :].sum() - tp))
    return tps, fps, fns


def precision_series(cube: ConfusionCube, j: int, run_id: str = "") -> MetricSeries:
    """TP / (TP + FP) per iteration; absent when class j was never predicted."""
    tps, fps, _ = _per_class_series(cube, j)
    values = [tp / (tp + fp) if tp + fp > 0 else None for tp, fp in zip(tps, fps)]
    return MetricSeries("precision", tuple(cube.iterations), tuple(values), run_id, j)


def recall_series(cube: ConfusionCube, j: int, run_id: str = "") -> MetricSeries:
    """TP / (TP + FN) per iteration; absent when class j has no instances."""
    tps, _, fns = _per_class_series(cube, j)
    values = [tp / (tp + fn) if tp + fn > 0 else None for tp, fn in zip(tps, fns)]
    return MetricSeries("recall", tuple(cube.iterations), tuple(values), run_id, j)


def f1_series(cube: ConfusionCube, j: int, run_id: str = "") -> MetricSeries:
    """Harmonic mean of precision and recall per iteration; absent when
    either factor is absent or both are zero."""
    p = precision_series(cube, j).values
    r = recall_series(cube, j).values
    values: list[float | None] = []
    for pv, rv in zip(p, r):
        if pv is None or rv is None or pv + rv == 0:
            values.append(None)
        else:
            values.append(2 * pv * rv / (pv + rv))
    return MetricSeries("f1", tuple(cube.iterations), tuple(values), run_id, j)


def fp_series(cube: ConfusionCube, j: int, run_id: str = "") -> MetricSeries:
    """False positives of class j per iteration (column sum minus diagonal).

    Values are counts on a count cube and rates on a cube produced by
    ``normalize_relative``.
    """
    _, fps, _ = _per_class_series(cube, j)
    return MetricSeries("fp", tuple(cube.iterations), tuple(fps), run_id, j)


def fn_series(cube: ConfusionCube, j: int, run_id: str = "") -> MetricSeries:
    """False negatives of class j per iteration (row sum minus diagonal)."""
    _, _, fns = _per_class_series(cube, j)
    return MetricSeries("fn", tuple(cube.iterations), tuple(fns), run_id, j)


def class_distribution(cube: ConfusionCube, iteration: int) -> list[float]:
    """Instances per ground-truth class at one iteration (row sums)."""
    c = _epoch(cube, iteration).counts
    return [float(v) for v in c.sum(axis=1)]


def instance_series(cube: ConfusionCube, j: int, run_id: str = "") -> MetricSeries:
    """Instances of ground-truth class j per iteration (row sum).

    Feeds the per-class distribution bars; on growing datasets the series
    shows how coverage of the class evolves.
    """
    _check_class(cube, j)
    values = [float(e.counts[j, :].sum()) for e in cube.epochs]
    return MetricSeries("instances", tuple(cube.iterations), tuple(values), run_id, j)


def normalize_relative(cube: ConfusionCube) -> ConfusionCube:
    """Divide every epoch by its instance total, making folds of different
    sizes comparable. Entries of each returned epoch sum to 1.

    The divisor is per-epoch, not per-run, so growing datasets normalize
    sensibly.
    """
    epochs = []
    for epoch in cube.epochs:
        total = epoch.counts.sum()
        if total == 0:
            raise EmptyEpoch(f"iteration {epoch.iteration} has no instances")
        epochs.append(
            EpochConfusion(epoch.iteration, epoch.counts.astype(np.float64) / total)
        )
    return ConfusionCube(alphabet=cube.alphabet, epochs=tuple(epochs))


class ScaleAllZeroWarning(UserWarning):
    """All inputs to the display-scale transform were zero (vmax = 0)."""


def apply_scale(
    values: Sequence[float],
    vmax: float,
    mode: ScaleMode = "linear",
    gamma: float = 1.0,
) -> list[float]:
    """Map raw values in [0, vmax] to display values in [0, 1].

    linear:      v / vmax
    log:         ln(1 + v) / ln(1 + vmax)
    exponential: (v / vmax) ** gamma, gamma in (0, 1]

    Every mode is monotone non-decreasing, maps 0 to 0 and vmax to 1, and
    preserves the argmax, so rescaling accentuates but never reorders
    heatmap cells. With gamma = 1 the exponential mode equals the linear
    mode pointwise. A vmax of 0 yields all zeros and a ScaleAllZeroWarning.
    """
    if mode not in ("linear", "log", "exponential"):
        raise ValueError(f"unknown scale mode {mode!r}")
    if not 0.0 < gamma <= 1.0:
        raise BadGamma(f"gamma must lie in (0, 1], got {gamma}")
    if vmax < 0:
        raise ScaleDomainError(f"vmax must be non-negative, got {vmax}")
    vs = [float(v) for v in values]
    if any(v < 0 or v > vmax for v in vs):
        raise ScaleDomainError("values must lie in [0, vmax]")
    if vmax == 0:
        warnings.warn("vmax is 0; all display values are 0", ScaleAllZeroWarning)
        return [0.0 for _ in vs]
    if mode == "linear":
        return [v / vmax for v in vs]
    if mode == "log":
        denom = math.log1p(vmax)
        return [math.log1p(v) / denom for v in vs]
    return [(v / vmax) ** gamma for v in vs]
