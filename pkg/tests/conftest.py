import numpy as np
import pytest

from confcube.model import ClassAlphabet, ConfusionCube, EpochConfusion

# Five instances, three classes: one instance of class 0 predicted as 1,
# everything else correct. Used across suites as the worked example.
FIVE_LABELS = [0, 0, 1, 1, 2]
FIVE_PREDS_E0 = [0, 1, 1, 1, 2]
FIVE_PREDS_E1 = [0, 0, 1, 1, 2]
FIVE_COUNTS_E0 = [[1, 1, 0], [0, 2, 0], [0, 0, 1]]
FIVE_COUNTS_E1 = [[2, 0, 0], [0, 2, 0], [0, 0, 1]]


def make_cube(matrices, iterations=None, labels=None) -> ConfusionCube:
    matrices = [np.asarray(m) for m in matrices]
    k = matrices[0].shape[0]
    alphabet = ClassAlphabet(tuple(labels) if labels else tuple(str(i) for i in range(k)))
    if iterations is None:
        iterations = range(len(matrices))
    epochs = tuple(
        EpochConfusion(int(t), m) for t, m in zip(iterations, matrices)
    )
    return ConfusionCube(alphabet=alphabet, epochs=epochs)


@pytest.fixture
def five_instance_cube() -> ConfusionCube:
    return make_cube([FIVE_COUNTS_E0, FIVE_COUNTS_E1])
