"""Stratified 7:2:1 splits and grid-searched kernel-SVM evaluation."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError, PreconditionError, StratificationError
from .svm import gw_kernel, svm_predict, svm_train

logger = logging.getLogger(__name__)

C_GRID = tuple(10.0 ** k for k in range(-7, 8))
GAMMA_GRID = tuple(2.0 ** k for k in range(-10, 11))
SPLIT_FRACTIONS = (0.7, 0.2, 0.1)


def stratified_split(labels, seed: int, fractions=SPLIT_FRACTIONS):
    """Train / validation / test index arrays with every class in every part.

    Per class, the validation and test shares are ``round(fraction * count)``
    clamped to at least one item; the remainder trains.
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    parts = ([], [], [])
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        rng.shuffle(idx)
        n_val = max(1, int(np.floor(fractions[1] * idx.size + 0.5)))
        n_test = max(1, int(np.floor(fractions[2] * idx.size + 0.5)))
        if idx.size - n_val - n_test < 1:
            raise StratificationError(f"class {c!r} has {idx.size} items, too few for train/val/test")
        parts[2].extend(idx[:n_test])
        parts[1].extend(idx[n_test:n_test + n_val])
        parts[0].extend(idx[n_test + n_val:])
    return tuple(np.sort(np.array(p, dtype=int)) for p in parts)


def _to_pm1(labels):
    classes = np.unique(labels)
    if classes.size != 2:
        raise PreconditionError(f"binary labels required, got {classes.size} classes")
    return np.where(labels == classes[1], 1, -1), classes


@dataclass
class CvResult:
    best_c: float
    best_gamma: float
    mean_accuracy: float
    std: float
    accuracies: list = field(default_factory=list)
    choices: list = field(default_factory=list)
    all_converged: bool = True

    def __iter__(self):
        return iter((self.best_c, self.best_gamma, self.mean_accuracy, self.std))


def cross_validate(distances, labels, c_grid=C_GRID, gamma_grid=GAMMA_GRID, folds: int = 10,
                   seed: int = 0, max_iter: int = 100_000) -> CvResult:
    """Repeated stratified 7:2:1 evaluation of the ``exp(-gamma D)`` SVM.

    For each of ``folds`` seeded splits the (C, gamma) pair with the best
    validation accuracy is chosen (first in grid order on ties) and its
    test accuracy recorded. ``best_c``/``best_gamma`` report the most often
    chosen pair.
    """
    if folds < 2:
        raise ParameterError("folds must be >= 2")
    if not c_grid or not gamma_grid:
        raise ParameterError("empty hyperparameter grid")
    D = np.asarray(distances, dtype=float)
    labels = np.asarray(labels)
    if D.shape != (labels.size, labels.size):
        raise PreconditionError("distance matrix does not match the labels")
    y, _ = _to_pm1(labels)
    kernels = [gw_kernel(D, g) for g in gamma_grid]
    accs, choices = [], []
    converged = True
    for f in range(folds):
        tr, va, te = stratified_split(labels, seed=seed * 1_000_003 + f)
        best = (-1.0, None)
        for c in c_grid:
            for g, K in zip(gamma_grid, kernels):
                model = svm_train(K[np.ix_(tr, tr)], y[tr], c, gamma=g, max_iter=max_iter)
                converged &= model.converged
                acc = float(np.mean(svm_predict(model, K[np.ix_(va, tr)]) == y[va]))
                if acc > best[0]:
                    best = (acc, (c, g, model, K))
        c, g, model, K = best[1]
        test_acc = float(np.mean(svm_predict(model, K[np.ix_(te, tr)]) == y[te]))
        logger.info("split %d: C=%g gamma=%g val=%.3f test=%.3f", f, c, g, best[0], test_acc)
        accs.append(test_acc)
        choices.append((c, g))
    (bc, bg), _ = Counter(choices).most_common(1)[0]
    return CvResult(bc, bg, float(np.mean(accs)), float(np.std(accs)), accs, choices, converged)
