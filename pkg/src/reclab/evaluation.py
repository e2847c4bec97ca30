"""MAE evaluation: single-predictor scoring, the uniform random baseline,
and the multi-algorithm comparison harness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

from .core import DatasetError, EvalEntry, EvalReport, RatingsDataset


class Predictor(Protocol):
    """Uniform prediction interface: total over in-range (u, i) and always
    within [1, r_max]."""

    def predict(self, u: int, i: int) -> float: ...


@dataclass(frozen=True)
class NamedPredictor:
    name: str
    fn: Callable[[int, int], float]

    def predict(self, u: int, i: int) -> float:
        return self.fn(u, i)


def mae(predictor: Predictor, test: RatingsDataset) -> float:
    """Mean absolute error over the observed test cells."""
    if len(test) == 0:
        raise DatasetError("empty test set")
    total = 0.0
    for r in test.ratings:
        total += abs(predictor.predict(r.user_id, r.item_id) - r.value)
    return total / len(test)


def random_baseline_mae(test: RatingsDataset, seed: int) -> float:
    """MAE of guessing a uniform random integer in [1, r_max] per cell."""
    if len(test) == 0:
        raise DatasetError("empty test set")
    rng = np.random.default_rng(seed)
    guesses = rng.integers(1, test.r_max + 1, size=len(test))
    truth = np.array([r.value for r in test.ratings], dtype=np.int64)
    return float(np.mean(np.abs(guesses - truth)))


def compare(test: RatingsDataset, predictors: Sequence[NamedPredictor],
            split_ratio: float, seed: int,
            include_random: bool = True) -> EvalReport:
    """One EvalReport row per predictor, plus the random baseline, all on
    the same test split."""
    entries = []
    for predictor in predictors:
        entries.append(EvalEntry(algorithm=predictor.name,
                                 mae=mae(predictor, test),
                                 n_test_predictions=len(test)))
    if include_random:
        entries.append(EvalEntry(algorithm="random",
                                 mae=random_baseline_mae(test, seed),
                                 n_test_predictions=len(test)))
    return EvalReport(entries=tuple(entries), split_ratio=split_ratio, seed=seed)
