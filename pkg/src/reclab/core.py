"""Shared domain types: ratings, datasets, factor models, configs, reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


class DatasetError(ValueError):
    """A dataset violates its bounds or uniqueness rules."""


class TrainingError(RuntimeError):
    """Training produced a non-finite factor entry."""

    def __init__(self, message: str, epoch: Optional[int] = None):
        super().__init__(message)
        self.epoch = epoch


def clamp_prediction(raw: float, r_max: int) -> float:
    """Clamp a raw prediction onto the rating scale [1, r_max]."""
    if r_max < 1:
        raise ValueError(f"r_max must be >= 1, got {r_max}")
    return min(max(float(raw), 1.0), float(r_max))


@dataclass(frozen=True)
class Rating:
    """A single user-item rating. The timestamp is retained but never
    consulted by any algorithm in this package."""

    user_id: int
    item_id: int
    value: int
    timestamp: Optional[int] = None


@dataclass(frozen=True)
class RatingsDataset:
    """Sparse integer rating triples with scale bounds.

    Immutable after construction; duplicate (user, item) pairs and
    out-of-range values are rejected up front.
    """

    ratings: tuple
    n_users: int
    n_items: int
    r_max: int = 5

    def __post_init__(self):
        object.__setattr__(self, "ratings", tuple(self.ratings))
        if self.n_users < 0 or self.n_items < 0:
            raise DatasetError("n_users and n_items must be nonnegative")
        if self.r_max < 1:
            raise DatasetError(f"r_max must be >= 1, got {self.r_max}")
        seen = set()
        for r in self.ratings:
            if not (1 <= r.value <= self.r_max):
                raise DatasetError(
                    f"rating value {r.value} outside [1, {self.r_max}] "
                    f"at (user {r.user_id}, item {r.item_id})"
                )
            if not (0 <= r.user_id < self.n_users):
                raise DatasetError(f"user_id {r.user_id} out of range [0, {self.n_users})")
            if not (0 <= r.item_id < self.n_items):
                raise DatasetError(f"item_id {r.item_id} out of range [0, {self.n_items})")
            cell = (r.user_id, r.item_id)
            if cell in seen:
                raise DatasetError(f"duplicate rating for cell {cell}")
            seen.add(cell)

    def __len__(self) -> int:
        return len(self.ratings)

    def global_mean(self) -> float:
        if not self.ratings:
            raise DatasetError("empty dataset has no mean")
        return float(np.mean([r.value for r in self.ratings]))

    def cells(self) -> set:
        return {(r.user_id, r.item_id) for r in self.ratings}

    def arrays(self):
        """(users, items, values) as int arrays, in canonical (user, item) order.

        Canonical ordering makes every downstream consumer invariant to the
        storage order of the rating rows.
        """
        order = sorted(range(len(self.ratings)),
                       key=lambda idx: (self.ratings[idx].user_id, self.ratings[idx].item_id))
        users = np.array([self.ratings[i].user_id for i in order], dtype=np.int64)
        items = np.array([self.ratings[i].item_id for i in order], dtype=np.int64)
        values = np.array([self.ratings[i].value for i in order], dtype=np.float64)
        return users, items, values

    def to_dense(self) -> np.ndarray:
        """Dense n_users x n_items matrix, 0 for missing cells."""
        dense = np.zeros((self.n_users, self.n_items))
        for r in self.ratings:
            dense[r.user_id, r.item_id] = r.value
        return dense


@dataclass(frozen=True)
class ContextSample:
    """A rating event carrying a fixed-length context feature vector
    (encoded categorical attributes such as mood or location)."""

    user_id: int
    item_id: int
    value: int
    context: tuple

    def __post_init__(self):
        object.__setattr__(self, "context", tuple(float(c) for c in self.context))

    @property
    def context_array(self) -> np.ndarray:
        return np.asarray(self.context, dtype=np.float64)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FactorModel:
    """Latent factor matrices: row U[i] is user i's vector, V[j] item j's."""

    U: np.ndarray
    V: np.ndarray
    k: int

    def __post_init__(self):
        U = _readonly(self.U)
        V = _readonly(self.V)
        if U.ndim != 2 or V.ndim != 2 or U.shape[1] != self.k or V.shape[1] != self.k:
            raise ValueError("U and V must be 2-d with row length k")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)

    @property
    def n_users(self) -> int:
        return self.U.shape[0]

    @property
    def n_items(self) -> int:
        return self.V.shape[0]

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "U": self.U.tolist(), "V": self.V.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "FactorModel":
        obj = json.loads(text)
        return cls(U=np.asarray(obj["U"], dtype=np.float64),
                   V=np.asarray(obj["V"], dtype=np.float64),
                   k=int(obj["k"]))


@dataclass(frozen=True)
class PowerMatModel:
    """Context-aware factor model: latent factors plus a context-weight
    vector alpha and scalar beta."""

    factors: FactorModel
    alpha: np.ndarray
    beta: float
    sigma_u: float = 1.0
    sigma_v: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", _readonly(self.alpha))
        if self.sigma_u <= 0 or self.sigma_v <= 0:
            raise ValueError("sigma_u and sigma_v must be positive")

    def to_json(self) -> str:
        return json.dumps({
            "k": self.factors.k,
            "U": self.factors.U.tolist(),
            "V": self.factors.V.tolist(),
            "alpha": self.alpha.tolist(),
            "beta": self.beta,
            "sigma_u": self.sigma_u,
            "sigma_v": self.sigma_v,
        })

    @classmethod
    def from_json(cls, text: str) -> "PowerMatModel":
        obj = json.loads(text)
        factors = FactorModel(U=np.asarray(obj["U"], dtype=np.float64),
                              V=np.asarray(obj["V"], dtype=np.float64),
                              k=int(obj["k"]))
        return cls(factors=factors,
                   alpha=np.asarray(obj["alpha"], dtype=np.float64),
                   beta=float(obj["beta"]),
                   sigma_u=float(obj["sigma_u"]),
                   sigma_v=float(obj["sigma_v"]))


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by every trainer.

    samples_per_epoch only matters for the data-free trainers, which visit
    uniformly sampled grid cells rather than observed ratings.
    """

    gamma: float = 0.005
    k: int = 10
    epochs: int = 30
    seed: int = 42
    eps_floor: float = 1e-6
    init_lo: float = 0.1
    init_hi: float = 0.9
    samples_per_epoch: int = 10000

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.eps_floor <= 0:
            raise ValueError("eps_floor must be positive")
        if not (0 < self.init_lo < self.init_hi):
            raise ValueError("need 0 < init_lo < init_hi")


@dataclass(frozen=True)
class EvalEntry:
    algorithm: str
    mae: float
    n_test_predictions: int

    def __post_init__(self):
        if self.mae < 0:
            raise ValueError("mae must be >= 0")


@dataclass(frozen=True)
class EvalReport:
    """Per-algorithm MAE results for one train/test split."""

    entries: tuple
    split_ratio: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def to_dict(self) -> dict:
        return {
            "split": {"test_fraction": self.split_ratio, "seed": self.seed},
            "rows": [{"algo": e.algorithm, "mae": e.mae, "n": e.n_test_predictions}
                     for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        lines = ["algo,mae,n"]
        lines.extend(f"{e.algorithm},{e.mae},{e.n_test_predictions}" for e in self.entries)
        return "\n".join(lines) + "\n"
