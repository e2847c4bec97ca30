"""Classic data-consuming baselines: item-based CF and SGD matrix
factorization."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core import FactorModel, RatingsDataset, TrainConfig, TrainingError, clamp_prediction


class SimilarityKind(Enum):
    COSINE = "cosine"
    ADJUSTED_COSINE = "adjusted_cosine"


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric item-item similarity scores; the diagonal is never used
    for neighbor selection."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_items(self) -> int:
        return self.values.shape[0]

    def to_json(self) -> str:
        return json.dumps(self.values.tolist())

    @classmethod
    def from_json(cls, text: str) -> "SimilarityMatrix":
        return cls(values=np.asarray(json.loads(text), dtype=np.float64))


@dataclass(frozen=True)
class CfConfig:
    neighborhood_size: int = 20
    similarity_kind: SimilarityKind = SimilarityKind.COSINE

    def __post_init__(self):
        if self.neighborhood_size < 1:
            raise ValueError("neighborhood_size must be >= 1")


def item_similarities(train: RatingsDataset, kind: SimilarityKind) -> SimilarityMatrix:
    """Dense item-item similarity matrix.

    COSINE treats each item's column of the rating matrix (0 for missing)
    as its vector. ADJUSTED_COSINE first subtracts each user's mean rating
    and restricts norms to the co-rating users. Pairs without co-raters
    score 0.
    """
    if len(train) == 0:
        raise ValueError("train set is empty")
    dense = train.to_dense()
    rated = dense > 0

    if kind is SimilarityKind.COSINE:
        norms = np.linalg.norm(dense, axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            sims = (dense.T @ dense) / np.outer(norms, norms)
        sims[~np.isfinite(sims)] = 0.0
    else:
        counts = rated.sum(axis=1)
        user_means = np.divide(dense.sum(axis=1), counts,
                               out=np.zeros(train.n_users), where=counts > 0)
        centered = np.where(rated, dense - user_means[:, None], 0.0)
        num = centered.T @ centered
        # sq_on[i, j] = sum over co-raters of centered[u, i]^2
        sq_on = (centered ** 2).T @ rated.astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            sims = num / np.sqrt(sq_on * sq_on.T)
        sims[~np.isfinite(sims)] = 0.0
    np.clip(sims, -1.0, 1.0, out=sims)
    return SimilarityMatrix(values=sims)


class CfPredictor:
    """Caches per-user rated-item lists so repeated predictions stay cheap."""

    def __init__(self, sims: SimilarityMatrix, train: RatingsDataset,
                 cfg: Optional[CfConfig] = None):
        self.sims = sims
        self.cfg = cfg or CfConfig()
        self.r_max = train.r_max
        self.fallback = train.global_mean()
        self._user_items = [[] for _ in range(train.n_users)]
        self._user_values = [[] for _ in range(train.n_users)]
        users, items, values = train.arrays()
        for u, j, v in zip(users, items, values):
            self._user_items[u].append(int(j))
            self._user_values[u].append(float(v))

    def predict(self, u: int, i: int) -> float:
        items = self._user_items[u]
        if not items:
            return clamp_prediction(self.fallback, self.r_max)
        sims_row = self.sims.values[i]
        candidates = [(sims_row[j], j, v)
                      for j, v in zip(items, self._user_values[u])
                      if j != i and sims_row[j] != 0.0]
        if not candidates:
            return clamp_prediction(self.fallback, self.r_max)
        # most similar first; ties broken by lower item index
        candidates.sort(key=lambda t: (-t[0], t[1]))
        top = candidates[: self.cfg.neighborhood_size]
        num = sum(s * v for s, _, v in top)
        den = sum(abs(s) for s, _, _ in top)
        return clamp_prediction(num / den, self.r_max)


def cf_predict(u: int, i: int, sims: SimilarityMatrix, train: RatingsDataset,
               cfg: Optional[CfConfig] = None) -> float:
    """Similarity-weighted average of user u's ratings on i's nearest
    neighbors, clamped to the scale; global train mean when no neighbor
    qualifies."""
    return CfPredictor(sims, train, cfg).predict(u, i)


def _init_factors(n_rows: int, k: int, rng: np.random.Generator,
                  lo: float, hi: float) -> np.ndarray:
    return rng.uniform(lo, hi, size=(n_rows, k)) / np.sqrt(k)


def mf_train(train: RatingsDataset, cfg: TrainConfig) -> FactorModel:
    """Plain squared-loss matrix factorization fitted by SGD.

    Visits the observed ratings once per epoch in a seed-derived shuffled
    order (independent of the input row order), applying
    U_i += gamma * 2e * V_j and V_j += gamma * 2e * U_i with
    e = R_ij - U_i . V_j. No biases, no regularization.
    """
    if len(train) == 0:
        raise ValueError("train set is empty")
    rng = np.random.default_rng(cfg.seed)
    U = _init_factors(train.n_users, cfg.k, rng, cfg.init_lo, cfg.init_hi)
    V = _init_factors(train.n_items, cfg.k, rng, cfg.init_lo, cfg.init_hi)
    users, items, values = train.arrays()
    n = len(users)
    for epoch in range(cfg.epochs):
        # overflow surfaces as non-finite factors, checked after each epoch
        with np.errstate(over="ignore", invalid="ignore"):
            for idx in rng.permutation(n):
                u, j, r = users[idx], items[idx], values[idx]
                e = r - U[u] @ V[j]
                step = cfg.gamma * 2.0 * e
                u_old = U[u].copy()
                U[u] += step * V[j]
                V[j] += step * u_old
        if not (np.isfinite(U).all() and np.isfinite(V).all()):
            raise TrainingError(f"mf_train diverged at epoch {epoch}", epoch=epoch)
    return FactorModel(U=U, V=V, k=cfg.k)


def mf_predict(model: FactorModel, u: int, i: int, r_max: int) -> float:
    return clamp_prediction(float(model.U[u] @ model.V[i]), r_max)


def mf_loss(train: RatingsDataset, U: np.ndarray, V: np.ndarray) -> float:
    """Sum of squared reconstruction errors over the observed cells."""
    users, items, values = train.arrays()
    preds = np.einsum("ij,ij->i", U[users], V[items])
    return float(np.sum((values - preds) ** 2))


def mf_gradients(train: RatingsDataset, U: np.ndarray, V: np.ndarray):
    """Analytic gradient of mf_loss with respect to (U, V)."""
    users, items, values = train.arrays()
    errors = values - np.einsum("ij,ij->i", U[users], V[items])
    grad_u = np.zeros_like(U)
    grad_v = np.zeros_like(V)
    np.add.at(grad_u, users, (-2.0 * errors)[:, None] * V[items])
    np.add.at(grad_v, items, (-2.0 * errors)[:, None] * U[users])
    return grad_u, grad_v
