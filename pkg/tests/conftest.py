import os

import numpy as np
import pytest

from reclab.core import Rating, RatingsDataset
from reclab.ingest import MovieLensFormat, parse_movielens


def make_structured_dataset(n_users=600, n_items=800, n_ratings=40000,
                            seed=7, noise=0.9) -> RatingsDataset:
    """Synthetic stand-in for a MovieLens-style benchmark: planted low-rank
    structure plus user/item biases and calibrated noise, so that a tuned
    factor model reaches the published MAE band."""
    rng = np.random.default_rng(seed)
    mu, d = 3.6, 4
    user_bias = rng.normal(0, 0.4, n_users)
    item_bias = rng.normal(0, 0.4, n_items)
    user_lat = rng.normal(0, 0.3, (n_users, d))
    item_lat = rng.normal(0, 0.3, (n_items, d))
    cells = rng.choice(n_users * n_items, size=n_ratings, replace=False)
    us, js = cells // n_items, cells % n_items
    raw = (mu + user_bias[us] + item_bias[js]
           + np.einsum("ij,ij->i", user_lat[us], item_lat[js])
           + rng.normal(0, noise, n_ratings))
    vals = np.clip(np.rint(raw), 1, 5).astype(int)
    ratings = tuple(Rating(int(u), int(j), int(v), 0)
                    for u, j, v in zip(us, js, vals))
    return RatingsDataset(ratings=ratings, n_users=n_users, n_items=n_items,
                          r_max=5)


@pytest.fixture(scope="session")
def benchmark_dataset() -> RatingsDataset:
    """MovieLens-100K if RECLAB_ML100K points at a u.data file, otherwise
    the structured synthetic surrogate."""
    path = os.environ.get("RECLAB_ML100K")
    if path:
        with open(path, "rb") as fh:
            return parse_movielens(fh, MovieLensFormat.TAB_100K).dataset
    return make_structured_dataset()


@pytest.fixture(scope="session")
def small_dataset() -> RatingsDataset:
    return make_structured_dataset(n_users=120, n_items=150, n_ratings=4000,
                                   seed=11)
