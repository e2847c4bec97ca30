import numpy as np
import pytest

from reclab.core import DatasetError, Rating, RatingsDataset
from reclab.evaluation import NamedPredictor, compare, mae, random_baseline_mae
from reclab.ingest import generate_zipf


def dataset(triples, n_users, n_items, r_max=5):
    return RatingsDataset(ratings=tuple(Rating(u, i, v) for u, i, v in triples),
                          n_users=n_users, n_items=n_items, r_max=r_max)


def uniform_dataset(n_cells, r_max=5, seed=0):
    rng = np.random.default_rng(seed)
    n_users = 400
    n_items = (n_cells + n_users - 1) // n_users
    ratings = []
    count = 0
    for u in range(n_users):
        for i in range(n_items):
            if count >= n_cells:
                break
            ratings.append(Rating(u, i, int(rng.integers(1, r_max + 1))))
            count += 1
    return RatingsDataset(ratings=tuple(ratings), n_users=n_users,
                          n_items=n_items, r_max=r_max)


class TestMae:
    def test_exact_truth_gives_zero(self):
        ds = dataset([(0, 0, 3), (0, 1, 5)], 1, 2)
        truth = {(r.user_id, r.item_id): r.value for r in ds.ratings}
        predictor = NamedPredictor("oracle", lambda u, i: float(truth[(u, i)]))
        assert mae(predictor, ds) == 0.0

    def test_constant_offset(self):
        ds = dataset([(0, 0, 2), (0, 1, 4), (1, 0, 3)], 2, 2)
        truth = {(r.user_id, r.item_id): r.value for r in ds.ratings}
        predictor = NamedPredictor("off", lambda u, i: truth[(u, i)] + 1.0)
        assert mae(predictor, ds) == pytest.approx(1.0)

    def test_hand_sum(self):
        ds = dataset([(0, 0, 3), (0, 1, 5)], 1, 2)
        predictor = NamedPredictor("four", lambda u, i: 4.0)
        assert mae(predictor, ds) == pytest.approx(1.0)

    def test_empty_test_rejected(self):
        empty = RatingsDataset(ratings=(), n_users=1, n_items=1)
        with pytest.raises(DatasetError):
            mae(NamedPredictor("x", lambda u, i: 3.0), empty)

    def test_permutation_invariant_over_test_rows(self):
        ds = generate_zipf(30, 30, 300, 1.0, 5, seed=1)
        rev = RatingsDataset(ratings=tuple(reversed(ds.ratings)),
                             n_users=30, n_items=30, r_max=5)
        predictor = NamedPredictor("c", lambda u, i: 3.0)
        assert mae(predictor, ds) == mae(predictor, rev)

    def test_bounded_for_clamped_predictor(self):
        ds = generate_zipf(30, 30, 300, 1.0, 5, seed=2)
        predictor = NamedPredictor("lo", lambda u, i: 1.0)
        assert 0.0 <= mae(predictor, ds) <= 4.0


class TestRandomBaseline:
    def test_single_value_scale_gives_zero(self):
        ds = dataset([(0, 0, 1), (0, 1, 1)], 1, 2, r_max=1)
        assert random_baseline_mae(ds, 7) == 0.0

    def test_uniform_truth_expectation(self):
        # enumerating all 25 (truth, guess) pairs gives E[MAE] = 40/25 = 1.6
        ds = uniform_dataset(100_000, seed=3)
        assert random_baseline_mae(ds, 4) == pytest.approx(1.6, abs=0.05)

    def test_constant_truth_expectation(self):
        # truth 3 on a 1..5 scale: (2+1+0+1+2)/5 = 1.2
        ratings = tuple(Rating(u, i, 3) for u in range(250) for i in range(400))
        ds = RatingsDataset(ratings=ratings, n_users=250, n_items=400)
        assert random_baseline_mae(ds, 5) == pytest.approx(1.2, abs=0.05)

    def test_concentrates_over_seeds(self):
        ds = uniform_dataset(20_000, seed=6)
        maes = [random_baseline_mae(ds, s) for s in range(100, 110)]
        assert np.mean(maes) == pytest.approx(1.6, abs=0.02)

    def test_empty_rejected(self):
        empty = RatingsDataset(ratings=(), n_users=1, n_items=1)
        with pytest.raises(DatasetError):
            random_baseline_mae(empty, 0)


class TestCompare:
    def test_random_only(self):
        ds = generate_zipf(20, 20, 100, 1.0, 5, seed=8)
        report = compare(ds, [], split_ratio=0.2, seed=8, include_random=True)
        assert len(report.entries) == 1
        assert report.entries[0].algorithm == "random"

    def test_row_contract(self):
        ds = generate_zipf(20, 20, 100, 1.0, 5, seed=9)
        predictors = [NamedPredictor("c3", lambda u, i: 3.0),
                      NamedPredictor("c4", lambda u, i: 4.0)]
        report = compare(ds, predictors, split_ratio=0.2, seed=9)
        assert [e.algorithm for e in report.entries] == ["c3", "c4", "random"]
        for entry in report.entries:
            assert entry.mae >= 0.0
            assert entry.n_test_predictions == len(ds)
