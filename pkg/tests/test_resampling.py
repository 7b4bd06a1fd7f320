"""Substream determinism, resample bounds, and nearest-rank quantiles."""

import numpy as np
import pytest

from ppboot import RngStream, draw_resample, empirical_quantile
from ppboot.resampling import draw_labeled_indices, nearest_rank_index


class TestRngStream:
    def test_same_path_same_draws(self):
        a = RngStream(7, (1, 2, 3)).generator().integers(0, 1000, 20)
        b = RngStream(7, (1, 2, 3)).generator().integers(0, 1000, 20)
        assert np.array_equal(a, b)

    def test_distinct_paths_differ(self):
        a = RngStream(7, (1, 2, 3)).generator().integers(0, 1000, 20)
        b = RngStream(7, (1, 2, 4)).generator().integers(0, 1000, 20)
        assert not np.array_equal(a, b)

    def test_prefix_paths_are_distinct_streams(self):
        # (0,) and (0, 1) must not collide even though one extends the other.
        a = RngStream(7, (0,)).generator().integers(0, 1000, 20)
        b = RngStream(7, (0, 1)).generator().integers(0, 1000, 20)
        assert not np.array_equal(a, b)

    def test_child_appends_components(self):
        s = RngStream(7, (1,)).child(2, 3)
        assert s.path == (1, 2, 3)
        assert s.master_seed == 7

    def test_rejects_bad_seed_and_path(self):
        with pytest.raises(ValueError):
            RngStream(-1)
        with pytest.raises(ValueError):
            RngStream(0, (-2,))


class TestDrawResample:
    def test_singleton_draw_is_forced(self):
        idx = draw_resample(1, 1, RngStream(0))
        assert idx.labeled_idx.tolist() == [0]
        assert idx.unlabeled_idx.tolist() == [0]

    def test_determinism(self):
        a = draw_resample(5, 9, RngStream(3, (2,)))
        b = draw_resample(5, 9, RngStream(3, (2,)))
        assert np.array_equal(a.labeled_idx, b.labeled_idx)
        assert np.array_equal(a.unlabeled_idx, b.unlabeled_idx)

    def test_bounds_and_sizes(self):
        idx = draw_resample(5, 9, RngStream(1))
        assert idx.labeled_idx.size == 5 and idx.unlabeled_idx.size == 9
        assert idx.labeled_idx.min() >= 0 and idx.labeled_idx.max() < 5
        assert idx.unlabeled_idx.min() >= 0 and idx.unlabeled_idx.max() < 9

    def test_marginal_uniformity(self):
        # 10000 resamples of size 5: each index frequency within 3 SE of 1/5.
        counts = np.zeros(5)
        for b in range(10000):
            counts += np.bincount(draw_resample(5, 7, RngStream(11, (b,))).labeled_idx, minlength=5)
        freqs = counts / counts.sum()
        se = np.sqrt(0.2 * 0.8 / counts.sum())
        assert np.all(np.abs(freqs - 0.2) < 3 * se)

    def test_streams_never_collide(self):
        seen = {tuple(draw_resample(20, 20, RngStream(5, (2, b))).labeled_idx.tolist()) for b in range(1000)}
        assert len(seen) == 1000

    def test_labeled_prefix_matches_labeled_only_draw(self):
        # Classical (labeled-only) consumers must see the same indices.
        s = RngStream(9, (4, 2, 17, 0))
        both = draw_resample(8, 30, s)
        only = draw_labeled_indices(8, s)
        assert np.array_equal(both.labeled_idx, only)

    def test_unlabeled_draws_independent_of_labeled_size(self):
        # Methods with different labeled sizes stay paired on the unlabeled side.
        s = RngStream(9, (4, 2, 17, 0))
        a = draw_resample(5, 30, s)
        b = draw_resample(17, 30, s)
        assert np.array_equal(a.unlabeled_idx, b.unlabeled_idx)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            draw_resample(0, 5, RngStream(0))
        with pytest.raises(ValueError):
            draw_resample(5, 0, RngStream(0))


class TestEmpiricalQuantile:
    def test_constant_vector(self):
        for q in (0.01, 0.5, 0.99):
            assert empirical_quantile([4.2] * 7, q) == 4.2

    def test_fifth_order_statistic(self):
        # 100 values 10..1000; q=0.05 picks the 5th smallest by explicit sort.
        values = [10.0 * k for k in range(1, 101)]
        assert empirical_quantile(values, 0.05) == sorted(values)[4] == 50.0

    def test_small_median(self):
        assert empirical_quantile([3.0, 1.0, 2.0], 0.5) == 2.0

    def test_monotone_in_q(self):
        g = np.random.default_rng(0)
        v = g.standard_normal(37)
        qs = np.linspace(0.01, 0.99, 25)
        vals = [empirical_quantile(v, q) for q in qs]
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_returns_element_of_sample(self):
        g = np.random.default_rng(1)
        for trial in range(50):
            v = g.standard_normal(g.integers(1, 40))
            q = float(g.uniform(0.01, 0.99))
            assert empirical_quantile(v, q) in v

    def test_integral_products_do_not_round_up(self):
        # q*m mathematically integral must land on that rank exactly.
        assert nearest_rank_index(0.05, 100) == 4
        assert nearest_rank_index(0.2, 5) == 0
        assert nearest_rank_index(0.5, 4) == 1
        assert nearest_rank_index(0.95, 1000) == 949

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            empirical_quantile([], 0.5)
        with pytest.raises(ValueError):
            empirical_quantile([1.0], 0.0)
        with pytest.raises(ValueError):
            empirical_quantile([1.0], 1.0)
