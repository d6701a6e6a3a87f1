"""
Tests for the activity-image encoders (SI, GAF, MTF, RP)
"""

import time
import unittest

import numpy as np

from HAR_core import BinCountError, ChannelCountError, InvalidSeries, MultiSeries, RangeError, ShapeError
from HAR_encoders import (
    SI_ORDER,
    ChannelMode,
    Encoder,
    ImageFilter,
    encode_gaf,
    encode_mtf,
    encode_rp,
    encode_signal_image,
    encode_window,
    epsilon_from_percentile,
    gaf_reconstruct,
    pairwise_distances,
    stack_signal_rows,
    to_activity_image,
)
from har_env import PipelineConfig


def random_window(rng, t=52, c=6):
    return MultiSeries(rng.normal(size=(t, c)), 50.0, label=0, sample_id="w")


class TestSignalImage(unittest.TestCase):
    """Test cases for encode_signal_image"""

    def test_channel_row_order(self):
        ramp = np.tile(np.arange(1, 7, dtype=np.float64), (52, 1))
        rows = stack_signal_rows(ramp)
        self.assertEqual(rows.shape, (24, 52))
        self.assertEqual("".join(str(int(v)) for v in rows[:, 0]), SI_ORDER)
        self.assertTrue(np.all(rows == rows[:, :1]))

        img = encode_signal_image(MultiSeries(ramp, 50.0))
        self.assertEqual(img.shape, (24, 52, 3))
        self.assertTrue(np.all(img.pixels == 0.5))
        self.assertEqual(img.encoder, Encoder.SI)

    def test_every_channel_pair_is_adjacent(self):
        digits = [int(d) for d in SI_ORDER]
        pairs = {frozenset(p) for p in zip(digits, digits[1:])}
        for a in range(1, 7):
            for b in range(a + 1, 7):
                self.assertIn(frozenset((a, b)), pairs)

    def test_rows_rescaled_independently(self):
        rng = np.random.default_rng(0)
        window = random_window(rng)
        img = encode_signal_image(window)
        plane = img.pixels[:, :, 0]
        np.testing.assert_array_equal(plane.min(axis=1), np.zeros(24))
        np.testing.assert_array_equal(plane.max(axis=1), np.ones(24))
        np.testing.assert_array_equal(img.pixels[:, :, 0], img.pixels[:, :, 2])

    def test_time_permutation_permutes_columns(self):
        rng = np.random.default_rng(1)
        window = random_window(rng)
        perm = rng.permutation(52)
        permuted = MultiSeries(window.values[perm], 50.0)
        np.testing.assert_array_equal(encode_signal_image(permuted).pixels,
                                      encode_signal_image(window).pixels[:, perm])

    def test_wrong_channel_count(self):
        with self.assertRaises(ChannelCountError):
            encode_signal_image(MultiSeries(np.zeros((52, 3)), 50.0))

    def test_wrong_length(self):
        with self.assertRaises(ShapeError):
            encode_signal_image(MultiSeries(np.zeros((40, 6)), 50.0), length=52)


class TestGaf(unittest.TestCase):
    """Test cases for encode_gaf"""

    def test_constant_series(self):
        gaf = encode_gaf([5.0, 5.0])
        np.testing.assert_allclose(gaf.phi, [np.pi / 3, np.pi / 3], atol=1e-15)
        np.testing.assert_allclose(gaf.g, np.full((2, 2), -0.5), atol=1e-15)

    def test_endpoint_angles(self):
        gaf = encode_gaf([0.0, 10.0])
        np.testing.assert_allclose(gaf.phi, [np.pi / 2, 0.0], atol=1e-15)
        np.testing.assert_allclose(gaf.g, [[-1.0, 0.0], [0.0, 1.0]], atol=1e-15)

    def test_matrix_form_matches_angle_sum(self):
        rng = np.random.default_rng(2)
        start = time.perf_counter()
        for _ in range(1000):
            n = int(rng.integers(4, 65))
            x = rng.normal(scale=rng.uniform(0.1, 10.0), size=n)
            gaf = encode_gaf(x)
            brute = np.cos(np.add.outer(gaf.phi, gaf.phi))
            np.testing.assert_allclose(gaf.g, brute, rtol=0, atol=1e-12)
            np.testing.assert_array_equal(gaf.g, gaf.g.T)
            np.testing.assert_allclose(gaf_reconstruct(gaf.g), gaf.rescaled, rtol=0, atol=1e-9)
        self.assertLess(time.perf_counter() - start, 10.0)

    def test_metadata(self):
        gaf = encode_gaf(np.arange(8.0))
        self.assertEqual(gaf.span, 8)
        np.testing.assert_allclose(gaf.radius, np.arange(1, 9) / 8)

    def test_non_finite(self):
        with self.assertRaises(InvalidSeries):
            encode_gaf([1.0, np.nan, 2.0])


class TestMtf(unittest.TestCase):
    """Test cases for encode_mtf"""

    def test_hand_counted_transitions(self):
        mtf = encode_mtf([0, 0, 1, 1, 0, 1], Q=2)
        np.testing.assert_array_equal(mtf.bin_of, [0, 0, 1, 1, 0, 1])
        np.testing.assert_allclose(mtf.w, [[1 / 3, 2 / 3], [1 / 2, 1 / 2]], rtol=0, atol=1e-15)
        self.assertEqual(mtf.m[0, 2], mtf.w[0, 1])
        self.assertEqual(mtf.m[3, 4], mtf.w[1, 0])

    def test_increasing_series_has_no_backward_transitions(self):
        for q in (2, 3, 5, 10):
            mtf = encode_mtf(np.arange(20.0), Q=q)
            self.assertTrue(np.all(np.tril(mtf.w, k=-1) == 0))
            self.assertTrue(np.all((mtf.m >= 0) & (mtf.m <= 1)))

    def test_constant_series_single_bin(self):
        mtf = encode_mtf(np.full(12, 3.0), Q=4)
        self.assertEqual(len(set(mtf.bin_of.tolist())), 1)
        nonzero = np.flatnonzero(mtf.w.sum(axis=1))
        self.assertEqual(nonzero.size, 1)
        b = mtf.bin_of[0]
        self.assertEqual(mtf.w[b, b], 1.0)
        self.assertTrue(np.all(mtf.m == 1.0))

    def test_near_equal_bin_counts(self):
        counts = np.bincount(encode_mtf(np.random.default_rng(3).normal(size=100), Q=10).bin_of)
        np.testing.assert_array_equal(counts, np.full(10, 10))

    def test_row_sums_and_rank_invariance(self):
        rng = np.random.default_rng(4)
        start = time.perf_counter()
        for _ in range(500):
            n = int(rng.integers(10, 80))
            q = int(rng.integers(2, 11))
            x = rng.normal(size=n)
            mtf = encode_mtf(x, Q=q)
            sums = mtf.w.sum(axis=1)
            nonzero = sums > 0
            np.testing.assert_allclose(sums[nonzero], 1.0, rtol=0, atol=1e-12)
            self.assertTrue(np.all((mtf.m >= 0) & (mtf.m <= 1)))
            for transformed in (np.exp(x), 8.0 * x + 3.0, x ** 3):
                np.testing.assert_array_equal(encode_mtf(transformed, Q=q).m, mtf.m)
        self.assertLess(time.perf_counter() - start, 10.0)

    def test_bin_count_limits(self):
        with self.assertRaises(BinCountError):
            encode_mtf(np.arange(5.0), Q=6)
        with self.assertRaises(BinCountError):
            encode_mtf(np.arange(5.0), Q=1)


class TestRecurrencePlot(unittest.TestCase):
    """Test cases for encode_rp and epsilon_from_percentile"""

    def test_constant_window(self):
        np.testing.assert_array_equal(encode_rp(np.ones((5, 3)), 0.1).r, np.ones((5, 5)))

    def test_far_rows(self):
        rp = encode_rp(np.array([[0.0, 0.0], [3.0, 4.0]]), 1.0)
        np.testing.assert_array_equal(rp.r, np.eye(2))

    def test_threshold_is_inclusive(self):
        rp = encode_rp(np.array([[0.0, 0.0], [3.0, 4.0]]), 5.0)
        np.testing.assert_array_equal(rp.r, np.ones((2, 2)))

    def test_properties_on_random_windows(self):
        rng = np.random.default_rng(5)
        start = time.perf_counter()
        for _ in range(500):
            t = int(rng.integers(2, 40))
            c = int(rng.integers(1, 7))
            q = rng.normal(size=(t, c))
            eps = float(rng.uniform(0.01, 3.0))
            rp = encode_rp(q, eps)

            brute = np.empty((t, t))
            for i in range(t):
                for j in range(t):
                    brute[i, j] = 1.0 if np.sqrt(np.sum((q[i] - q[j]) ** 2)) <= eps else 0.0
            np.testing.assert_array_equal(rp.r, brute)
            np.testing.assert_array_equal(rp.r, rp.r.T)
            self.assertTrue(set(np.unique(rp.r)) <= {0.0, 1.0})
            np.testing.assert_array_equal(np.diag(rp.r), np.ones(t))

            factor = 2.0 ** int(rng.integers(-4, 5))
            np.testing.assert_array_equal(encode_rp(q * factor, eps * factor).r, rp.r)
        self.assertLess(time.perf_counter() - start, 10.0)

    def test_epsilon_examples(self):
        self.assertEqual(epsilon_from_percentile(np.array([[0.0, 0.0], [3.0, 4.0]]), 50), 5.0)
        self.assertEqual(epsilon_from_percentile(np.full((6, 2), 1.5), 20), 0.0)
        q = np.random.default_rng(6).normal(size=(4, 3))
        d = pairwise_distances(q)
        self.assertEqual(epsilon_from_percentile(q, 100), max(d[i, j] for i in range(4) for j in range(i + 1, 4)))

    def test_epsilon_validation(self):
        with self.assertRaises(RangeError):
            epsilon_from_percentile(np.zeros((3, 1)), 0)
        with self.assertRaises(InvalidSeries):
            epsilon_from_percentile(np.zeros((1, 3)), 20)
        with self.assertRaises(RangeError):
            encode_rp(np.zeros((3, 1)), -1.0)


class TestActivityImages(unittest.TestCase):
    """Test cases for to_activity_image and encode_window"""

    def test_gaf_mapped_to_unit(self):
        img = to_activity_image(encode_gaf([5.0, 5.0, 5.0]), ChannelMode.GRAY3)
        np.testing.assert_allclose(img.pixels, 0.25, atol=1e-15)
        self.assertEqual(img.encoder, Encoder.GAF)
        self.assertEqual(img.filter, ImageFilter.NONE)

    def test_rp_identity_gray3(self):
        rp = encode_rp(np.array([[0.0], [10.0], [20.0]]), 1.0)
        img = to_activity_image(rp, ChannelMode.GRAY3)
        for plane in range(3):
            np.testing.assert_array_equal(img.pixels[:, :, plane], np.eye(3))

    def test_triplet_tiling(self):
        rng = np.random.default_rng(7)
        columns = rng.normal(size=(16, 6))
        matrices = [encode_gaf(columns[:, c]) for c in range(6)]
        img = to_activity_image(matrices, ChannelMode.TRIPLET_RGB)
        self.assertEqual(img.shape, (16, 32, 3))
        np.testing.assert_allclose(img.pixels[:, :16, 1], (matrices[1].g + 1) / 2)
        np.testing.assert_allclose(img.pixels[:, 16:, 2], (matrices[5].g + 1) / 2)

    def test_triplet_needs_six(self):
        with self.assertRaises(ChannelCountError):
            to_activity_image([encode_gaf([1.0, 2.0])] * 3, ChannelMode.TRIPLET_RGB)

    def test_encode_window_shapes(self):
        rng = np.random.default_rng(8)
        window = random_window(rng)
        triplet = PipelineConfig()
        gray = PipelineConfig(channel_mode=ChannelMode.GRAY3)
        cases = [
            (Encoder.SI, triplet, (24, 52, 3)),
            (Encoder.GAF, triplet, (52, 104, 3)),
            (Encoder.MTF, triplet, (52, 104, 3)),
            (Encoder.RP, triplet, (52, 104, 3)),
            (Encoder.GAF, gray, (52, 52, 3)),
            (Encoder.MTF, gray, (52, 52, 3)),
            (Encoder.RP, gray, (52, 52, 3)),
        ]
        for encoder, config, shape in cases:
            with self.subTest(encoder=encoder, mode=config.channel_mode):
                img = encode_window(window, encoder, config)
                self.assertEqual(img.shape, shape)
                self.assertEqual(img.encoder, encoder)
                self.assertEqual(img.source_id, "w@0")

    def test_gray_channel_selection(self):
        window = random_window(np.random.default_rng(9))
        config = PipelineConfig(channel_mode=ChannelMode.GRAY3, gray_channel=2)
        img = encode_window(window, Encoder.GAF, config)
        np.testing.assert_allclose(img.pixels[:, :, 0], (encode_gaf(window.values[:, 2]).g + 1) / 2)

        magnitude = encode_window(window, Encoder.GAF, PipelineConfig(channel_mode=ChannelMode.GRAY3))
        expected = encode_gaf(np.linalg.norm(window.values, axis=1)).g
        np.testing.assert_allclose(magnitude.pixels[:, :, 0], (expected + 1) / 2)

    def test_triplet_requires_six_channels(self):
        window = MultiSeries(np.random.default_rng(10).normal(size=(52, 3)), 50.0)
        with self.assertRaises(ChannelCountError):
            encode_window(window, Encoder.GAF, PipelineConfig())


if __name__ == '__main__':
    unittest.main()
