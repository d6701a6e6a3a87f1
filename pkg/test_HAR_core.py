"""
Tests for the core types, rescaling and windowing
"""

import pickle
import unittest

import numpy as np

from HAR_core import (
    DataError,
    FileAccessError,
    FormatError,
    InvalidSeries,
    LabeledDataset,
    MultiSeries,
    NumericError,
    PipelineStageError,
    RangeError,
    SingularCovariance,
    rescale_unit,
    window_offsets,
    window_series,
)


def make_series(t=104, c=6, label=0, sample_id="s"):
    values = np.arange(t * c, dtype=np.float64).reshape(t, c)
    return MultiSeries(values, 50.0, label=label, sample_id=sample_id)


class TestRescaleUnit(unittest.TestCase):
    """Test cases for rescale_unit"""

    def test_examples(self):
        np.testing.assert_array_equal(rescale_unit([0, 5, 10]).values, [0.0, 0.5, 1.0])
        np.testing.assert_array_equal(rescale_unit([7, 7, 7]).values, [0.5, 0.5, 0.5])
        np.testing.assert_array_equal(rescale_unit([3, 1, 2]).values, [1.0, 0.0, 0.5])

    def test_records_affine_map(self):
        r = rescale_unit([3, 1, 2])
        self.assertEqual((r.min_raw, r.max_raw), (1.0, 3.0))

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            x = rng.normal(scale=rng.uniform(0.1, 100.0), size=int(rng.integers(2, 80)))
            r = rescale_unit(x)
            self.assertTrue(np.all((r.values >= 0) & (r.values <= 1)))
            np.testing.assert_allclose(r.inverse(), x, rtol=0, atol=1e-12 * max(1.0, np.abs(x).max()))

    def test_idempotent_on_unit_vectors(self):
        x = np.array([0.0, 0.25, 1.0, 0.5])
        np.testing.assert_array_equal(rescale_unit(x).values, x)

    def test_degenerate_has_no_inverse(self):
        with self.assertRaises(InvalidSeries):
            rescale_unit([2.0, 2.0]).inverse()

    def test_rejects_non_finite_and_empty(self):
        for bad in ([1.0, np.nan], [np.inf, 0.0], []):
            with self.subTest(bad=bad), self.assertRaises(InvalidSeries):
                rescale_unit(bad)


class TestMultiSeries(unittest.TestCase):
    """Test cases for MultiSeries validation"""

    def test_default_channel_names(self):
        s = make_series(c=3)
        self.assertEqual(s.channel_names, ["ch1", "ch2", "ch3"])
        self.assertEqual((s.length, s.channels), (104, 3))

    def test_values_are_copied_and_frozen(self):
        raw = np.zeros((4, 2))
        s = MultiSeries(raw, 10.0)
        raw[0, 0] = 5.0
        self.assertEqual(s.values[0, 0], 0.0)
        self.assertTrue(raw.flags.writeable)
        with self.assertRaises(ValueError):
            s.values[0, 0] = 1.0

    def test_one_dimensional_input_is_single_channel(self):
        self.assertEqual(MultiSeries([1.0, 2.0, 3.0], 1.0).values.shape, (3, 1))

    def test_invalid(self):
        cases = {
            "too short": dict(values=np.zeros((1, 3)), rate_hz=1.0),
            "non-finite": dict(values=np.array([[1.0], [np.nan]]), rate_hz=1.0),
            "bad rate": dict(values=np.zeros((3, 1)), rate_hz=0.0),
            "names": dict(values=np.zeros((3, 2)), rate_hz=1.0, channel_names=["a"]),
        }
        for name, kwargs in cases.items():
            with self.subTest(name), self.assertRaises(InvalidSeries):
                MultiSeries(**kwargs)


class TestWindowing(unittest.TestCase):
    """Test cases for window_series"""

    def test_exact_tiling(self):
        windows = window_series(make_series(t=104), 52, 52)
        self.assertEqual([w.offset for w in windows], [0, 52])
        for w in windows:
            self.assertEqual(w.values.shape, (52, 6))
            self.assertEqual(w.label, 0)

    def test_short_recording_is_padded(self):
        s = make_series(t=30)
        (w,) = window_series(s, 52, 52)
        self.assertEqual(w.values.shape, (52, 6))
        np.testing.assert_array_equal(w.values[:30], s.values)
        np.testing.assert_array_equal(w.values[30:], np.repeat(s.values[29:30], 22, axis=0))

    def test_final_flush_window(self):
        self.assertEqual(window_offsets(100, 52, 26), [0, 26, 48])
        windows = window_series(make_series(t=100), 52, 26)
        self.assertEqual([w.offset for w in windows], [0, 26, 48])
        np.testing.assert_array_equal(windows[-1].values, make_series(t=100).values[48:])

    def test_equal_length_gives_one_window(self):
        self.assertEqual(window_offsets(52, 52, 10), [0])

    def test_parameters_validated(self):
        with self.assertRaises(RangeError):
            window_series(make_series(), 1, 1)
        with self.assertRaises(RangeError):
            window_series(make_series(), 52, 0)


class TestDatasetAndErrors(unittest.TestCase):
    """Test cases for LabeledDataset and the error hierarchy"""

    def test_labels_and_subset(self):
        ds = LabeledDataset([make_series(label=i % 2, sample_id=str(i)) for i in range(4)], ["a", "b"])
        np.testing.assert_array_equal(ds.labels(), [0, 1, 0, 1])
        sub = ds.subset([1, 3])
        self.assertEqual([s.sample_id for s in sub.samples], ["1", "3"])
        self.assertEqual(sub.num_classes, 2)

    def test_label_out_of_range(self):
        with self.assertRaises(RangeError):
            LabeledDataset([make_series(label=2)], ["a", "b"])

    def test_exit_codes(self):
        self.assertEqual(FormatError("x").exit_code, 3)
        self.assertEqual(FileAccessError("x").exit_code, 3)
        self.assertEqual(SingularCovariance("x").exit_code, 4)
        self.assertIsInstance(FormatError("x"), ValueError)
        self.assertIsInstance(NumericError("x"), ValueError)
        self.assertIsInstance(SingularCovariance("x"), NumericError)

    def test_stage_error_keeps_cause(self):
        err = PipelineStageError("fuse", SingularCovariance("rank deficient"))
        self.assertEqual(str(err), "[fuse] rank deficient")
        self.assertEqual(err.exit_code, 4)
        copy = pickle.loads(pickle.dumps(err))
        self.assertEqual(str(copy), str(err))
        self.assertEqual(copy.exit_code, 4)
        self.assertIsInstance(copy.cause, SingularCovariance)
        self.assertNotIsInstance(err, DataError)


if __name__ == '__main__':
    unittest.main()
