"""
Tests for CSV / manifest ingestion, stratified splits and feature files
"""

from pathlib import Path
import tempfile
import unittest

import numpy as np

from HAR_core import (
    ChannelCountError,
    FormatError,
    InvalidShape,
    LabeledDataset,
    MissingFileError,
    MultiSeries,
    RangeError,
    StratifyError,
)
from HAR_features import FeatureMatrix
from HAR_imaging import write_tensor
from HAR_ingest import (
    export_features,
    export_predictions,
    import_features,
    load_csv_sample,
    load_dataset,
    load_manifest,
    split_train_test,
    stratified_indices,
)


def write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def make_dataset(per_class, n_classes=3):
    samples = []
    for label in range(n_classes):
        for i in range(per_class):
            samples.append(MultiSeries(np.full((4, 2), float(i)), 10.0, label=label, sample_id=f"{label}-{i}"))
    return LabeledDataset(samples, [f"c{k}" for k in range(n_classes)])


class TestCsvSample(unittest.TestCase):
    """Test cases for load_csv_sample"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_plain_numeric(self):
        s = load_csv_sample(write(self.dir / "a.csv", "1,2\n3,4\n5,6"), 50.0)
        np.testing.assert_array_equal(s.values, [[1, 2], [3, 4], [5, 6]])
        self.assertEqual(s.channel_names, ["ch1", "ch2"])
        self.assertEqual(s.rate_hz, 50.0)

    def test_header_detected(self):
        s = load_csv_sample(write(self.dir / "b.csv", "ax,ay\n1,2\n3,4\n"), 50.0)
        np.testing.assert_array_equal(s.values, [[1, 2], [3, 4]])
        self.assertEqual(s.channel_names, ["ax", "ay"])

    def test_ragged_row(self):
        with self.assertRaises(FormatError):
            load_csv_sample(write(self.dir / "c.csv", "1,2\n3"), 50.0)

    def test_non_numeric_body(self):
        with self.assertRaises(FormatError):
            load_csv_sample(write(self.dir / "d.csv", "1,2\n3,x\n"), 50.0)

    def test_undecodable_bytes(self):
        path = self.dir / "e.csv"
        path.write_bytes(b"1,2\n3,\xff\xfe\n")
        with self.assertRaises(FormatError):
            load_csv_sample(path, 50.0)

    def test_missing_file(self):
        with self.assertRaises(MissingFileError):
            load_csv_sample(self.dir / "nope.csv", 50.0)


class TestManifest(unittest.TestCase):
    """Test cases for load_manifest and load_dataset"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        write(self.dir / "rec" / "a.csv", "ax,ay\n1,2\n3,4\n5,6\n")
        write(self.dir / "rec" / "b.csv", "ax,ay\n0,1\n1,0\n")

    def tearDown(self):
        self.tmp.cleanup()

    def manifest(self, body: str, classes=("walk", "run")) -> Path:
        header = "".join(f"class: {c}\n" for c in classes)
        return write(self.dir / "manifest.txt", header + "rate_hz: 50\n# recordings\npath,label,subject\n" + body)

    def test_two_entries(self):
        m = load_manifest(self.manifest("rec/a.csv,0,s1\nrec/b.csv,1,s2  # second\n"))
        self.assertEqual(m.class_names, ["walk", "run"])
        self.assertEqual(m.rate_hz, 50.0)
        self.assertEqual([(e.path, e.label, e.subject) for e in m.entries],
                         [("rec/a.csv", 0, "s1"), ("rec/b.csv", 1, "s2")])

        ds = load_dataset(m)
        self.assertEqual(ds.num_classes, 2)
        self.assertEqual([s.sample_id for s in ds.samples], ["rec-a", "rec-b"])
        np.testing.assert_array_equal(ds.labels(), [0, 1])
        self.assertEqual(ds.samples[0].values.shape, (3, 2))

    def test_missing_csv(self):
        with self.assertRaises(MissingFileError):
            load_manifest(self.manifest("rec/a.csv,0,s1\nrec/zzz.csv,1,s2\n"))

    def test_label_out_of_range(self):
        with self.assertRaises(RangeError):
            load_manifest(self.manifest("rec/a.csv,0,s1\nrec/b.csv,5,s2\n", classes=("a", "b", "c")))

    def test_duplicate_path(self):
        with self.assertRaises(FormatError):
            load_manifest(self.manifest("rec/a.csv,0,s1\nrec/a.csv,1,s2\nrec/b.csv,1,s2\n"))

    def test_class_without_entries(self):
        with self.assertRaises(RangeError):
            load_manifest(self.manifest("rec/a.csv,0,s1\nrec/b.csv,0,s2\n"))

    def test_undecodable_manifest(self):
        path = self.dir / "bad.txt"
        path.write_bytes(b"class: walk\nclass: \xff\xfe\nrate_hz: 50\n")
        with self.assertRaises(FormatError):
            load_manifest(path)

    def test_missing_manifest(self):
        with self.assertRaises(MissingFileError):
            load_manifest(self.dir / "none.txt")

    def test_mixed_channel_counts(self):
        write(self.dir / "rec" / "b.csv", "1,2,3\n4,5,6\n")
        m = load_manifest(self.manifest("rec/a.csv,0,s1\nrec/b.csv,1,s2\n"))
        with self.assertRaises(ChannelCountError):
            load_dataset(m)


class TestStratifiedSplit(unittest.TestCase):
    """Test cases for split_train_test"""

    def test_eighty_twenty(self):
        ds = make_dataset(per_class=10)
        train, test = split_train_test(ds, 0.8, seed=3)
        np.testing.assert_array_equal(np.bincount(train.labels()), [8, 8, 8])
        np.testing.assert_array_equal(np.bincount(test.labels()), [2, 2, 2])

    def test_half(self):
        train, test = split_train_test(make_dataset(per_class=4), 0.5, seed=0)
        np.testing.assert_array_equal(np.bincount(train.labels()), [2, 2, 2])
        np.testing.assert_array_equal(np.bincount(test.labels()), [2, 2, 2])

    def test_partition_and_determinism(self):
        labels = np.repeat([0, 1, 2], [7, 11, 5])
        for seed in range(10):
            train, test = stratified_indices(labels, 0.8, seed)
            self.assertEqual(np.intersect1d(train, test).size, 0)
            np.testing.assert_array_equal(np.union1d(train, test), np.arange(labels.size))
            again = stratified_indices(labels, 0.8, seed)
            np.testing.assert_array_equal(train, again[0])
            for cls, size in zip(range(3), (7, 11, 5)):
                self.assertLessEqual(abs(np.sum(labels[train] == cls) - 0.8 * size), 1)

    def test_seeds_differ(self):
        labels = np.repeat([0, 1], 20)
        self.assertFalse(np.array_equal(stratified_indices(labels, 0.8, 0)[0],
                                        stratified_indices(labels, 0.8, 1)[0]))

    def test_every_class_on_both_sides(self):
        labels = np.repeat([0, 1], [2, 3])
        train, test = stratified_indices(labels, 0.9, 0)
        self.assertEqual(set(labels[train]), {0, 1})
        self.assertEqual(set(labels[test]), {0, 1})

    def test_singleton_class(self):
        ds = LabeledDataset(make_dataset(per_class=3).samples[:7], ["c0", "c1", "c2"])
        with self.assertRaises(StratifyError):
            split_train_test(ds, 0.8, seed=0)

    def test_bad_fraction(self):
        with self.assertRaises(RangeError):
            stratified_indices([0, 0, 1, 1], 1.0, 0)


class TestFeatureFiles(unittest.TestCase):
    """Test cases for feature and prediction files"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_roundtrip_is_bit_exact(self):
        rng = np.random.default_rng(0)
        fm = FeatureMatrix(rng.normal(size=(5, 3)), [0, 1, 2, 1, 0], "prewitt")
        export_features(fm, self.dir / "prewitt.itns")
        back = import_features(self.dir / "prewitt.itns")
        self.assertEqual(back.x.tobytes(), fm.x.tobytes())
        np.testing.assert_array_equal(back.labels, fm.labels)
        self.assertEqual(back.modality_tag, "prewitt")

    def test_truncated(self):
        fm = FeatureMatrix(np.ones((5, 3)), np.zeros(5), "base")
        export_features(fm, self.dir / "base.itns")
        blob = (self.dir / "base.itns").read_bytes()
        (self.dir / "cut.itns").write_bytes(blob[:-5])
        with self.assertRaises(FormatError):
            import_features(self.dir / "cut.itns")

    def test_no_feature_columns(self):
        write_tensor(np.zeros((4, 1)), self.dir / "labels_only.itns")
        with self.assertRaises(InvalidShape):
            import_features(self.dir / "labels_only.itns")
        write_tensor(np.zeros((4, 0)), self.dir / "empty.itns")
        with self.assertRaises(InvalidShape):
            import_features(self.dir / "empty.itns")

    def test_predictions_csv(self):
        export_predictions(self.dir / "p.csv", ["a", "b"], [0, 1], np.array([0, 0]))
        self.assertEqual((self.dir / "p.csv").read_text(), "sample_id,truth,pred\na,0,0\nb,1,0\n")


if __name__ == '__main__':
    unittest.main()
