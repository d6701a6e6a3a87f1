"""
Dataset Ingestion for the HAR Pipeline
Parses per-recording CSV exports and the dataset manifest, splits datasets,
and reads / writes feature matrices and predictions
"""

from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Sequence, Tuple, Union
import csv
import logging
import math

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import train_test_split

from HAR_core import (
    ChannelCountError,
    FileAccessError,
    FormatError,
    InvalidShape,
    LabeledDataset,
    MissingFileError,
    MultiSeries,
    RangeError,
    StratifyError,
)
from HAR_features import FeatureMatrix
from HAR_imaging import read_tensor, write_tensor

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class ManifestEntry:
    """One recording listed in a manifest"""
    path: str
    label: int
    subject: str = ""


@dataclass
class DatasetManifest:
    """Recordings, class names and sampling rate of one dataset"""
    entries: List[ManifestEntry]
    class_names: List[str]
    rate_hz: float
    root: Path = Path(".")

    def resolve(self, entry: ManifestEntry) -> Path:
        return self.root / entry.path


# --------------------------------------------------------------------------
# Sample CSV files
# --------------------------------------------------------------------------

def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


@contextmanager
def read_errors(path: PathLike) -> Iterator[None]:
    """Report undecodable, malformed or unreadable text files as data errors"""
    try:
        yield
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not valid UTF-8 ({exc.reason} at byte {exc.start})") from exc
    except csv.Error as exc:
        raise FormatError(f"{path}: malformed CSV ({exc})") from exc
    except OSError as exc:
        raise FileAccessError(f"cannot read {path}: {exc.strerror or exc}") from exc


class SampleCSVParser:
    """Parser for one recording: comma-separated reals, one row per time step"""

    def __init__(self, csv_file_path: PathLike, rate_hz: float):
        self.csv_file_path = Path(csv_file_path)
        self.rate_hz = rate_hz
        self.channel_names: List[str] = []
        self.rows: List[List[float]] = []

    def parse(self) -> MultiSeries:
        """Parse the CSV file into a T x C series"""
        if not self.csv_file_path.is_file():
            raise MissingFileError(f"sample file not found: {self.csv_file_path}")

        with read_errors(self.csv_file_path), \
                open(self.csv_file_path, "r", encoding="utf-8", newline="") as file:
            reader = csv.reader(file)
            width = None
            for row_num, row in enumerate(reader, start=1):
                cells = [cell.strip() for cell in row]
                if not any(cells):
                    continue
                if width is None and not self.rows and not self.channel_names \
                        and not all(_is_number(cell) for cell in cells):
                    # first row with a non-numeric cell is the header
                    self.channel_names = cells
                    width = len(cells)
                    continue
                if width is None:
                    width = len(cells)
                if len(cells) != width:
                    raise FormatError(
                        f"{self.csv_file_path}:{row_num}: expected {width} columns, found {len(cells)}")
                self.rows.append(self._parse_row(cells, row_num))

        if not self.rows:
            raise FormatError(f"{self.csv_file_path} has no data rows")
        logger.debug("Parsed %d x %d samples from %s", len(self.rows), width, self.csv_file_path)
        return MultiSeries(
            values=np.array(self.rows, dtype=np.float64),
            rate_hz=self.rate_hz,
            channel_names=self.channel_names,
            sample_id=self.csv_file_path.stem,
        )

    def _parse_row(self, cells: List[str], row_num: int) -> List[float]:
        try:
            return [float(cell) for cell in cells]
        except ValueError as exc:
            raise FormatError(f"{self.csv_file_path}:{row_num}: non-numeric cell ({exc})") from exc


def load_csv_sample(path: PathLike, rate_hz: float) -> MultiSeries:
    """
    Load one recording from CSV

    Args:
        path: CSV file, one row per time step
        rate_hz: sampling rate of the recording

    Returns:
        MultiSeries; a non-numeric first row becomes the channel names
    """
    return SampleCSVParser(path, rate_hz).parse()


# --------------------------------------------------------------------------
# Manifest
# --------------------------------------------------------------------------

class ManifestParser:
    """
    Parser for the dataset manifest

    Header lines `class: <name>` (one per class, in label order) and
    `rate_hz: <value>`, then a `path,label,subject` table. '#' starts a comment.
    """

    def __init__(self, manifest_path: PathLike):
        self.manifest_path = Path(manifest_path)
        self.class_names: List[str] = []
        self.rate_hz: float = 0.0
        self.entries: List[ManifestEntry] = []

    def parse(self) -> DatasetManifest:
        if not self.manifest_path.is_file():
            raise MissingFileError(f"manifest not found: {self.manifest_path}")

        in_table = False
        with read_errors(self.manifest_path), open(self.manifest_path, "r", encoding="utf-8") as file:
            for line_num, raw in enumerate(file, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if not in_table:
                    key, sep, value = line.partition(":")
                    key = key.strip().lower()
                    if sep and key == "class":
                        self.class_names.append(value.strip())
                        continue
                    if sep and key == "rate_hz":
                        self.rate_hz = self._parse_rate(value.strip(), line_num)
                        continue
                    if [c.strip().lower() for c in line.split(",")] == ["path", "label", "subject"]:
                        in_table = True
                        continue
                    raise FormatError(f"{self.manifest_path}:{line_num}: unexpected header line {line!r}")
                self.entries.append(self._parse_entry(line, line_num))

        manifest = DatasetManifest(self.entries, self.class_names, self.rate_hz, self.manifest_path.parent)
        self._validate(manifest)
        return manifest

    def _parse_rate(self, value: str, line_num: int) -> float:
        try:
            rate = float(value)
        except ValueError as exc:
            raise FormatError(f"{self.manifest_path}:{line_num}: bad rate_hz {value!r}") from exc
        if not rate > 0 or not math.isfinite(rate):
            raise RangeError(f"{self.manifest_path}:{line_num}: rate_hz must be positive")
        return rate

    def _parse_entry(self, line: str, line_num: int) -> ManifestEntry:
        cells = [cell.strip() for cell in line.split(",")]
        if len(cells) not in (2, 3) or not cells[0]:
            raise FormatError(f"{self.manifest_path}:{line_num}: expected path,label,subject")
        try:
            label = int(cells[1])
        except ValueError as exc:
            raise FormatError(f"{self.manifest_path}:{line_num}: non-integer label {cells[1]!r}") from exc
        return ManifestEntry(path=cells[0], label=label, subject=cells[2] if len(cells) == 3 else "")

    def _validate(self, manifest: DatasetManifest):
        k = len(manifest.class_names)
        if k == 0:
            raise FormatError(f"{self.manifest_path} declares no classes")
        if manifest.rate_hz <= 0:
            raise FormatError(f"{self.manifest_path} has no rate_hz line")
        seen = set()
        for entry in manifest.entries:
            if entry.path in seen:
                raise FormatError(f"{self.manifest_path}: duplicate path {entry.path!r}")
            seen.add(entry.path)
            if not 0 <= entry.label < k:
                raise RangeError(
                    f"{self.manifest_path}: label {entry.label} of {entry.path!r} outside [0, {k})")
            if not manifest.resolve(entry).is_file():
                raise MissingFileError(f"{self.manifest_path}: {entry.path!r} does not exist")
        present = {entry.label for entry in manifest.entries}
        missing = [manifest.class_names[c] for c in range(k) if c not in present]
        if missing:
            raise RangeError(f"{self.manifest_path}: no entries for classes {missing}")


def load_manifest(path: PathLike) -> DatasetManifest:
    """Parse and validate a dataset manifest"""
    return ManifestParser(path).parse()


def _sample_id(entry: ManifestEntry) -> str:
    stem = str(Path(entry.path).with_suffix(""))
    return stem.replace("\\", "-").replace("/", "-")


def _load_entry(manifest: DatasetManifest, entry: ManifestEntry) -> MultiSeries:
    series = load_csv_sample(manifest.resolve(entry), manifest.rate_hz)
    return MultiSeries(series.values, series.rate_hz, series.channel_names,
                       label=entry.label, sample_id=_sample_id(entry))


def load_dataset(manifest: DatasetManifest, jobs: int = 1) -> LabeledDataset:
    """
    Load every recording of a manifest

    Args:
        manifest: validated manifest
        jobs: joblib worker count for the file loads

    Returns:
        LabeledDataset in manifest order
    """
    logger.info("Loading %d recordings (%d classes)", len(manifest.entries), len(manifest.class_names))
    samples = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(_load_entry)(manifest, entry) for entry in manifest.entries)

    channels = {s.channels for s in samples}
    if len(channels) > 1:
        raise ChannelCountError(f"recordings have mixed channel counts: {sorted(channels)}")
    return LabeledDataset(samples, list(manifest.class_names))


# --------------------------------------------------------------------------
# Stratified split
# --------------------------------------------------------------------------

def stratified_indices(labels: Sequence[int], train_frac: float,
                       seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-class random split of row indices

    Each class of size m contributes round(train_frac * m) rows to training,
    clipped to [1, m - 1] so both parts see every class.

    Returns:
        (train indices, test indices), each sorted ascending
    """
    if not 0 < train_frac < 1:
        raise RangeError(f"train_frac must lie in (0, 1), got {train_frac}")
    labels = np.asarray(labels, dtype=np.int64)
    random_state = np.random.RandomState(seed)

    train, test = [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if members.size < 2:
            raise StratifyError(f"class {cls} has {members.size} sample(s); need at least 2 to split")
        n_train = int(math.floor(train_frac * members.size + 0.5))
        n_train = min(max(n_train, 1), members.size - 1)
        part_train, part_test = train_test_split(members, train_size=n_train, random_state=random_state)
        train.append(part_train)
        test.append(part_test)
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split_train_test(ds: LabeledDataset, train_frac: float,
                     seed: int) -> Tuple[LabeledDataset, LabeledDataset]:
    """
    Stratified random train/test split, deterministic for a given seed

    Args:
        ds: dataset to split
        train_frac: training share per class, 0 < train_frac < 1
        seed: random seed

    Returns:
        (train, test) datasets partitioning ds
    """
    train_idx, test_idx = stratified_indices(ds.labels(), train_frac, seed)
    return ds.subset(train_idx), ds.subset(test_idx)


# --------------------------------------------------------------------------
# Feature and prediction files
# --------------------------------------------------------------------------

def export_features(fm: FeatureMatrix, path: PathLike):
    """Write features as an ITNS n x (p + 1) tensor, label in column 0"""
    table = np.hstack([fm.labels.astype(np.float64)[:, None], fm.x])
    write_tensor(table, path)


def import_features(path: PathLike) -> FeatureMatrix:
    """
    Read features written by export_features

    Returns:
        FeatureMatrix tagged with the file stem
    """
    path = Path(path)
    table = read_tensor(path)
    if table.ndim != 2:
        raise InvalidShape(f"{path}: feature tensor must be rank 2, got rank {table.ndim}")
    if table.shape[0] < 1 or table.shape[1] < 2:
        raise InvalidShape(f"{path}: feature tensor {table.shape} holds no features")
    labels = table[:, 0]
    if not np.all(labels == np.round(labels)) or labels.min() < 0:
        raise FormatError(f"{path}: label column holds non-integer or negative values")
    return FeatureMatrix(table[:, 1:], labels.astype(np.int64), path.stem)


def export_predictions(path: PathLike, sample_ids: Sequence[str], truth, pred):
    """Write predictions as CSV sample_id,truth,pred"""
    if not len(sample_ids) == len(truth) == len(pred):
        raise FormatError("sample ids, labels and predictions differ in length")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["sample_id", "truth", "pred"])
        for row in zip(sample_ids, truth, pred):
            writer.writerow([row[0], int(row[1]), int(row[2])])
