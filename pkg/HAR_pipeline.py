"""
Main Pipeline for the HAR Activity-Image System
Orchestrates manifest → windows → activity images → features → two-stage CCF → SVM → report
"""

from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union
import csv
import logging

import numpy as np
from joblib import Parallel, delayed

from HAR_classify import (
    EvalReport,
    SplitSummary,
    aggregate_reports,
    evaluate,
    load_svm,
    save_svm,
    svm_predict,
    svm_train,
    write_confusion_csv,
)
from HAR_core import (
    AlignmentError,
    FileAccessError,
    FormatError,
    HARError,
    LabeledDataset,
    MissingFileError,
    MultiSeries,
    NumericError,
    PipelineStageError,
    window_series,
)
from HAR_encoders import ActivityImage, Encoder, ImageFilter, encode_window
from HAR_features import MODALITY_ORDER, FeatureMatrix, baseline_extract, image_features, stack_modalities
from HAR_fusion import TwoStageFusion
from HAR_imaging import make_modalities, read_png, resize_bicubic, write_png
from HAR_ingest import (
    export_features,
    export_predictions,
    import_features,
    load_dataset,
    load_manifest,
    stratified_indices,
)
from har_env import PipelineConfig, format_config

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

INDEX_FILE = "index.csv"
INDEX_HEADER = ["file", "sample_id", "window", "encoder", "filter", "label"]
SAMPLES_FILE = "samples.csv"
CLASSES_FILE = "classes.txt"
REPORT_FILE = "report.txt"
CONFUSION_FILE = "confusion.csv"
PREDICTIONS_FILE = "predictions.csv"
CONFIG_ECHO_FILE = "config.txt"

PROGRESS_BATCH = 64


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Tag any pipeline error raised inside the block with the stage name"""
    try:
        yield
    except PipelineStageError:
        raise
    except HARError as exc:
        raise PipelineStageError(name, exc) from exc
    except np.linalg.LinAlgError as exc:
        raise PipelineStageError(name, NumericError(f"linear algebra failed: {exc}")) from exc
    except UnicodeDecodeError as exc:
        raise PipelineStageError(name, FormatError(f"not valid UTF-8 ({exc.reason})")) from exc
    except OSError as exc:
        raise PipelineStageError(name, FileAccessError(f"{exc.filename or 'file'}: {exc.strerror or exc}")) from exc


def banner(title: str):
    logger.info("=" * 80)
    logger.info("  %s", title)
    logger.info("=" * 80)


@dataclass
class WindowRecord:
    """Provenance of one feature row"""
    sample_index: int
    sample_id: str
    window: int
    label: int

    @property
    def row_id(self) -> str:
        return f"{self.sample_id}_{self.window:03d}"


def image_name(sample_id: str, window: int, encoder: Encoder, image_filter: ImageFilter) -> str:
    return f"{sample_id}_{window:03d}_{Encoder(encoder).value}_{ImageFilter(image_filter).value}.png"


def cut_windows(ds: LabeledDataset, config: PipelineConfig) -> Tuple[List[MultiSeries], List[WindowRecord]]:
    """Window every recording; records keep the recording index for grouped splits"""
    windows, records = [], []
    for index, sample in enumerate(ds.samples):
        for number, window in enumerate(window_series(sample, config.window_length, config.window_stride)):
            windows.append(window)
            records.append(WindowRecord(index, sample.sample_id, number, int(sample.label)))
    return windows, records


def _resize(img: ActivityImage, config: PipelineConfig) -> ActivityImage:
    if config.resize_height and img.shape[:2] != (config.resize_height, config.resize_width):
        return resize_bicubic(img, config.resize_height, config.resize_width)
    return img


def encode_modalities(window: MultiSeries, config: PipelineConfig) -> List[ActivityImage]:
    """Base, Prewitt and high-boost images of one window, resized to the configured size"""
    base = encode_window(window, config.encoder, config)
    return [_resize(img, config) for img in make_modalities(base, config)]


def write_window_images(images: Sequence[ActivityImage], record: WindowRecord, config: PipelineConfig,
                        image_dir: Path) -> List[List]:
    """Write the modality images of one window as PNG; returns their index rows"""
    rows = []
    for img in images:
        name = image_name(record.sample_id, record.window, config.encoder, img.filter)
        write_png(img, image_dir / name)
        rows.append([name, record.sample_id, record.window, config.encoder.value,
                     img.filter.value, record.label])
    return rows


def _window_task(window: MultiSeries, record: WindowRecord, config: PipelineConfig,
                 image_dir: Optional[Path]) -> Tuple[List[np.ndarray], List[List]]:
    with stage("encode"):
        images = encode_modalities(window, config)
        rows = write_window_images(images, record, config, image_dir) if image_dir is not None else []
    with stage("extract"):
        features = [image_features(img) for img in images]
    return features, rows


def write_image_index(rows: Sequence[Sequence], path: Path):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(INDEX_HEADER)
        writer.writerows(rows)


def read_image_index(images_dir: PathLike) -> List[Dict[str, str]]:
    path = Path(images_dir) / INDEX_FILE
    if not path.is_file():
        raise MissingFileError(f"image index not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != INDEX_HEADER:
            raise FormatError(f"{path} header must be {','.join(INDEX_HEADER)}")
        return list(reader)


def write_class_names(class_names: Sequence[str], directory: Path):
    (directory / CLASSES_FILE).write_text("".join(f"{name}\n" for name in class_names), encoding="utf-8")


def read_class_names(directory: PathLike) -> Optional[List[str]]:
    path = Path(directory) / CLASSES_FILE
    if not path.is_file():
        return None
    return [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def write_samples(records: Sequence[WindowRecord], directory: Path):
    with open(directory / SAMPLES_FILE, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["row", "sample_id", "window", "label"])
        for row, record in enumerate(records):
            writer.writerow([row, record.sample_id, record.window, record.label])


def read_samples(directory: PathLike) -> Optional[List[WindowRecord]]:
    """Row provenance written next to feature files, or None when absent"""
    path = Path(directory) / SAMPLES_FILE
    if not path.is_file():
        return None
    records, ids = [], {}
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            try:
                index = ids.setdefault(row["sample_id"], len(ids))
                records.append(WindowRecord(index, row["sample_id"], int(row["window"]), int(row["label"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}: malformed row {row}") from exc
    return records


# --------------------------------------------------------------------------
# Feature extraction over a dataset
# --------------------------------------------------------------------------

def extract_dataset(ds: LabeledDataset, config: PipelineConfig,
                    image_dir: Optional[PathLike] = None) -> Tuple[List[FeatureMatrix], List[WindowRecord]]:
    """
    Encode every window into three modalities and extract baseline features

    Args:
        ds: loaded dataset
        config: pipeline configuration
        image_dir: when given, every image is also written there as PNG plus index.csv

    Returns:
        ([base, prewitt, highboost] feature matrices, per-row window records)
    """
    windows, records = cut_windows(ds, config)
    if image_dir is not None:
        image_dir = Path(image_dir)
        image_dir.mkdir(parents=True, exist_ok=True)

    logger.info("Encoding %d windows from %d recordings (%s, %s)",
                len(windows), len(ds), config.encoder.value, config.channel_mode.value)
    results = []
    with Parallel(n_jobs=config.jobs) as parallel:
        for start in range(0, len(windows), PROGRESS_BATCH):
            stop = min(start + PROGRESS_BATCH, len(windows))
            results += parallel(
                delayed(_window_task)(windows[i], records[i], config, image_dir) for i in range(start, stop))
            logger.info("  Progress: %d/%d", stop, len(windows))

    labels = [record.label for record in records]
    runs = [
        FeatureMatrix(np.vstack([features[m] for features, _ in results]), labels, tag)
        for m, tag in enumerate(MODALITY_ORDER)
    ]
    if image_dir is not None:
        write_image_index([row for _, rows in results for row in rows], image_dir / INDEX_FILE)
        write_class_names(ds.class_names, image_dir)
    return runs, records


# --------------------------------------------------------------------------
# Repeated split evaluation
# --------------------------------------------------------------------------

def split_rows(labels: np.ndarray, groups: Optional[np.ndarray], train_frac: float,
               seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Stratified split of feature rows

    With groups (one id per row, e.g. the recording a window came from) the
    split is drawn over groups so windows of one recording never straddle
    train and test.
    """
    if groups is None:
        return stratified_indices(labels, train_frac, seed)
    groups = np.asarray(groups)
    if groups.shape[0] != labels.shape[0]:
        raise AlignmentError(f"{groups.shape[0]} group ids for {labels.shape[0]} rows")
    ids, first = np.unique(groups, return_index=True)
    for gid in ids:
        if np.unique(labels[groups == gid]).size != 1:
            raise AlignmentError(f"rows of group {gid} carry different labels")
    train_g, test_g = stratified_indices(labels[first], train_frac, seed)
    return (np.flatnonzero(np.isin(groups, ids[train_g])),
            np.flatnonzero(np.isin(groups, ids[test_g])))


def _evaluate_seed(runs: Sequence[FeatureMatrix], train_rows: np.ndarray, test_rows: np.ndarray,
                   config: PipelineConfig, num_classes: int,
                   seed: int) -> Tuple[EvalReport, Dict[str, EvalReport]]:
    train = [run.subset(train_rows) for run in runs]
    test = [run.subset(test_rows) for run in runs]

    with stage("fuse"):
        fusion = TwoStageFusion(config.cca_dim or None, config.cca_ridge)
        fused_train = fusion.fit_transform(*train)
        fused_test = fusion.transform(*test)

    svm_args = dict(reg_c=config.svm_reg_c, epochs=config.svm_epochs, seed=seed,
                    batch_size=config.svm_batch_size)
    with stage("train"):
        model = svm_train(fused_train, **svm_args)
        single = [svm_train(run, **svm_args) for run in train]

    with stage("eval"):
        report = evaluate(svm_predict(model, fused_test), fused_test.labels, num_classes)
        ablation = {
            run.modality_tag: evaluate(svm_predict(m, run), run.labels, num_classes)
            for m, run in zip(single, test)
        }
    return report, ablation


def evaluate_feature_runs(runs: Sequence[FeatureMatrix], config: PipelineConfig,
                          groups: Optional[np.ndarray] = None,
                          num_classes: Optional[int] = None) -> SplitSummary:
    """
    Repeated stratified evaluation of the fused three-modality features

    Each seed config.seed + r (r < config.repeats) draws a split, fits the
    two-stage CCF on the training rows, trains the SVM on the fused training
    features and scores the fused test features. Every split also scores an
    SVM per single modality for the ablation rows.

    Args:
        runs: base, prewitt and highboost feature matrices over the same rows
        config: pipeline configuration
        groups: optional per-row group id; splits are drawn over groups
        num_classes: K; defaults to max label + 1

    Returns:
        SplitSummary with per-seed metrics and the single-modality ablation
    """
    runs = stack_modalities(runs)
    if len(runs) != 3:
        raise AlignmentError(f"two-stage fusion needs 3 modalities, got {len(runs)}")
    labels = runs[0].labels
    k = num_classes or int(labels.max()) + 1
    seeds = [config.seed + r for r in range(config.repeats)]

    with stage("ingest"):
        splits = [split_rows(labels, groups, config.train_frac, seed) for seed in seeds]

    logger.info("Evaluating %d random splits (train_frac=%s, %d rows, %d classes)",
                len(seeds), config.train_frac, len(labels), k)
    results = Parallel(n_jobs=config.jobs)(
        delayed(_evaluate_seed)(runs, train_rows, test_rows, config, k, seed)
        for seed, (train_rows, test_rows) in zip(seeds, splits))

    for seed, (report, _) in zip(seeds, results):
        logger.info("  Seed %d: accuracy %.4f, macro precision %.4f",
                    seed, report.accuracy, report.macro_precision)

    reports = [report for report, _ in results]
    ablation = {tag: [single[tag] for _, single in results] for tag in results[0][1]}
    return aggregate_reports(reports, seeds, ablation)


def repeated_split_eval(ds: LabeledDataset, config: PipelineConfig) -> SplitSummary:
    """
    Full pipeline per random split, aggregated over config.repeats seeds

    Features are extracted once for all windows; splits are drawn over
    recordings so windows of one recording stay on one side.
    """
    runs, records = extract_dataset(ds, config)
    groups = np.array([record.sample_index for record in records])
    return evaluate_feature_runs(runs, config, groups, ds.num_classes)


def load_feature_runs(features_dir: PathLike) -> List[FeatureMatrix]:
    """Read base.itns, prewitt.itns and highboost.itns from a directory"""
    features_dir = Path(features_dir)
    return [import_features(features_dir / f"{tag}.itns") for tag in MODALITY_ORDER]


def _groups_from(records: Optional[List[WindowRecord]], n: int) -> Optional[np.ndarray]:
    if records is None:
        return None
    if len(records) != n:
        raise AlignmentError(f"{SAMPLES_FILE} lists {len(records)} rows, features have {n}")
    return np.array([record.sample_index for record in records])


# --------------------------------------------------------------------------
# Pipeline
# --------------------------------------------------------------------------

class HARPipeline:
    """Main orchestration class for the activity-image pipeline"""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.dataset: Optional[LabeledDataset] = None
        self.runs: Optional[List[FeatureMatrix]] = None
        self.records: Optional[List[WindowRecord]] = None
        self.class_names: Optional[List[str]] = None
        self.summary: Optional[SplitSummary] = None

    def load(self, manifest_path: Optional[PathLike] = None) -> LabeledDataset:
        manifest_path = manifest_path or self.config.manifest
        if not manifest_path:
            raise PipelineStageError("ingest", MissingFileError("no manifest given"))
        with stage("ingest"):
            manifest = load_manifest(manifest_path)
            self.dataset = load_dataset(manifest, jobs=self.config.jobs)
        self.class_names = list(self.dataset.class_names)
        logger.info("[OK] Loaded %d recordings", len(self.dataset))
        return self.dataset

    def extract(self, image_dir: Optional[PathLike] = None) -> List[FeatureMatrix]:
        self.runs, self.records = extract_dataset(self.dataset, self.config, image_dir)
        logger.info("[OK] Extracted %d x %d features per modality", self.runs[0].n, self.runs[0].p)
        return self.runs

    def load_features(self, features_dir: PathLike) -> List[FeatureMatrix]:
        with stage("ingest"):
            self.runs = stack_modalities(load_feature_runs(features_dir))
            self.records = read_samples(features_dir)
            self.class_names = read_class_names(features_dir)
            _groups_from(self.records, self.runs[0].n)
        logger.info("[OK] Loaded %d x %d features per modality from %s",
                    self.runs[0].n, self.runs[0].p, features_dir)
        return self.runs

    def evaluate(self) -> SplitSummary:
        groups = _groups_from(self.records, self.runs[0].n)
        k = len(self.class_names) if self.class_names else None
        self.summary = evaluate_feature_runs(self.runs, self.config, groups, k)
        logger.info("[OK] Fused accuracy %.4f +/- %.4f over %d splits",
                    self.summary.accuracy_mean, self.summary.accuracy_std, len(self.summary.seeds))
        return self.summary

    def write_features(self, out_dir: Path):
        for run in self.runs:
            export_features(run, out_dir / f"{run.modality_tag}.itns")
        if self.records is not None:
            write_samples(self.records, out_dir)
        if self.class_names:
            write_class_names(self.class_names, out_dir)

    def write_report(self, out_dir: Path):
        k = self.summary.confusion.shape[0]
        names = self.class_names or [str(c) for c in range(k)]
        (out_dir / REPORT_FILE).write_text(self.summary.to_text(names), encoding="utf-8")
        write_confusion_csv(self.summary.confusion, names, out_dir / CONFUSION_FILE)
        (out_dir / CONFIG_ECHO_FILE).write_text(format_config(self.config), encoding="utf-8")

    def run_full_pipeline(self, out_dir: PathLike, save_images: bool = False) -> SplitSummary:
        """
        Run the complete pipeline from a manifest

        Args:
            out_dir: receives report.txt, confusion.csv, config.txt and the
                per-modality feature files
            save_images: also write every activity image under out_dir/images
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        banner("HAR ACTIVITY-IMAGE PIPELINE")

        logger.info("[1/4] Loading dataset...")
        self.load()

        logger.info("[2/4] Encoding activity images and extracting features...")
        self.extract(out_dir / "images" if save_images else None)
        self.write_features(out_dir)

        logger.info("[3/4] Two-stage CCF + SVM over %d splits...", self.config.repeats)
        self.evaluate()

        logger.info("[4/4] Writing report...")
        self.write_report(out_dir)

        banner("PIPELINE COMPLETE")
        logger.info("Report: %s", out_dir / REPORT_FILE)
        return self.summary

    def run_features_pipeline(self, features_dir: PathLike, out_dir: PathLike) -> SplitSummary:
        """Run fusion, training and evaluation on precomputed ITNS features"""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        banner("HAR PIPELINE (PRECOMPUTED FEATURES)")

        logger.info("[1/3] Loading feature files...")
        self.load_features(features_dir)

        logger.info("[2/3] Two-stage CCF + SVM over %d splits...", self.config.repeats)
        self.evaluate()

        logger.info("[3/3] Writing report...")
        self.write_report(out_dir)

        banner("PIPELINE COMPLETE")
        return self.summary


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_encode(config: PipelineConfig, out_dir: PathLike) -> List[List]:
    """
    Write one PNG per window per modality plus index.csv

    Returns:
        The index rows (file, sample_id, window, encoder, filter, label)
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pipeline = HARPipeline(config)
    ds = pipeline.load()
    windows, records = cut_windows(ds, config)

    def task(window, record):
        with stage("encode"):
            images = encode_modalities(window, config)
            return write_window_images(images, record, config, out_dir)

    logger.info("Encoding %d windows into %s", len(windows), out_dir)
    results = Parallel(n_jobs=config.jobs, prefer="threads")(
        delayed(task)(window, record) for window, record in zip(windows, records))
    rows = [row for window_rows in results for row in window_rows]
    write_image_index(rows, out_dir / INDEX_FILE)
    write_class_names(ds.class_names, out_dir)
    logger.info("[OK] Wrote %d images", len(rows))
    return rows


def cmd_filter(config: PipelineConfig, images_dir: PathLike, out_dir: PathLike) -> List[List]:
    """Re-derive the Prewitt and high-boost images from the base images of an index"""
    images_dir, out_dir = Path(images_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with stage("ingest"):
        base_rows = [row for row in read_image_index(images_dir) if row["filter"] == ImageFilter.NONE.value]

    def task(row):
        with stage("ingest"):
            img = read_png(images_dir / row["file"], Encoder(row["encoder"]), ImageFilter.NONE,
                           f"{row['sample_id']}@{row['window']}")
        with stage("encode"):
            images = make_modalities(img, config)
        out = []
        for image in images:
            name = image_name(row["sample_id"], int(row["window"]), row["encoder"], image.filter)
            write_png(image, out_dir / name)
            out.append([name, row["sample_id"], int(row["window"]), row["encoder"],
                        image.filter.value, int(row["label"])])
        return out

    results = Parallel(n_jobs=config.jobs, prefer="threads")(delayed(task)(row) for row in base_rows)
    rows = [row for image_rows in results for row in image_rows]
    write_image_index(rows, out_dir / INDEX_FILE)
    names = read_class_names(images_dir)
    if names:
        write_class_names(names, out_dir)
    logger.info("[OK] Filtered %d base images into %s", len(base_rows), out_dir)
    return rows


def cmd_extract(config: PipelineConfig, images_dir: PathLike, out_dir: PathLike) -> List[FeatureMatrix]:
    """Baseline features per modality from an image directory → base/prewitt/highboost.itns"""
    images_dir, out_dir = Path(images_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with stage("ingest"):
        index = read_image_index(images_dir)
    by_filter: Dict[str, Dict[Tuple[str, int], Dict[str, str]]] = {tag: {} for tag in MODALITY_ORDER}
    order: List[Tuple[str, int]] = []
    filter_tags = {ImageFilter.NONE.value: "base", ImageFilter.PREWITT.value: "prewitt",
                   ImageFilter.HIGHBOOST.value: "highboost"}
    for row in index:
        tag = filter_tags.get(row["filter"])
        if tag is None:
            raise PipelineStageError("ingest", FormatError(f"unknown filter {row['filter']!r} in index"))
        key = (row["sample_id"], int(row["window"]))
        by_filter[tag][key] = row
        if tag == "base":
            order.append(key)

    runs = []
    with stage("extract"):
        for tag in MODALITY_ORDER:
            missing = [key for key in order if key not in by_filter[tag]]
            if missing or len(by_filter[tag]) != len(order):
                raise AlignmentError(f"{tag} images do not match the base images ({len(missing)} missing)")
            rows = [by_filter[tag][key] for key in order]
            images = [read_png(images_dir / row["file"], Encoder(row["encoder"])) for row in rows]
            fm = baseline_extract(images, [int(row["label"]) for row in rows], tag, config.jobs)
            export_features(fm, out_dir / f"{tag}.itns")
            runs.append(fm)
            logger.info("[OK] %s: %d x %d features", tag, fm.n, fm.p)

    sample_ids = {sid: i for i, sid in enumerate(dict.fromkeys(sid for sid, _ in order))}
    write_samples([WindowRecord(sample_ids[sid], sid, window, int(runs[0].labels[i]))
                   for i, (sid, window) in enumerate(order)], out_dir)
    names = read_class_names(images_dir)
    if names:
        write_class_names(names, out_dir)
    return runs


def cmd_fuse(config: PipelineConfig, features_dir: PathLike, out_file: PathLike) -> FeatureMatrix:
    """Two-stage CCF fitted on every row of the three modality files"""
    with stage("ingest"):
        runs = load_feature_runs(features_dir)
    with stage("fuse"):
        fused = TwoStageFusion(config.cca_dim or None, config.cca_ridge).fit_transform(*runs)
    export_features(fused, out_file)
    logger.info("[OK] Fused features %d x %d -> %s", fused.n, fused.p, out_file)
    return fused


def cmd_train(config: PipelineConfig, features_file: PathLike, model_path: PathLike):
    with stage("ingest"):
        fm = import_features(features_file)
    with stage("train"):
        model = svm_train(fm, reg_c=config.svm_reg_c, epochs=config.svm_epochs,
                          seed=config.seed, batch_size=config.svm_batch_size)
        train_acc = float(np.mean(svm_predict(model, fm) == fm.labels))
    save_svm(model, model_path)
    logger.info("[OK] SVM trained on %d rows (training accuracy %.4f) -> %s", fm.n, train_acc, model_path)
    return model


def cmd_eval(config: PipelineConfig, features_file: PathLike, model_path: PathLike,
             out_dir: PathLike) -> EvalReport:
    """Score saved features with a saved model; writes predictions, report and confusion matrix"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    features_file = Path(features_file)
    with stage("ingest"):
        fm = import_features(features_file)
        model = load_svm(model_path)
        names = read_class_names(features_file.parent)
        records = read_samples(features_file.parent)

    with stage("eval"):
        pred = svm_predict(model, fm)
        k = len(names) if names else int(max(model.classes.max(), fm.labels.max())) + 1
        report = evaluate(pred, fm.labels, k)

    names = names or [str(c) for c in range(k)]
    if records is not None and len(records) == fm.n:
        row_ids = [record.row_id for record in records]
    else:
        row_ids = [str(i) for i in range(fm.n)]
    export_predictions(out_dir / PREDICTIONS_FILE, row_ids, fm.labels, pred)
    report.write(out_dir / REPORT_FILE, names)
    write_confusion_csv(report.confusion, names, out_dir / CONFUSION_FILE)
    logger.info("[OK] accuracy %.4f, macro precision %.4f", report.accuracy, report.macro_precision)
    return report


def cmd_pipeline(config: PipelineConfig, out_dir: PathLike, save_images: bool = False) -> SplitSummary:
    pipeline = HARPipeline(config)
    if config.features_dir:
        return pipeline.run_features_pipeline(config.features_dir, out_dir)
    return pipeline.run_full_pipeline(out_dir, save_images)
