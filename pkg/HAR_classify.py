"""
Multiclass Linear SVM and Evaluation
One-vs-rest linear SVM trained by mini-batch subgradient descent, accuracy /
precision metrics, confusion matrices and aggregation over repeated splits
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union
import csv
import logging

import numpy as np
from sklearn.metrics import confusion_matrix, precision_score
from sklearn.preprocessing import StandardScaler

from HAR_core import AlignmentError, ClassCountError, DimensionError, FormatError, MissingFileError, RangeError
from HAR_features import FeatureMatrix

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class SvmModel:
    """Per-class weights and biases over z-scored features"""
    w: np.ndarray
    bias: np.ndarray
    classes: np.ndarray
    reg_c: float
    mean: np.ndarray
    scale: np.ndarray
    epochs: int = 200
    seed: int = 0
    batch_size: int = 32

    def __post_init__(self):
        if len(self.classes) < 2:
            raise ClassCountError(f"an SVM model needs at least 2 classes, got {len(self.classes)}")
        if not (np.all(np.isfinite(self.w)) and np.all(np.isfinite(self.bias))):
            raise RangeError("SVM weights are not finite")


@dataclass
class EvalReport:
    """Accuracy, per-class and macro precision, confusion counts (rows = truth)"""
    accuracy: float
    precision_per_class: np.ndarray
    macro_precision: float
    confusion: np.ndarray

    def to_text(self, class_names: Optional[Sequence[str]] = None) -> str:
        k = self.confusion.shape[0]
        names = list(class_names) if class_names else [str(i) for i in range(k)]
        lines = [
            f"accuracy = {self.accuracy:.6f}",
            f"macro_precision = {self.macro_precision:.6f}",
        ]
        for name, value in zip(names, self.precision_per_class):
            lines.append(f"precision[{name}] = {value:.6f}")
        return "\n".join(lines) + "\n"

    def write(self, path: PathLike, class_names: Optional[Sequence[str]] = None):
        Path(path).write_text(self.to_text(class_names), encoding="utf-8")


# --------------------------------------------------------------------------
# Training
# --------------------------------------------------------------------------

def svm_train(fm: FeatureMatrix, reg_c: float = 1.0, epochs: int = 200, seed: int = 0,
              batch_size: int = 32) -> SvmModel:
    """
    Train a one-vs-rest linear SVM (hinge loss + L2)

    Features are z-scored first. Every mini-batch takes step t with
    eta_t = 1 / (reg_c * t); weights shrink by (1 - eta_t * reg_c), add the
    mean hinge subgradient and are projected onto the ball of radius
    1 / sqrt(reg_c). Biases take the same step without shrinkage.

    Args:
        fm: training features and labels
        reg_c: regularisation strength (> 0)
        epochs: passes over the data
        seed: seed for the per-epoch row permutation
        batch_size: rows per subgradient step

    Returns:
        SvmModel with K rows of weights, one per class
    """
    if reg_c <= 0:
        raise RangeError(f"reg_c must be positive, got {reg_c}")
    if epochs < 1 or batch_size < 1:
        raise RangeError(f"epochs and batch_size must be >= 1, got {epochs}, {batch_size}")
    classes = np.unique(fm.labels)
    if classes.size < 2:
        raise ClassCountError(f"training data holds {classes.size} class(es); need at least 2")

    scaler = StandardScaler().fit(fm.x)
    xs = scaler.transform(fm.x)
    targets = np.where(fm.labels[:, None] == classes[None, :], 1.0, -1.0)

    n, d = xs.shape
    k = classes.size
    w = np.zeros((k, d))
    bias = np.zeros(k)
    radius = 1.0 / np.sqrt(reg_c)
    rng = np.random.default_rng(seed)

    step = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            rows = order[start:start + batch_size]
            step += 1
            eta = 1.0 / (reg_c * step)

            y = targets[rows]
            margins = y * (xs[rows] @ w.T + bias)
            active = np.where(margins < 1.0, y, 0.0)

            w *= 1.0 - eta * reg_c
            w += eta * (active.T @ xs[rows]) / rows.size
            bias += eta * active.sum(axis=0) / rows.size

            norms = np.linalg.norm(w, axis=1)
            shrink = np.minimum(1.0, radius / np.maximum(norms, 1e-300))
            w *= shrink[:, None]

    return SvmModel(w=w, bias=bias, classes=classes, reg_c=float(reg_c),
                    mean=scaler.mean_.copy(), scale=scaler.scale_.copy(),
                    epochs=int(epochs), seed=int(seed), batch_size=int(batch_size))


def svm_decision(model: SvmModel, fm: FeatureMatrix) -> np.ndarray:
    """n x K class scores"""
    if fm.p != model.w.shape[1]:
        raise DimensionError(f"model expects {model.w.shape[1]} features, got {fm.p}")
    xs = (fm.x - model.mean) / model.scale
    return xs @ model.w.T + model.bias


def svm_predict(model: SvmModel, fm: FeatureMatrix) -> np.ndarray:
    """Class id with the highest score per row"""
    return model.classes[np.argmax(svm_decision(model, fm), axis=1)]


def save_svm(model: SvmModel, path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        np.savez(handle, w=model.w, bias=model.bias, classes=model.classes,
                 reg_c=model.reg_c, mean=model.mean, scale=model.scale,
                 epochs=model.epochs, seed=model.seed, batch_size=model.batch_size)


def load_svm(path: PathLike) -> SvmModel:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"model file not found: {path}")
    try:
        with np.load(path) as data:
            return SvmModel(w=data["w"], bias=data["bias"], classes=data["classes"],
                            reg_c=float(data["reg_c"]), mean=data["mean"], scale=data["scale"],
                            epochs=int(data["epochs"]), seed=int(data["seed"]),
                            batch_size=int(data["batch_size"]))
    except (KeyError, ValueError, OSError) as exc:
        raise FormatError(f"{path} is not a saved SVM model: {exc}") from exc


# --------------------------------------------------------------------------
# Metrics
# --------------------------------------------------------------------------

def evaluate(pred, truth, K: int) -> EvalReport:
    """
    Accuracy, per-class precision and confusion matrix

    Args:
        pred: predicted class ids
        truth: true class ids
        K: number of classes

    Returns:
        EvalReport; a class that is never predicted has precision 0
    """
    pred = np.asarray(pred, dtype=np.int64).ravel()
    truth = np.asarray(truth, dtype=np.int64).ravel()
    if pred.shape != truth.shape:
        raise AlignmentError(f"{pred.size} predictions for {truth.size} labels")
    if pred.size == 0:
        raise AlignmentError("nothing to evaluate")
    for name, values in (("prediction", pred), ("label", truth)):
        if values.min() < 0 or values.max() >= K:
            raise RangeError(f"{name} outside [0, {K})")

    labels = np.arange(K)
    confusion = confusion_matrix(truth, pred, labels=labels)
    precision = precision_score(truth, pred, labels=labels, average=None, zero_division=0)
    accuracy = float(np.trace(confusion)) / float(confusion.sum())
    return EvalReport(
        accuracy=accuracy,
        precision_per_class=np.asarray(precision, dtype=np.float64),
        macro_precision=float(np.mean(precision)),
        confusion=confusion.astype(np.int64),
    )


def write_confusion_csv(confusion: np.ndarray, class_names: Sequence[str], path: PathLike):
    """Confusion matrix as CSV, header row of predicted classes, one row per true class"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["truth\\pred"] + list(class_names))
        for name, row in zip(class_names, confusion):
            writer.writerow([name] + [int(v) for v in row])


# --------------------------------------------------------------------------
# Repeated-split aggregation
# --------------------------------------------------------------------------

@dataclass
class SplitSummary:
    """Mean / std of the metrics over repeated random splits"""
    seeds: List[int]
    accuracies: List[float]
    precisions: List[float]
    confusion: np.ndarray
    ablation: Dict[str, "SplitSummary"] = field(default_factory=dict)

    @property
    def accuracy_mean(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def accuracy_std(self) -> float:
        return float(np.std(self.accuracies))

    @property
    def precision_mean(self) -> float:
        return float(np.mean(self.precisions))

    @property
    def precision_std(self) -> float:
        return float(np.std(self.precisions))

    def to_text(self, class_names: Optional[Sequence[str]] = None, title: str = "fused") -> str:
        lines = [
            f"repeats = {len(self.seeds)}",
            f"seeds = {' '.join(str(s) for s in self.seeds)}",
            f"{title}.accuracy_mean = {self.accuracy_mean:.6f}",
            f"{title}.accuracy_std = {self.accuracy_std:.6f}",
            f"{title}.precision_mean = {self.precision_mean:.6f}",
            f"{title}.precision_std = {self.precision_std:.6f}",
        ]
        for tag, summary in self.ablation.items():
            lines += [
                f"{tag}.accuracy_mean = {summary.accuracy_mean:.6f}",
                f"{tag}.accuracy_std = {summary.accuracy_std:.6f}",
                f"{tag}.precision_mean = {summary.precision_mean:.6f}",
                f"{tag}.precision_std = {summary.precision_std:.6f}",
            ]
        for seed, acc, prec in zip(self.seeds, self.accuracies, self.precisions):
            lines.append(f"seed[{seed}] = accuracy {acc:.6f} precision {prec:.6f}")
        if class_names:
            lines.append(f"classes = {','.join(class_names)}")
        return "\n".join(lines) + "\n"


def aggregate_reports(reports: Sequence[EvalReport], seeds: Sequence[int],
                      ablation: Optional[Dict[str, Sequence[EvalReport]]] = None) -> SplitSummary:
    """Combine per-split reports into one summary (confusion counts are summed)"""
    if not reports:
        raise RangeError("no reports to aggregate")
    if len(reports) != len(seeds):
        raise AlignmentError(f"{len(reports)} reports for {len(seeds)} seeds")
    summary = SplitSummary(
        seeds=list(seeds),
        accuracies=[r.accuracy for r in reports],
        precisions=[r.macro_precision for r in reports],
        confusion=np.sum([r.confusion for r in reports], axis=0),
    )
    for tag, runs in (ablation or {}).items():
        summary.ablation[tag] = aggregate_reports(runs, seeds)
    return summary
