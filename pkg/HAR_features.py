"""
Feature matrices per modality
Deterministic baseline extractor for activity images and modality alignment checks
"""

from dataclasses import dataclass
from typing import List, Sequence
import logging

import numpy as np
from joblib import Parallel, delayed

from HAR_core import AlignmentError, InvalidShape, InvalidSeries, ShapeError
from HAR_encoders import ActivityImage
from HAR_imaging import resize_bicubic

logger = logging.getLogger(__name__)

MODALITY_ORDER = ("base", "prewitt", "highboost")

POOL_INPUT = 56
POOL_CELL = 8
BASELINE_DIM = (POOL_INPUT // POOL_CELL) ** 2 * 3 + 6


@dataclass
class FeatureMatrix:
    """n x p features with one class label per row"""
    x: np.ndarray
    labels: np.ndarray
    modality_tag: str = ""

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if x.ndim != 2:
            raise InvalidShape(f"features must be an n x p matrix, got shape {x.shape}")
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise InvalidShape(f"feature matrix {self.modality_tag!r} has empty shape {x.shape}")
        if labels.shape[0] != x.shape[0]:
            raise AlignmentError(
                f"{labels.shape[0]} labels for {x.shape[0]} feature rows in {self.modality_tag!r}")
        if not np.all(np.isfinite(x)):
            raise InvalidSeries(f"feature matrix {self.modality_tag!r} has non-finite entries")
        self.x = x
        self.labels = labels

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def subset(self, indices) -> "FeatureMatrix":
        indices = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(self.x[indices], self.labels[indices], self.modality_tag)


def image_features(img: ActivityImage) -> np.ndarray:
    """
    153-dim baseline descriptor of one image

    The image is resized to 56 x 56, average-pooled over an 8 x 8 grid per
    channel (7 x 7 x 3 = 147 values, channel-major), then the per-channel mean
    and standard deviation are appended.
    """
    pixels = resize_bicubic(img, POOL_INPUT, POOL_INPUT).pixels
    cells = POOL_INPUT // POOL_CELL
    pooled = pixels.reshape(cells, POOL_CELL, cells, POOL_CELL, 3).mean(axis=(1, 3))
    return np.concatenate([
        pooled.transpose(2, 0, 1).ravel(),
        pixels.mean(axis=(0, 1)),
        pixels.std(axis=(0, 1)),
    ])


def baseline_extract(images: Sequence[ActivityImage], labels: Sequence[int],
                     modality_tag: str = "", jobs: int = 1) -> FeatureMatrix:
    """
    Extract baseline features for a list of same-sized images

    Args:
        images: activity images, all with the same H x W
        labels: class id per image
        modality_tag: tag stored on the returned matrix
        jobs: joblib worker count (1 = serial)

    Returns:
        FeatureMatrix of shape n x 153, rows in input order
    """
    if len(images) == 0:
        raise ShapeError("no images to extract features from")
    shapes = {img.shape for img in images}
    if len(shapes) != 1:
        raise ShapeError(f"images have mixed sizes: {sorted(shapes)}")

    rows = Parallel(n_jobs=jobs)(delayed(image_features)(img) for img in images)
    return FeatureMatrix(np.vstack(rows), np.asarray(labels), modality_tag)


def stack_modalities(runs: Sequence[FeatureMatrix]) -> List[FeatureMatrix]:
    """
    Validate that modality runs are row-aligned and order them base, prewitt, highboost

    Args:
        runs: feature matrices over the same samples

    Returns:
        The runs, reordered by MODALITY_ORDER when every tag belongs to it
    """
    runs = list(runs)
    if not runs:
        raise AlignmentError("no modalities to stack")
    first = runs[0]
    for run in runs[1:]:
        if run.n != first.n:
            raise AlignmentError(
                f"modality {run.modality_tag!r} has {run.n} rows, {first.modality_tag!r} has {first.n}")
        if not np.array_equal(run.labels, first.labels):
            raise AlignmentError(
                f"labels of {run.modality_tag!r} and {first.modality_tag!r} are not aligned")

    tags = [run.modality_tag for run in runs]
    if len(set(tags)) == len(tags) and all(tag in MODALITY_ORDER for tag in tags):
        runs.sort(key=lambda run: MODALITY_ORDER.index(run.modality_tag))
    return runs
