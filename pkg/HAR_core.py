"""
Core types for the HAR activity-image pipeline
Domain types, the error hierarchy, unit rescaling and windowing shared by every module
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence
import logging

import numpy as np

logger = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# Errors
# --------------------------------------------------------------------------

class HARError(Exception):
    """Base class for every error raised by the pipeline"""
    exit_code = 1


class UsageError(HARError):
    exit_code = 2


class ConfigError(UsageError):
    pass


class DataError(HARError, ValueError):
    """Bad input data: malformed files, invalid series, misaligned labels"""
    exit_code = 3


class InvalidSeries(DataError):
    pass


class FormatError(DataError):
    pass


class MissingFileError(DataError):
    pass


class FileAccessError(DataError):
    """A data or output file could not be read or written"""
    pass


class RangeError(DataError):
    pass


class StratifyError(DataError):
    pass


class InvalidShape(DataError):
    pass


class ChannelCountError(DataError):
    pass


class BinCountError(DataError):
    pass


class ShapeError(DataError):
    pass


class AlignmentError(DataError):
    pass


class ClassCountError(DataError):
    pass


class DimensionError(DataError):
    pass


class NumericError(HARError, ValueError):
    """Numerical failure: singular or non-convergent linear algebra"""
    exit_code = 4


class SingularCovariance(NumericError):
    pass


class PipelineStageError(HARError):
    """Wraps a stage failure with a stage tag, keeping the original exit code"""

    def __init__(self, stage: str, cause: HARError):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code

    def __reduce__(self):
        return (type(self), (self.stage, self.cause))


# --------------------------------------------------------------------------
# Domain types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MultiSeries:
    """One recorded sample: T x C sensor readings with rate and label"""
    values: np.ndarray
    rate_hz: float
    channel_names: List[str] = field(default_factory=list)
    label: Optional[int] = None
    sample_id: str = ""
    offset: int = 0  # first row within the parent recording

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2:
            raise InvalidSeries(f"series must be a T x C matrix, got shape {values.shape}")
        if values.shape[0] < 2:
            raise InvalidSeries(f"series needs at least 2 time steps, got {values.shape[0]}")
        if values.shape[1] < 1:
            raise InvalidSeries("series needs at least one channel")
        if not np.all(np.isfinite(values)):
            raise InvalidSeries(f"series {self.sample_id!r} contains non-finite values")
        if not self.rate_hz > 0:
            raise InvalidSeries(f"rate_hz must be positive, got {self.rate_hz}")
        names = list(self.channel_names) or [f"ch{i + 1}" for i in range(values.shape[1])]
        if len(names) != values.shape[1]:
            raise InvalidSeries(
                f"{len(names)} channel names for {values.shape[1]} channels")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "channel_names", names)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RescaledSeries:
    """Series mapped into [0, 1] with the affine map that produced it"""
    values: np.ndarray
    min_raw: float
    max_raw: float

    def inverse(self) -> np.ndarray:
        """Map the unit values back to the raw range (only defined when max_raw > min_raw)"""
        if not self.max_raw > self.min_raw:
            raise InvalidSeries("degenerate series has no inverse map")
        return self.values * (self.max_raw - self.min_raw) + self.min_raw


@dataclass
class LabeledDataset:
    """Labeled recordings plus the class names"""
    samples: List[MultiSeries]
    class_names: List[str]

    def __post_init__(self):
        k = len(self.class_names)
        for sample in self.samples:
            if sample.label is None or not 0 <= sample.label < k:
                raise RangeError(
                    f"sample {sample.sample_id!r} has label {sample.label}, expected [0, {k})")

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        return LabeledDataset([self.samples[i] for i in indices], list(self.class_names))

    def __len__(self) -> int:
        return len(self.samples)


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------

def rescale_unit(series) -> RescaledSeries:
    """
    Min-max rescale a vector into [0, 1]

    Args:
        series: length-n real vector

    Returns:
        RescaledSeries; a constant series maps to 0.5 everywhere
    """
    x = np.asarray(series, dtype=np.float64).ravel()
    if x.size < 1:
        raise InvalidSeries("cannot rescale an empty series")
    if not np.all(np.isfinite(x)):
        raise InvalidSeries("series contains non-finite values")

    lo = float(x.min())
    hi = float(x.max())
    if hi == lo:
        return RescaledSeries(np.full(x.shape, 0.5), lo, hi)

    scaled = (x - lo) / (hi - lo)
    # guard the endpoints against rounding
    np.clip(scaled, 0.0, 1.0, out=scaled)
    return RescaledSeries(scaled, lo, hi)


def window_offsets(length_total: int, length: int, stride: int) -> List[int]:
    """Start rows of the windows cut from a recording of length_total rows"""
    if length_total <= length:
        return [0]
    last = length_total - length
    offsets = list(range(0, last + 1, stride))
    if offsets[-1] != last:
        offsets.append(last)
    return offsets


def window_series(s: MultiSeries, length: int, stride: int) -> List[MultiSeries]:
    """
    Cut a recording into fixed-length windows

    Args:
        s: recording to segment
        length: rows per window (>= 2)
        stride: step between window starts (>= 1)

    Returns:
        Windows at offsets 0, stride, 2*stride, ... plus a final flush window
        at T - length. A recording shorter than `length` yields one window
        padded by repeating its last row.
    """
    if length < 2:
        raise RangeError(f"window length must be >= 2, got {length}")
    if stride < 1:
        raise RangeError(f"window stride must be >= 1, got {stride}")

    values = s.values
    if s.length < length:
        pad = np.repeat(values[-1:], length - s.length, axis=0)
        return [replace(s, values=np.vstack([values, pad]), offset=0)]

    return [
        replace(s, values=values[start:start + length].copy(), offset=start)
        for start in window_offsets(s.length, length, stride)
    ]
