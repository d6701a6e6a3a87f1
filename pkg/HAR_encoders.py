"""
Activity Image Encoders
Turns windows of inertial data into Signal Images, Gramian Angular Fields,
Markov Transition Fields and Recurrence Plots
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Union
import logging

import numpy as np

from HAR_core import (
    BinCountError,
    ChannelCountError,
    InvalidSeries,
    MultiSeries,
    RangeError,
    ShapeError,
    rescale_unit,
)

logger = logging.getLogger(__name__)

# Every channel neighbours every other channel at least once
SI_ORDER = "123456135246142536152616"
SI_ROWS = [int(digit) - 1 for digit in SI_ORDER]


class Encoder(str, Enum):
    SI = "SI"
    GAF = "GAF"
    MTF = "MTF"
    RP = "RP"


class ImageFilter(str, Enum):
    NONE = "none"
    PREWITT = "prewitt"
    HIGHBOOST = "highboost"


class ChannelMode(str, Enum):
    TRIPLET_RGB = "triplet-rgb"
    GRAY3 = "gray3"


@dataclass(frozen=True)
class ActivityImage:
    """H x W x 3 image with unit-interval intensities and its provenance"""
    pixels: np.ndarray
    encoder: Optional[Encoder] = None
    filter: ImageFilter = ImageFilter.NONE
    source_id: str = ""

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise ShapeError(f"activity image must be H x W x 3, got {pixels.shape}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise ShapeError(f"activity image has empty extent {pixels.shape}")
        if not np.all(np.isfinite(pixels)):
            raise InvalidSeries(f"image {self.source_id!r} has non-finite pixels")
        if pixels.min() < 0.0 or pixels.max() > 1.0:
            raise RangeError(f"image {self.source_id!r} has pixels outside [0, 1]")
        object.__setattr__(self, "pixels", pixels)

    @property
    def shape(self):
        return self.pixels.shape


@dataclass(frozen=True)
class GafMatrix:
    """Summation Gramian angular field of one series"""
    g: np.ndarray
    phi: np.ndarray
    rescaled: np.ndarray
    radius: np.ndarray
    span: int


@dataclass(frozen=True)
class MtfMatrix:
    """Markov transition field with its quantile bins and transition matrix"""
    m: np.ndarray
    w: np.ndarray
    bin_edges: np.ndarray
    bin_of: np.ndarray


@dataclass(frozen=True)
class RpMatrix:
    r: np.ndarray
    epsilon: float


RawMatrix = Union[GafMatrix, MtfMatrix, RpMatrix]


def _as_vector(series) -> np.ndarray:
    x = np.asarray(series, dtype=np.float64).ravel()
    if not np.all(np.isfinite(x)):
        raise InvalidSeries("series contains non-finite values")
    return x


def _as_trajectory(window) -> np.ndarray:
    if isinstance(window, MultiSeries):
        window = window.values
    q = np.asarray(window, dtype=np.float64)
    if q.ndim == 1:
        q = q.reshape(-1, 1)
    if q.ndim != 2:
        raise ShapeError(f"window must be T x C, got shape {q.shape}")
    if q.shape[0] < 2:
        raise InvalidSeries(f"window needs at least 2 time steps, got {q.shape[0]}")
    if not np.all(np.isfinite(q)):
        raise InvalidSeries("window contains non-finite values")
    return q


# --------------------------------------------------------------------------
# Signal images
# --------------------------------------------------------------------------

def stack_signal_rows(values) -> np.ndarray:
    """Raw 24 x T row stacking of a T x 6 window in SI_ORDER"""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != 6:
        raise ChannelCountError(
            f"signal images need 6 channels, got {values.shape[1] if values.ndim == 2 else values.shape}")
    return values[:, SI_ROWS].T


def encode_signal_image(s: MultiSeries, length: int = 52) -> ActivityImage:
    """
    Build a signal image from a six-channel window

    Args:
        s: window with C = 6 and exactly `length` rows
        length: image width in time steps

    Returns:
        24 x length image, each row rescaled on its own, replicated to 3 planes
    """
    if s.channels != 6:
        raise ChannelCountError(f"signal images need 6 channels, got {s.channels}")
    if s.length != length:
        raise ShapeError(f"window has {s.length} rows, expected {length}; run window_series first")

    rows = stack_signal_rows(s.values)
    plane = np.vstack([rescale_unit(row).values for row in rows])
    pixels = np.repeat(plane[:, :, None], 3, axis=2)
    return ActivityImage(pixels, Encoder.SI, ImageFilter.NONE, s.sample_id)


# --------------------------------------------------------------------------
# Gramian angular field
# --------------------------------------------------------------------------

def encode_gaf(series) -> GafMatrix:
    """
    Summation GAF: cos(phi_l + phi_k) with phi = arccos of the unit-rescaled series

    Computed in matrix form as x_s' x_s - sqrt(1 - x_s^2)' sqrt(1 - x_s^2).
    """
    x = _as_vector(series)
    if x.size < 2:
        raise InvalidSeries(f"GAF needs at least 2 samples, got {x.size}")

    xs = rescale_unit(x).values
    phi = np.arccos(xs)
    sine = np.sqrt(np.clip(1.0 - xs * xs, 0.0, 1.0))
    g = np.outer(xs, xs) - np.outer(sine, sine)
    np.clip(g, -1.0, 1.0, out=g)

    n = x.size
    radius = np.arange(1, n + 1, dtype=np.float64) / n
    return GafMatrix(g=g, phi=phi, rescaled=xs, radius=radius, span=n)


def gaf_reconstruct(g) -> np.ndarray:
    """Recover the rescaled series from the GAF diagonal"""
    diag = np.diag(np.asarray(g, dtype=np.float64))
    return np.sqrt(np.clip((diag + 1.0) / 2.0, 0.0, 1.0))


# --------------------------------------------------------------------------
# Markov transition field
# --------------------------------------------------------------------------

def quantile_bins(x: np.ndarray, n_bins: int):
    """
    Rank-based quantile binning

    Inner edges are order statistics at ranks ceil(k*n/Q); a value's bin is the
    number of inner edges not above it, so equal values always share a bin and
    distinct values fill the bins with near-equal counts.
    """
    n = x.size
    ordered = np.sort(x)
    ranks = np.array([-(-k * n // n_bins) for k in range(1, n_bins)], dtype=np.int64)
    inner = ordered[ranks]
    bin_of = np.searchsorted(inner, x, side="right")
    edges = np.concatenate([[ordered[0]], inner, [ordered[-1]]])
    return bin_of.astype(np.int64), edges


def encode_mtf(series, Q: int = 10) -> MtfMatrix:
    """
    Markov transition field over Q quantile bins

    Args:
        series: length-n vector, n >= 2
        Q: number of quantile bins, 2 <= Q <= n

    Returns:
        MtfMatrix with m[i][j] = w[bin_of[i]][bin_of[j]]
    """
    x = _as_vector(series)
    n = x.size
    if n < 2:
        raise InvalidSeries(f"MTF needs at least 2 samples, got {n}")
    if Q < 2 or Q > n:
        raise BinCountError(f"bin count must satisfy 2 <= Q <= n ({n}), got {Q}")

    bin_of, edges = quantile_bins(x, Q)

    counts = np.zeros((Q, Q), dtype=np.float64)
    np.add.at(counts, (bin_of[:-1], bin_of[1:]), 1.0)
    totals = counts.sum(axis=1, keepdims=True)
    w = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)

    m = w[bin_of[:, None], bin_of[None, :]]
    return MtfMatrix(m=m, w=w, bin_edges=edges, bin_of=bin_of)


# --------------------------------------------------------------------------
# Recurrence plot
# --------------------------------------------------------------------------

def pairwise_distances(window) -> np.ndarray:
    """Euclidean distances between all time points of a T x C trajectory"""
    q = _as_trajectory(window)
    return np.linalg.norm(q[None, :, :] - q[:, None, :], axis=2)


def encode_rp(window, epsilon: float) -> RpMatrix:
    """
    Recurrence plot: r[i][j] = 1 when ||q(i) - q(j)|| <= epsilon

    All channels of the window are used jointly as one trajectory.
    """
    if epsilon < 0 or not np.isfinite(epsilon):
        raise RangeError(f"epsilon must be a finite non-negative real, got {epsilon}")
    d = pairwise_distances(window)
    r = (d <= epsilon).astype(np.float64)
    return RpMatrix(r=r, epsilon=float(epsilon))


def epsilon_from_percentile(window, pct: float = 20.0) -> float:
    """Threshold at the pct-th percentile of the off-diagonal pairwise distances"""
    if not 0 < pct <= 100:
        raise RangeError(f"percentile must lie in (0, 100], got {pct}")
    d = pairwise_distances(window)
    upper = d[np.triu_indices(d.shape[0], k=1)]
    return float(np.percentile(upper, pct))


# --------------------------------------------------------------------------
# Matrix -> image
# --------------------------------------------------------------------------

def _unit_plane(raw: RawMatrix) -> np.ndarray:
    if isinstance(raw, GafMatrix):
        return np.clip((raw.g + 1.0) / 2.0, 0.0, 1.0)
    if isinstance(raw, MtfMatrix):
        return np.clip(raw.m, 0.0, 1.0)
    if isinstance(raw, RpMatrix):
        return raw.r
    raise TypeError(f"unsupported matrix type {type(raw).__name__}")


def _encoder_of(raw: RawMatrix) -> Encoder:
    if isinstance(raw, GafMatrix):
        return Encoder.GAF
    if isinstance(raw, MtfMatrix):
        return Encoder.MTF
    return Encoder.RP


def to_activity_image(raw: Union[RawMatrix, Sequence[RawMatrix]],
                      channel_mode: ChannelMode = ChannelMode.TRIPLET_RGB,
                      source_id: str = "") -> ActivityImage:
    """
    Assemble one or six encoded matrices into a 3-plane image

    Args:
        raw: a single matrix (gray3) or six per-channel matrices (triplet-rgb)
        channel_mode: triplet-rgb puts channels 1-3 into the RGB planes of the
            left tile and channels 4-6 into the right tile; gray3 replicates
            one matrix into all three planes
        source_id: provenance tag

    Returns:
        ActivityImage of shape n x n x 3 (gray3) or n x 2n x 3 (triplet-rgb)
    """
    channel_mode = ChannelMode(channel_mode)
    if channel_mode is ChannelMode.GRAY3:
        if not isinstance(raw, (GafMatrix, MtfMatrix, RpMatrix)):
            if len(raw) != 1:
                raise ChannelCountError(f"gray3 takes one matrix, got {len(raw)}")
            raw = raw[0]
        plane = _unit_plane(raw)
        pixels = np.repeat(plane[:, :, None], 3, axis=2)
        return ActivityImage(pixels, _encoder_of(raw), ImageFilter.NONE, source_id)

    if isinstance(raw, (GafMatrix, MtfMatrix, RpMatrix)) or len(raw) != 6:
        count = 1 if isinstance(raw, (GafMatrix, MtfMatrix, RpMatrix)) else len(raw)
        raise ChannelCountError(f"triplet-rgb needs 6 per-channel matrices, got {count}")

    planes = [_unit_plane(m) for m in raw]
    if len({p.shape for p in planes}) != 1:
        raise ShapeError("per-channel matrices differ in size")
    left = np.stack(planes[:3], axis=2)
    right = np.stack(planes[3:], axis=2)
    pixels = np.concatenate([left, right], axis=1)
    return ActivityImage(pixels, _encoder_of(raw[0]), ImageFilter.NONE, source_id)


def _gray_series(values: np.ndarray, gray_channel: int) -> np.ndarray:
    if gray_channel < 0:
        return np.linalg.norm(values, axis=1)
    if gray_channel >= values.shape[1]:
        raise ChannelCountError(
            f"gray_channel {gray_channel} out of range for {values.shape[1]} channels")
    return values[:, gray_channel]


def encode_window(window: MultiSeries, encoder: Encoder, config) -> ActivityImage:
    """
    Encode one window with the encoder and channel mode selected in config

    Args:
        window: window produced by window_series
        encoder: which of the four encodings to apply
        config: PipelineConfig (window_length, mtf_bins, rp_percentile,
            channel_mode, gray_channel are read)

    Returns:
        ActivityImage tagged with the encoder and window provenance
    """
    encoder = Encoder(encoder)
    source_id = f"{window.sample_id}@{window.offset}"
    if encoder is Encoder.SI:
        image = encode_signal_image(window, config.window_length)
        return ActivityImage(image.pixels, Encoder.SI, ImageFilter.NONE, source_id)

    values = window.values
    mode = ChannelMode(config.channel_mode)

    if mode is ChannelMode.TRIPLET_RGB:
        if window.channels != 6:
            raise ChannelCountError(f"triplet-rgb needs 6 channels, got {window.channels}")
        columns: List[np.ndarray] = [values[:, c] for c in range(6)]
        if encoder is Encoder.GAF:
            matrices = [encode_gaf(col) for col in columns]
        elif encoder is Encoder.MTF:
            matrices = [encode_mtf(col, config.mtf_bins) for col in columns]
        else:
            matrices = [
                encode_rp(col, epsilon_from_percentile(col, config.rp_percentile))
                for col in columns
            ]
        return to_activity_image(matrices, mode, source_id)

    if encoder is Encoder.RP:
        raw = encode_rp(values, epsilon_from_percentile(values, config.rp_percentile))
    else:
        series = _gray_series(values, config.gray_channel)
        raw = encode_gaf(series) if encoder is Encoder.GAF else encode_mtf(series, config.mtf_bins)
    return to_activity_image(raw, mode, source_id)
