"""
Imaging utilities for activity images
3x3 spatial filters that create the Prewitt and high-boost modalities,
Catmull-Rom bicubic resizing, and PNG / ITNS tensor file I/O
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Union
import logging
import struct

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from HAR_core import FormatError, InvalidShape, MissingFileError, RangeError, ShapeError, rescale_unit
from HAR_encoders import ActivityImage, Encoder, ImageFilter

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Kernel3x3:
    """Named 3x3 correlation kernel"""
    weights: np.ndarray
    name: str

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64)
        if weights.shape != (3, 3):
            raise ShapeError(f"kernel {self.name!r} must be 3 x 3, got {weights.shape}")
        if not np.all(np.isfinite(weights)):
            raise RangeError(f"kernel {self.name!r} has non-finite weights")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)


PREWITT_H = Kernel3x3(np.array([[1.0, 1.0, 1.0],
                                [0.0, 0.0, 0.0],
                                [-1.0, -1.0, -1.0]]), "prewitt")


def highboost_kernel(amplification: float = 10.0) -> Kernel3x3:
    """
    High-boost kernel A*identity - box low-pass

    The low-pass is the un-normalised 3x3 box sum, so A = 10 gives the fixed
    kernel with 9 at the centre and -1 at the eight neighbours.
    """
    weights = -np.ones((3, 3))
    weights[1, 1] += amplification
    return Kernel3x3(weights, "highboost")


HIGHBOOST_K = highboost_kernel(10.0)


# --------------------------------------------------------------------------
# Filtering
# --------------------------------------------------------------------------

def filter_response(pixels, kernel: Kernel3x3) -> np.ndarray:
    """Raw per-channel correlation with edge replication (no flip, no normalisation)"""
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim == 2:
        return ndimage.correlate(pixels, kernel.weights, mode="nearest")
    return np.stack(
        [ndimage.correlate(pixels[:, :, c], kernel.weights, mode="nearest")
         for c in range(pixels.shape[2])],
        axis=2,
    )


def _renormalize(response: np.ndarray) -> np.ndarray:
    # min-max over the whole image; a flat response becomes 0.5
    return rescale_unit(response.ravel()).values.reshape(response.shape)


def convolve3x3(img: ActivityImage, k: Kernel3x3, image_filter: ImageFilter = None) -> ActivityImage:
    """
    Apply a 3x3 kernel to every channel and renormalise into [0, 1]

    Args:
        img: input activity image
        k: kernel, applied as written (correlation)
        image_filter: provenance tag for the result; defaults to the input tag

    Returns:
        Filtered image of the same size
    """
    response = filter_response(img.pixels, k)
    return ActivityImage(
        _renormalize(response),
        img.encoder,
        image_filter if image_filter is not None else img.filter,
        img.source_id,
    )


def prewitt_modality(img: ActivityImage, magnitude: bool = False) -> ActivityImage:
    """Prewitt modality; magnitude=True combines the printed kernel with its transpose"""
    if not magnitude:
        return convolve3x3(img, PREWITT_H, ImageFilter.PREWITT)

    transposed = Kernel3x3(PREWITT_H.weights.T, "prewitt-t")
    gy = filter_response(img.pixels, PREWITT_H)
    gx = filter_response(img.pixels, transposed)
    return ActivityImage(_renormalize(np.hypot(gx, gy)), img.encoder, ImageFilter.PREWITT, img.source_id)


def highboost_modality(img: ActivityImage, amplification: float = 10.0) -> ActivityImage:
    kernel = HIGHBOOST_K if amplification == 10.0 else highboost_kernel(amplification)
    return convolve3x3(img, kernel, ImageFilter.HIGHBOOST)


def make_modalities(img: ActivityImage, config) -> List[ActivityImage]:
    """Base image followed by its Prewitt and high-boost modalities"""
    return [
        img,
        prewitt_modality(img, config.prewitt_magnitude),
        highboost_modality(img, config.highboost_amplification),
    ]


# --------------------------------------------------------------------------
# Bicubic resize
# --------------------------------------------------------------------------

def _cubic(x: np.ndarray, a: float = -0.5) -> np.ndarray:
    x = np.abs(x)
    near = ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
    far = ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
    return np.where(x <= 1.0, near, np.where(x < 2.0, far, 0.0))


def cubic_weights(in_size: int, out_size: int, a: float = -0.5) -> np.ndarray:
    """
    out_size x in_size interpolation matrix for one axis

    Pixel centres sit at half-integer positions; taps beyond the border are
    folded onto the edge pixel.
    """
    centers = (np.arange(out_size) + 0.5) * (in_size / out_size) - 0.5
    base = np.floor(centers).astype(np.int64)
    weights = np.zeros((out_size, in_size))
    rows = np.arange(out_size)
    for tap in range(-1, 3):
        idx = base + tap
        w = _cubic(centers - idx, a)
        np.add.at(weights, (rows, np.clip(idx, 0, in_size - 1)), w)
    return weights / weights.sum(axis=1, keepdims=True)


def resize_bicubic(img: ActivityImage, out_h: int, out_w: int) -> ActivityImage:
    """
    Catmull-Rom (a = -0.5) bicubic resize, channels independent

    Args:
        img: input image
        out_h: output height (>= 1)
        out_w: output width (>= 1)

    Returns:
        Resized image clamped to [0, 1]
    """
    if out_h < 1 or out_w < 1:
        raise InvalidShape(f"resize target must be at least 1 x 1, got {out_h} x {out_w}")
    in_h, in_w = img.pixels.shape[:2]
    wy = cubic_weights(in_h, out_h)
    wx = cubic_weights(in_w, out_w)
    rows = np.einsum("oi,ijc->ojc", wy, img.pixels)
    resized = np.einsum("ojc,pj->opc", rows, wx)
    np.clip(resized, 0.0, 1.0, out=resized)
    return ActivityImage(resized, img.encoder, img.filter, img.source_id)


# --------------------------------------------------------------------------
# PNG I/O
# --------------------------------------------------------------------------

def quantize(pixels) -> np.ndarray:
    """Unit-interval values to bytes, rounding halves up"""
    return np.clip(np.floor(np.asarray(pixels) * 255.0 + 0.5), 0, 255).astype(np.uint8)


def write_png(img: ActivityImage, path: PathLike):
    """Write an 8-bit RGB PNG"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(quantize(img.pixels)).save(path, format="PNG")


def read_png(path: PathLike, encoder: Encoder = None,
             image_filter: ImageFilter = ImageFilter.NONE, source_id: str = None) -> ActivityImage:
    """Read a PNG back into unit-interval pixels (byte / 255)"""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"image file not found: {path}")
    try:
        with Image.open(path) as handle:
            if handle.format != "PNG":
                raise FormatError(f"{path} is {handle.format}, not PNG")
            data = np.asarray(handle.convert("RGB"), dtype=np.float64)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise FormatError(f"cannot decode {path} as PNG: {exc}") from exc
    return ActivityImage(data / 255.0, encoder, image_filter, source_id or path.stem)


# --------------------------------------------------------------------------
# ITNS tensor format
#   b"ITNS" | u8 version | u8 rank | rank x u32 dims | float64 payload
#   all little-endian, payload row-major
# --------------------------------------------------------------------------

ITNS_MAGIC = b"ITNS"
ITNS_VERSION = 1


def write_tensor(t, path: PathLike):
    """Write a float64 tensor in ITNS format"""
    arr = np.ascontiguousarray(t, dtype="<f8")
    if arr.ndim > 255:
        raise InvalidShape(f"rank {arr.ndim} exceeds the ITNS limit")
    if any(dim >= 2 ** 32 for dim in arr.shape):
        raise InvalidShape(f"dimension too large for ITNS: {arr.shape}")

    header = ITNS_MAGIC + struct.pack("<BB", ITNS_VERSION, arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(header)
        handle.write(arr.tobytes(order="C"))


def read_tensor(path: PathLike) -> np.ndarray:
    """Read an ITNS tensor written by write_tensor"""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"tensor file not found: {path}")
    blob = path.read_bytes()

    if len(blob) < 6 or blob[:4] != ITNS_MAGIC:
        raise FormatError(f"{path} is not an ITNS tensor (bad magic)")
    version, rank = struct.unpack_from("<BB", blob, 4)
    if version != ITNS_VERSION:
        raise FormatError(f"{path} has unsupported ITNS version {version}")
    header_size = 6 + 4 * rank
    if len(blob) < header_size:
        raise FormatError(f"{path} is truncated inside the dimension header")

    dims = struct.unpack_from(f"<{rank}I", blob, 6)
    payload = blob[header_size:]
    expected = int(np.prod(dims, dtype=np.int64)) * 8
    if len(payload) != expected:
        raise FormatError(
            f"{path}: dims {tuple(dims)} need {expected} payload bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype="<f8").reshape(dims).astype(np.float64)
