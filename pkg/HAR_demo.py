"""
Synthetic demo dataset
Six-channel accelerometer / gyroscope recordings with a manifest, for trying
the pipeline without a real dataset
"""

from pathlib import Path
from typing import Union
import logging

import numpy as np

from HAR_core import RangeError

logger = logging.getLogger(__name__)

CHANNELS = ("ax", "ay", "az", "gx", "gy", "gz")
DEMO_CLASSES = ("walking", "jogging", "sitting", "standing", "upstairs", "downstairs")
GRAVITY = 9.81


def _class_name(label: int) -> str:
    return DEMO_CLASSES[label] if label < len(DEMO_CLASSES) else f"class{label}"


def synth_recording(label: int, length: int, rate_hz: float, rng: np.random.Generator) -> np.ndarray:
    """
    One length x 6 recording of class `label`

    Each channel is a sinusoid whose frequency and amplitude depend on the
    class and the channel, with a random phase and Gaussian noise; az carries
    a gravity offset.
    """
    t = np.arange(length) / rate_hz
    values = np.empty((length, len(CHANNELS)))
    for ch in range(len(CHANNELS)):
        freq = 0.6 + 0.9 * label + 0.25 * ch
        amp = 1.0 + 0.5 * ((label + ch) % 3)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        values[:, ch] = amp * np.sin(2.0 * np.pi * freq * t + phase)
        values[:, ch] += rng.normal(0.0, 0.15 * amp, size=length)
    values[:, 2] += GRAVITY
    return values


def make_demo_dataset(outdir: Union[str, Path], n_classes: int = 3, per_class: int = 6,
                      length: int = 104, rate_hz: float = 50.0, seed: int = 0) -> Path:
    """
    Write synthetic recordings and their manifest

    Args:
        outdir: target directory (created if missing)
        n_classes: number of activity classes (>= 2)
        per_class: recordings per class (>= 2)
        length: rows per recording
        rate_hz: sampling rate written to the manifest
        seed: random seed

    Returns:
        Path of the written manifest
    """
    if n_classes < 2 or per_class < 2:
        raise RangeError("the demo dataset needs at least 2 classes and 2 recordings per class")
    if length < 2 or not rate_hz > 0:
        raise RangeError("length must be >= 2 and rate_hz positive")

    outdir = Path(outdir)
    recordings = outdir / "recordings"
    recordings.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    lines = [f"class: {_class_name(c)}" for c in range(n_classes)]
    lines.append(f"rate_hz: {rate_hz!r}")
    lines.append("path,label,subject")
    for label in range(n_classes):
        for i in range(per_class):
            name = f"{_class_name(label)}_{i:02d}.csv"
            values = synth_recording(label, length, rate_hz, rng)
            np.savetxt(recordings / name, values, fmt="%.9g", delimiter=",",
                       header=",".join(CHANNELS), comments="")
            lines.append(f"recordings/{name},{label},s{i % 3 + 1}")

    manifest = outdir / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("[OK] Demo dataset: %d classes x %d recordings -> %s", n_classes, per_class, manifest)
    return manifest
