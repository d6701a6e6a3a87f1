"""
Configuration for the HAR pipeline
Defaults, `key = value` config files, .env / environment overrides and validation
"""

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union
import io
import logging
import math
import os

from dotenv import dotenv_values, load_dotenv

from HAR_core import ConfigError
from HAR_encoders import ChannelMode, Encoder

load_dotenv('.env', override=True)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

ENV_SEED = 'II_SEED'
ENV_JOBS = 'II_JOBS'
ENV_LOG_LEVEL = 'II_LOG_LEVEL'


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the pipeline; defaults reproduce the reference experiment"""
    encoder: Encoder = Encoder.SI
    window_length: int = 52
    window_stride: int = 52
    mtf_bins: int = 10
    rp_percentile: float = 20.0
    channel_mode: ChannelMode = ChannelMode.TRIPLET_RGB
    gray_channel: int = -1  # -1 = Euclidean magnitude over channels
    resize_height: int = 224
    resize_width: int = 224
    prewitt_magnitude: bool = False
    highboost_amplification: float = 10.0
    cca_dim: int = 0  # 0 = min(p, q, n - 1)
    cca_ridge: float = 1e-4
    svm_reg_c: float = 1.0
    svm_epochs: int = 200
    svm_batch_size: int = 32
    repeats: int = 20
    train_frac: float = 0.8
    seed: int = 0
    jobs: int = -1
    manifest: str = ""
    features_dir: str = ""
    output_dir: str = ""

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, _coerce(f.name, f.type, getattr(self, f.name)))
        self._validate()

    def _validate(self):
        checks = [
            (self.window_length >= 2, "window_length must be >= 2"),
            (self.window_stride >= 1, "window_stride must be >= 1"),
            (2 <= self.mtf_bins <= self.window_length, "mtf_bins must lie in [2, window_length]"),
            (0 < self.rp_percentile <= 100, "rp_percentile must lie in (0, 100]"),
            (self.gray_channel >= -1, "gray_channel must be >= -1"),
            (self.resize_height >= 0 and self.resize_width >= 0, "resize dimensions must be >= 0"),
            ((self.resize_height == 0) == (self.resize_width == 0),
             "resize_height and resize_width must both be 0 or both positive"),
            (math.isfinite(self.highboost_amplification), "highboost_amplification must be finite"),
            (self.cca_dim >= 0, "cca_dim must be >= 0"),
            (self.cca_ridge >= 0 and math.isfinite(self.cca_ridge), "cca_ridge must be >= 0"),
            (self.svm_reg_c > 0 and math.isfinite(self.svm_reg_c), "svm_reg_c must be positive"),
            (self.svm_epochs >= 1, "svm_epochs must be >= 1"),
            (self.svm_batch_size >= 1, "svm_batch_size must be >= 1"),
            (self.repeats >= 1, "repeats must be >= 1"),
            (0 < self.train_frac < 1, "train_frac must lie in (0, 1)"),
            (self.seed >= 0, "seed must be >= 0"),
            (self.jobs != 0, "jobs must be non-zero (-1 = all cores)"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)


_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


def _coerce(name: str, kind: Any, value: Any) -> Any:
    """Convert a raw (possibly string) value to the field type"""
    kind = kind if not isinstance(kind, str) else {
        'Encoder': Encoder, 'ChannelMode': ChannelMode, 'int': int,
        'float': float, 'bool': bool, 'str': str,
    }[kind]
    try:
        if kind is Encoder or kind is ChannelMode:
            return kind(value.strip() if isinstance(value, str) else value)
        if kind is bool:
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in _TRUE:
                return True
            if text in _FALSE:
                return False
            raise ValueError(value)
        if kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            if isinstance(value, bool):
                raise ValueError(value)
            return int(value)
        if kind is float:
            number = float(value)
            if math.isnan(number):
                raise ValueError(value)
            return number
        return '' if value is None else str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value {value!r} for {name}") from exc


FIELD_NAMES = tuple(f.name for f in fields(PipelineConfig))


def config_from_mapping(values: Mapping[str, Any], base: Optional[PipelineConfig] = None) -> PipelineConfig:
    """Apply key/value pairs on top of base (or the defaults); unknown keys are rejected"""
    unknown = sorted(set(values) - set(FIELD_NAMES))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    for key, value in values.items():
        if value is None:
            raise ConfigError(f"config key {key!r} has no value")
    return replace(base or PipelineConfig(), **dict(values))


def parse_config_text(text: str, base: Optional[PipelineConfig] = None) -> PipelineConfig:
    """Parse `key = value` lines (# comments allowed)"""
    values = dotenv_values(stream=io.StringIO(text), interpolate=False)
    return config_from_mapping(values, base)


def load_config(path: Optional[PathLike] = None) -> PipelineConfig:
    """
    Build the effective configuration

    Args:
        path: optional config file of `key = value` lines

    Returns:
        PipelineConfig from defaults < config file < environment (II_SEED, II_JOBS)
    """
    config = PipelineConfig()
    if path:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            text = path.read_text(encoding='utf-8')
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        config = parse_config_text(text, config)
        logger.debug("Loaded config from %s", path)

    env = {}
    if os.getenv(ENV_SEED):
        env['seed'] = os.getenv(ENV_SEED)
    if os.getenv(ENV_JOBS):
        env['jobs'] = os.getenv(ENV_JOBS)
    if env:
        logger.debug("Environment overrides: %s", env)
        config = config_from_mapping(env, config)
    return config


def apply_overrides(config: PipelineConfig, overrides: Dict[str, Any]) -> PipelineConfig:
    """Command-line overrides; None means the flag was not given"""
    given = {key: value for key, value in overrides.items() if value is not None}
    return config_from_mapping(given, config) if given else config


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (Encoder, ChannelMode)):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_config(config: PipelineConfig) -> str:
    """`key = value` lines that parse_config_text turns back into an equal config"""
    return ''.join(f"{name} = {_format_value(getattr(config, name))}\n" for name in FIELD_NAMES)
