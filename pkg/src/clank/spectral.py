"""Acoustic front-end: windowed complex spectrogram and log-power map.

The transform is a short-time DFT tuned for contact sounds: 1024-sample
Hann-windowed frames hopped by 256 samples, each zero-padded to a
2048-point FFT so the one-sided spectrum carries 1025 frequency bins.
Frames start at sample 0 with no center padding, so for an input of
length T >= 1024 the frame count is::

    N_f = floor((T - 1024) / 256) + 1

The log-power map is 10 * log10(|Z|**2 + 1e-18) elementwise; silence
lands exactly on the -180 dB floor. Per-timestep audio chunks are
transformed independently so features never leak across control steps.

Spectrograms serialise to a small binary format (magic ``SPG1``)::

    "SPG1" | u32 num_bins | u32 num_frames | num_bins*num_frames float32

little-endian, values in bin-major (row-major) order.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InputTooShortError, SchemaViolationError

logger = logging.getLogger(__name__)

WINDOW_LENGTH = 1024
HOP_LENGTH = 256
FFT_SIZE = 2048
NUM_BINS = FFT_SIZE // 2 + 1
EPSILON = 1e-18
DB_FLOOR = -180.0

# pinned front-end geometry; silence must land exactly on the floor
assert NUM_BINS == 1025
assert 10.0 * np.log10(EPSILON) == DB_FLOOR

_SPG_MAGIC = b"SPG1"


@dataclass(frozen=True)
class SpectralConfig:
    """Analysis geometry; defaults are the canonical front-end values."""

    window_length: int = WINDOW_LENGTH
    hop_length: int = HOP_LENGTH
    fft_size: int = FFT_SIZE

    def __post_init__(self):
        if self.window_length <= 0 or self.hop_length <= 0:
            raise ValueError("window_length and hop_length must be > 0")
        if self.fft_size < self.window_length:
            raise ValueError("fft_size must be >= window_length")

    @property
    def num_bins(self) -> int:
        return self.fft_size // 2 + 1

    def frame_count(self, num_samples: int) -> int:
        if num_samples < self.window_length:
            raise InputTooShortError(
                f"need at least {self.window_length} samples, got {num_samples}"
            )
        return (num_samples - self.window_length) // self.hop_length + 1


DEFAULT_CONFIG = SpectralConfig()


@dataclass(frozen=True)
class ComplexSpectrogram:
    """One-sided complex spectrogram, shape (num_bins, num_frames)."""

    frames: np.ndarray
    config: SpectralConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if self.frames.ndim != 2 or self.frames.shape[0] != self.config.num_bins:
            raise ValueError(
                f"frames must be ({self.config.num_bins}, num_frames), "
                f"got shape {self.frames.shape}"
            )

    @property
    def num_bins(self) -> int:
        return self.frames.shape[0]

    @property
    def num_frames(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True)
class LogPowerSpectrogram:
    """Log-power values in dB, shape (num_bins, num_frames), floored at
    10*log10(epsilon)."""

    values: np.ndarray
    epsilon: float = EPSILON

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {self.values.shape}")
        floor = 10.0 * np.log10(self.epsilon)
        if self.values.size and (
            not np.all(np.isfinite(self.values)) or np.min(self.values) < floor
        ):
            raise ValueError(f"values must be finite and >= {floor} dB")

    @property
    def num_bins(self) -> int:
        return self.values.shape[0]

    @property
    def num_frames(self) -> int:
        return self.values.shape[1]


def hann_window(length: int) -> np.ndarray:
    """Periodic Hann window: 0.5 - 0.5*cos(2*pi*n/length), n = 0..length-1."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(length) / length)


def fbsp_transform(
    samples: Sequence[float] | np.ndarray, cfg: SpectralConfig = DEFAULT_CONFIG
) -> ComplexSpectrogram:
    """Windowed short-time transform of a mono signal.

    Frame k covers samples [k*hop, k*hop + window), is Hann-windowed,
    zero-padded to ``cfg.fft_size`` and transformed; the one-sided half
    (fft_size/2 + 1 bins) is kept. Raises InputTooShortError for signals
    shorter than one window.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a mono 1-D signal, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must all be finite")
    num_frames = cfg.frame_count(len(x))

    window = hann_window(cfg.window_length)
    frames = np.lib.stride_tricks.sliding_window_view(x, cfg.window_length)
    frames = frames[:: cfg.hop_length][:num_frames] * window
    spectrum = np.fft.rfft(frames, n=cfg.fft_size, axis=1)
    return ComplexSpectrogram(frames=spectrum.T.copy(), config=cfg)


def log_power(spec: ComplexSpectrogram, epsilon: float = EPSILON) -> LogPowerSpectrogram:
    """Elementwise 10*log10(|z|**2 + epsilon), in dB."""
    power = np.abs(spec.frames) ** 2
    return LogPowerSpectrogram(values=10.0 * np.log10(power + epsilon), epsilon=epsilon)


def features_for_chunks(
    chunks: Sequence[np.ndarray], cfg: SpectralConfig = DEFAULT_CONFIG, epsilon: float = EPSILON
) -> list[LogPowerSpectrogram]:
    """One log-power spectrogram per timestep chunk, computed independently.

    Chunks shorter than one window are zero-padded up to it (and flagged
    via a warning log), so every timestep yields at least one frame.
    """
    out = []
    for index, chunk in enumerate(chunks):
        x = np.asarray(chunk, dtype=np.float64)
        if len(x) < cfg.window_length:
            logger.warning(
                "chunk %d shorter than one window (%d < %d); zero-padding",
                index,
                len(x),
                cfg.window_length,
            )
            x = np.concatenate([x, np.zeros(cfg.window_length - len(x))])
        out.append(log_power(fbsp_transform(x, cfg), epsilon))
    return out


def write_spg(path: str | Path, spec: LogPowerSpectrogram) -> None:
    """Serialise log-power values to the SPG1 binary format."""
    values = np.ascontiguousarray(spec.values, dtype="<f4")
    header = struct.pack("<4sII", _SPG_MAGIC, spec.num_bins, spec.num_frames)
    Path(path).write_bytes(header + values.tobytes())


def read_spg(path: str | Path) -> LogPowerSpectrogram:
    """Read an SPG1 file back into a LogPowerSpectrogram (float32 values)."""
    blob = Path(path).read_bytes()
    if len(blob) < 12 or blob[:4] != _SPG_MAGIC:
        raise SchemaViolationError(f"{path}: not an SPG1 file")
    num_bins, num_frames = struct.unpack("<II", blob[4:12])
    expected = 12 + 4 * num_bins * num_frames
    if len(blob) != expected:
        raise SchemaViolationError(
            f"{path}: truncated SPG1 payload ({len(blob)} bytes, expected {expected})"
        )
    values = np.frombuffer(blob[12:], dtype="<f4").reshape(num_bins, num_frames)
    return LogPowerSpectrogram(values=values.astype(np.float64))


def write_spectrogram_csv(path: str | Path, spec: LogPowerSpectrogram) -> None:
    """Dump values as CSV for inspection, one row per frequency bin."""
    np.savetxt(path, spec.values, delimiter=",", fmt="%.6f")
