"""Minimal WAV I/O: files in, mono float32 arrays out.

Accepted input formats are PCM 16-bit integer and IEEE 32-bit float;
everything is decoded to float32. Multi-channel files are mixed down to
mono by channel mean. Output is always mono 32-bit float PCM.
"""

from __future__ import annotations

import warnings
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.io import wavfile

from .errors import SchemaViolationError


class WavData(NamedTuple):
    samples: np.ndarray  # mono float32
    sample_rate: int
    source_channels: int


def mix_to_mono(data: np.ndarray) -> np.ndarray:
    """Collapse an (n, channels) array to (n,) by channel mean."""
    if data.ndim == 1:
        return data
    if data.ndim != 2:
        raise SchemaViolationError(f"expected 1-D or 2-D audio data, got shape {data.shape}")
    return data.mean(axis=1, dtype=np.float64).astype(np.float32)


def read_wav(path: str | Path) -> WavData:
    """Read a WAV file as mono float32 samples.

    Raises SchemaViolationError for sample formats other than int16 / float32.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy warns on benign extra chunks
        rate, data = wavfile.read(str(path))
    channels = 1 if data.ndim == 1 else data.shape[1]
    if data.dtype == np.int16:
        samples = data.astype(np.float32) / 32768.0
    elif data.dtype == np.float32:
        samples = data
    else:
        raise SchemaViolationError(
            f"{path}: unsupported WAV sample format {data.dtype} "
            "(expected PCM 16-bit int or 32-bit float)"
        )
    return WavData(mix_to_mono(samples), int(rate), channels)


def write_wav(path: str | Path, samples: np.ndarray, sample_rate: int) -> None:
    """Write mono float32 samples as a 32-bit float PCM WAV file."""
    wavfile.write(str(path), int(sample_rate), np.asarray(samples, dtype=np.float32))
