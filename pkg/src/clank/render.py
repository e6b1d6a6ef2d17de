"""Event-driven audio rendering: retrieval, modulation, mixing, chunking.

For every collision event the engine retrieves the matching library clip
and modulates it three ways before mixing:

* amplitude scaled by the ratio of event force to the clip's recording
  force (power law, clamped),
* pitch shifted by the ratio of the clip's reference size to the event's
  object size (power law, clamped), realised by linear-interpolation
  resampling, which couples pitch and playback duration,
* duration fitted to the event's contact interval by crossfaded looping
  or truncation, for events with a nonzero duration.

Modulated clips are summed into a float accumulation buffer at their event
offsets and only the final output is hard-clamped to [-1, 1], so mixing is
linear before the clamp. The rendered track can then be cut into one chunk
per control timestep.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    NonPositiveForceError,
    NonPositiveSizeError,
    TargetShorterThanCrossfadeError,
    UnknownInteractionTypeError,
    UnknownMaterialPairError,
    UnresolvableEventError,
)
from .events import EventStream
from .library import AudioClip, Library, QueryKey, query

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RenderConfig:
    """Knobs for the modulation laws and the output format.

    ``gain_jitter`` (a fraction, e.g. 0.03 for +-3 %) draws one seeded
    per-event gain factor and is off by default; rendering stays bit
    reproducible for a fixed ``rng_seed``.
    """

    output_sample_rate: int = 48000
    control_rate: int = 25
    gain_law_exponent: float = 1.0
    gain_clamp: tuple[float, float] = (0.05, 4.0)
    pitch_exponent: float = 0.5
    pitch_ratio_clamp: tuple[float, float] = (0.5, 2.0)
    crossfade: float = 0.01
    rng_seed: int = 0
    gain_jitter: float = 0.0
    skip_unresolvable: bool = False

    def __post_init__(self):
        if self.output_sample_rate <= 0 or self.control_rate <= 0:
            raise ValueError("sample and control rates must be > 0")
        for name in ("gain_clamp", "pitch_ratio_clamp"):
            low, high = getattr(self, name)
            if not low < high:
                raise ValueError(f"{name} must satisfy low < high, got ({low}, {high})")
        if self.crossfade < 0:
            raise ValueError("crossfade must be >= 0")
        if self.gain_jitter < 0:
            raise ValueError("gain_jitter must be >= 0")


@dataclass(frozen=True)
class AudioBuffer:
    """Mono float32 audio; after rendering every sample is in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class RenderResult:
    buffer: AudioBuffer
    clipped_samples: int
    rendered_events: int
    skipped_events: int


@dataclass(frozen=True)
class ChunkedAudio:
    """Fixed-length per-timestep chunks of a rendered buffer.

    The final chunk is zero-padded when the buffer length is not a
    multiple of the chunk size; ``concatenated()`` strips that padding
    and reproduces the source exactly.
    """

    chunks: tuple[np.ndarray, ...]
    chunk_samples: int
    padded_tail: bool
    source_length: int

    @property
    def count(self) -> int:
        return len(self.chunks)

    def concatenated(self) -> np.ndarray:
        if not self.chunks:
            return np.zeros(0, dtype=np.float32)
        return np.concatenate(self.chunks)[: self.source_length]

    def sidecar(self) -> dict:
        return {
            "chunk_samples": self.chunk_samples,
            "count": self.count,
            "padded_tail": self.padded_tail,
        }


def gain_for_force(force: float, force_reference: float, cfg: RenderConfig) -> float:
    """Amplitude factor for a contact of ``force`` N against a clip recorded
    at ``force_reference`` N: clamp((force/reference)**exponent)."""
    if not force > 0:
        raise NonPositiveForceError(f"force must be > 0, got {force}")
    if not force_reference > 0:
        raise NonPositiveForceError(f"force_reference must be > 0, got {force_reference}")
    gain = (force / force_reference) ** cfg.gain_law_exponent
    low, high = cfg.gain_clamp
    return float(min(max(gain, low), high))


def pitch_ratio_for_size(size: float, size_reference: float, cfg: RenderConfig) -> float:
    """Pitch ratio for an object of ``size`` m against the clip's reference
    size: clamp((reference/size)**exponent). Smaller objects sound higher."""
    if not size > 0:
        raise NonPositiveSizeError(f"size must be > 0, got {size}")
    if not size_reference > 0:
        raise NonPositiveSizeError(f"size_reference must be > 0, got {size_reference}")
    ratio = (size_reference / size) ** cfg.pitch_exponent
    low, high = cfg.pitch_ratio_clamp
    return float(min(max(ratio, low), high))


def resample(clip: AudioClip, ratio: float) -> AudioClip:
    """Linear-interpolation resampling: pitch scales by ``ratio``, duration
    by 1/ratio, output length is floor(len/ratio). Ratio 1 is the identity."""
    if not ratio > 0:
        raise ValueError(f"ratio must be > 0, got {ratio}")
    return replace(clip, samples=_resample_array(clip.samples, ratio))


def fit_duration(clip: AudioClip, target: float, cfg: RenderConfig) -> AudioClip:
    """Fit a clip to exactly round(target * sample_rate) samples.

    Shorter clips loop with equal-power crossfades of ``cfg.crossfade``
    seconds; longer clips are truncated. Either way the output ends in a
    linear fade-out of the crossfade length.
    """
    if not target > 0:
        raise ValueError(f"target must be > 0, got {target}")
    if target < cfg.crossfade:
        raise TargetShorterThanCrossfadeError(
            f"target {target} s is shorter than the {cfg.crossfade} s crossfade"
        )
    fitted = _fit_array(clip.samples, target, clip.sample_rate, cfg.crossfade)
    return replace(clip, samples=fitted)


def mix_events(
    stream: EventStream, library: Library, cfg: RenderConfig, *, workers: int = 1
) -> np.ndarray:
    """Pre-clamp accumulation buffer (float64): the plain sum of all
    modulated events. Superposition holds here; ``render`` adds the clamp."""
    acc, _, _ = _mix(stream, library, cfg, workers)
    return acc


def render(
    stream: EventStream, library: Library, cfg: RenderConfig, *, workers: int = 1
) -> RenderResult:
    """Render an event stream against a library into a clamped mono buffer.

    An empty stream yields silence of the episode's length. Events whose
    key has no library group raise UnresolvableEventError unless
    ``cfg.skip_unresolvable`` is set, in which case they are counted and
    dropped. ``workers`` parallelises per-event modulation; the mix order
    is fixed, so the output is identical for any worker count.
    """
    acc, rendered, skipped = _mix(stream, library, cfg, workers)
    clipped = int(np.count_nonzero((acc > 1.0) | (acc < -1.0)))
    samples = np.clip(acc, -1.0, 1.0).astype(np.float32)
    return RenderResult(
        buffer=AudioBuffer(samples=samples, sample_rate=cfg.output_sample_rate),
        clipped_samples=clipped,
        rendered_events=rendered,
        skipped_events=skipped,
    )


def chunk_stream(buffer: AudioBuffer, control_rate: float) -> ChunkedAudio:
    """Cut a buffer into ceil(len / (rate/control_rate)) equal chunks.

    The sample rate must divide evenly by the control rate (48 kHz at
    25 Hz gives 1920-sample chunks, 44.1 kHz gives 1764).
    """
    if control_rate <= 0:
        raise ValueError(f"control_rate must be > 0, got {control_rate}")
    per_chunk = buffer.sample_rate / control_rate
    if per_chunk != int(per_chunk):
        raise ValueError(
            f"sample rate {buffer.sample_rate} is not divisible by "
            f"control rate {control_rate}"
        )
    size = int(per_chunk)
    samples = np.asarray(buffer.samples, dtype=np.float32)
    n = len(samples)
    if n == 0:
        return ChunkedAudio(chunks=(), chunk_samples=size, padded_tail=False, source_length=0)
    count = math.ceil(n / size)
    padded = count * size != n
    chunks = []
    for i in range(count):
        chunk = samples[i * size : (i + 1) * size]
        if len(chunk) < size:
            chunk = np.concatenate([chunk, np.zeros(size - len(chunk), dtype=np.float32)])
        chunks.append(chunk)
    return ChunkedAudio(
        chunks=tuple(chunks), chunk_samples=size, padded_tail=padded, source_length=n
    )


def _resample_array(x: np.ndarray, ratio: float) -> np.ndarray:
    if ratio == 1.0:
        return np.asarray(x, dtype=np.float32).copy()
    n = len(x)
    m = int(n / ratio)
    positions = np.arange(m, dtype=np.float64) * ratio
    return np.interp(positions, np.arange(n, dtype=np.float64), x).astype(np.float32)


def _fit_array(x: np.ndarray, target: float, sample_rate: int, crossfade: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float32)
    target_len = int(round(target * sample_rate))
    fade_len = int(round(crossfade * sample_rate))

    if len(x) >= target_len:
        out = x[:target_len].copy()
    else:
        out = _loop_with_crossfade(x, target_len, fade_len)

    ramp_len = min(fade_len, target_len)
    if ramp_len > 0:
        out[-ramp_len:] *= np.linspace(1.0, 0.0, ramp_len, dtype=np.float32)
    return out


def _loop_with_crossfade(x: np.ndarray, target_len: int, fade_len: int) -> np.ndarray:
    # overlap is capped so every loop iteration makes progress
    overlap = min(fade_len, len(x) - 1) if len(x) > 1 else 0
    t = np.linspace(0.0, 1.0, overlap, dtype=np.float64)
    fade_in = np.sqrt(t).astype(np.float32)
    fade_out = np.sqrt(1.0 - t).astype(np.float32)

    out = np.zeros(target_len, dtype=np.float32)
    filled = min(len(x), target_len)
    out[:filled] = x[:filled]
    while filled < target_len:
        if overlap:
            out[filled - overlap : filled] = (
                out[filled - overlap : filled] * fade_out + x[:overlap] * fade_in
            )
        step = min(len(x) - overlap, target_len - filled)
        out[filled : filled + step] = x[overlap : overlap + step]
        filled += step
    return out


def _mix(stream, library, cfg, workers):
    total = int(round(stream.episode_duration * cfg.output_sample_rate))
    acc = np.zeros(total, dtype=np.float64)
    jitter = _jitter_factors(cfg, len(stream.events))

    def modulate(item):
        index, event = item
        return _modulated_event(event, library, cfg, jitter[index])

    items = list(enumerate(stream.events))
    if workers > 1 and items:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            placed = list(pool.map(modulate, items))
    else:
        placed = [modulate(item) for item in items]

    rendered = 0
    skipped = 0
    for result in placed:
        if result is None:
            skipped += 1
            continue
        offset, samples = result
        end = min(total, offset + len(samples))
        if offset < end:
            acc[offset:end] += samples[: end - offset]
        rendered += 1
    return acc, rendered, skipped


def _modulated_event(event, library, cfg, jitter_factor):
    key = QueryKey(
        material_pair=event.material_pair,
        interaction=event.interaction,
        force_magnitude=event.force_magnitude,
    )
    try:
        clip = query(library, key)
    except (UnknownMaterialPairError, UnknownInteractionTypeError) as exc:
        if cfg.skip_unresolvable:
            logger.warning("skipping event at t=%.3fs: %s", event.time, exc)
            return None
        raise UnresolvableEventError(f"event at t={event.time:.3f}s: {exc}") from exc

    gain = gain_for_force(event.force_magnitude, clip.force_reference, cfg) * jitter_factor
    ratio = pitch_ratio_for_size(event.object_size, clip.size_reference, cfg)
    # fold any sample-rate conversion into the same linear resampler
    step = ratio * clip.sample_rate / cfg.output_sample_rate
    samples = _resample_array(clip.samples, step)
    if event.duration > 0:
        if event.duration < cfg.crossfade:
            raise TargetShorterThanCrossfadeError(
                f"event at t={event.time:.3f}s: duration {event.duration} s is "
                f"shorter than the {cfg.crossfade} s crossfade"
            )
        samples = _fit_array(samples, event.duration, cfg.output_sample_rate, cfg.crossfade)
    offset = int(round(event.time * cfg.output_sample_rate))
    return offset, samples.astype(np.float64) * gain


def _jitter_factors(cfg: RenderConfig, count: int) -> np.ndarray:
    if cfg.gain_jitter == 0.0:
        return np.ones(count)
    rng = np.random.default_rng(cfg.rng_seed)
    return 1.0 + rng.uniform(-cfg.gain_jitter, cfg.gain_jitter, size=count)
