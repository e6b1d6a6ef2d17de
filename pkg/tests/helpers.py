"""Shared test utilities: in-memory clip factories and independent oracles.

The oracles deliberately avoid the library code paths they check: the DFT
oracle multiplies by an explicitly constructed transform matrix instead of
using any FFT, and the retrieval oracle is a flat linear scan.
"""

import functools

import numpy as np

from clank.library import AudioClip, Interaction, Library


def make_clip(
    clip_id="clip",
    samples=None,
    sample_rate=48000,
    material_pair=("gripper", "wood"),
    interaction=Interaction.IMPACT,
    force_reference=1.0,
    size_reference=0.05,
):
    if samples is None:
        samples = np.zeros(64, dtype=np.float32)
    return AudioClip(
        clip_id=clip_id,
        samples=np.asarray(samples, dtype=np.float32),
        sample_rate=sample_rate,
        material_pair=tuple(material_pair),
        interaction=interaction,
        force_reference=force_reference,
        size_reference=size_reference,
    )


def sine_clip(freq, duration=0.1, sample_rate=48000, amplitude=0.9, **kwargs):
    t = np.arange(int(duration * sample_rate)) / sample_rate
    samples = (amplitude * np.sin(2 * np.pi * freq * t)).astype(np.float32)
    return make_clip(samples=samples, sample_rate=sample_rate, **kwargs)


def random_library(rng, n_clips, n_materials=6):
    """A library of tiny clips over random (pair, interaction, force) triples."""
    materials = [f"mat{i}" for i in range(n_materials)]
    interactions = list(Interaction)
    clips = []
    triples = set()
    while len(clips) < n_clips:
        pair = (materials[rng.integers(n_materials)], materials[rng.integers(n_materials)])
        interaction = interactions[rng.integers(len(interactions))]
        force = float(np.round(rng.uniform(0.1, 20.0), 3))
        if (pair, interaction, force) in triples:
            continue
        triples.add((pair, interaction, force))
        clips.append(
            make_clip(
                clip_id=f"clip{len(clips)}",
                samples=rng.uniform(-0.5, 0.5, size=16).astype(np.float32),
                material_pair=pair,
                interaction=interaction,
                force_reference=force,
                size_reference=float(rng.uniform(0.01, 0.5)),
            )
        )
    return Library(clips)


def scan_retrieval_oracle(library, key):
    """Exhaustive linear scan: exact (pair, interaction) match, nearest
    force, ties to the lower force. Returns None when nothing matches."""
    best = None
    best_rank = None
    for clip in library.clips:
        if clip.material_pair != tuple(key.material_pair):
            continue
        if clip.interaction is not key.interaction:
            continue
        rank = (abs(clip.force_reference - key.force_magnitude), clip.force_reference)
        if best_rank is None or rank < best_rank:
            best = clip
            best_rank = rank
    return best


def hann_oracle(length):
    """Periodic Hann window written out directly."""
    n = np.arange(length)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / length)


@functools.lru_cache(maxsize=4)
def naive_dft_matrix(size):
    """Explicit DFT matrix W[k, n] = exp(-2*pi*i*k*n / size).

    Cached: building the 2048-point matrix dominates the oracle's cost.
    """
    k = np.arange(size)
    return np.exp(-2j * np.pi * np.outer(k, k) / size)


def naive_windowed_spectrogram(x, window_length=1024, hop_length=256, fft_size=2048):
    """O(N^2) reference transform: per-frame window, zero-pad, matrix DFT.

    Returns the full two-sided spectrum, shape (fft_size, num_frames);
    slice [:fft_size//2+1] for the one-sided comparison.
    """
    x = np.asarray(x, dtype=np.float64)
    num_frames = (len(x) - window_length) // hop_length + 1
    window = hann_oracle(window_length)
    dft = naive_dft_matrix(fft_size)
    spectrum = np.zeros((fft_size, num_frames), dtype=np.complex128)
    for frame in range(num_frames):
        padded = np.zeros(fft_size)
        start = frame * hop_length
        padded[:window_length] = x[start : start + window_length] * window
        spectrum[:, frame] = dft @ padded
    return spectrum
