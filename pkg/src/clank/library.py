"""Structured contact-sound library: loading, validation, and retrieval.

The library holds short recordings of real contact events, indexed by an
ordered material pair (gripper side first), an interaction type, and the
force at which each clip was recorded. Retrieval picks the clip whose
recording force is nearest to the queried force, breaking ties toward the
lower force.

Manifest schema (JSON), paths relative to the manifest file::

    {
      "version": 1,
      "entries": [
        {
          "clip_id": "wood_tap_soft",
          "file": "clips/wood_tap_soft.wav",
          "material_pair": ["gripper", "wood"],
          "interaction_type": "impact",      # impact | scrape | sustained
          "force_reference_n": 2.0,
          "size_reference_m": 0.06,
          "symmetric": false                 # optional: also index the reversed pair
        }
      ]
    }

Clips must be 48 kHz WAV (mono or stereo; stereo is mixed down at load).
"""

from __future__ import annotations

import enum
import json
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    DuplicateKeyError,
    EmptyClipError,
    MissingFileError,
    SampleRateMismatchError,
    SchemaViolationError,
    UnknownInteractionTypeError,
    UnknownMaterialPairError,
)
from .wav import read_wav

LIBRARY_SAMPLE_RATE = 48000
MANIFEST_VERSION = 1

MaterialPair = tuple[str, str]


class Interaction(enum.Enum):
    """Contact interaction categories, with their wire-format names."""

    IMPACT = "impact"
    SCRAPE = "scrape"
    SUSTAINED = "sustained"


@dataclass(frozen=True)
class AudioClip:
    """One recorded contact sound plus its index metadata.

    ``samples`` is mono float32 PCM in [-1, 1]; library clips are always
    48 kHz. ``force_reference`` (N) and ``size_reference`` (m) describe the
    recording conditions and anchor the modulation laws.
    """

    clip_id: str
    samples: np.ndarray
    sample_rate: int
    material_pair: MaterialPair
    interaction: Interaction
    force_reference: float
    size_reference: float

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class QueryKey:
    """Lookup key for retrieval: ordered pair, interaction, contact force."""

    material_pair: MaterialPair
    interaction: Interaction
    force_magnitude: float

    def __post_init__(self):
        if not self.force_magnitude > 0:
            raise ValueError(f"force_magnitude must be > 0, got {self.force_magnitude}")


class Library:
    """Immutable in-memory clip collection grouped by (pair, interaction).

    Within each group clips are kept sorted by ascending force reference.
    Safe to share across threads after construction.
    """

    def __init__(self, clips: Iterable[AudioClip], *, symmetric_clip_ids: Iterable[str] = ()):
        symmetric = set(symmetric_clip_ids)
        self._clips = tuple(clips)

        seen_ids: set[str] = set()
        groups: dict[tuple[MaterialPair, Interaction], list[AudioClip]] = {}
        seen_triples: set[tuple[MaterialPair, Interaction, float]] = set()
        for clip in self._clips:
            if clip.clip_id in seen_ids:
                raise DuplicateKeyError(f"duplicate clip_id {clip.clip_id!r}")
            seen_ids.add(clip.clip_id)
            pairs = [clip.material_pair]
            reversed_pair = (clip.material_pair[1], clip.material_pair[0])
            if clip.clip_id in symmetric and reversed_pair != clip.material_pair:
                pairs.append(reversed_pair)
            for pair in pairs:
                triple = (pair, clip.interaction, clip.force_reference)
                if triple in seen_triples:
                    raise DuplicateKeyError(
                        f"duplicate (material_pair, interaction, force) index "
                        f"{pair} / {clip.interaction.value} / {clip.force_reference} N"
                    )
                seen_triples.add(triple)
                groups.setdefault((pair, clip.interaction), []).append(clip)

        self._groups = {
            key: tuple(sorted(group, key=lambda c: c.force_reference))
            for key, group in groups.items()
        }
        self._known_pairs = {pair for pair, _ in self._groups}

    @property
    def clip_count(self) -> int:
        return len(self._clips)

    @property
    def clips(self) -> tuple[AudioClip, ...]:
        return self._clips

    def group(self, pair: MaterialPair, interaction: Interaction) -> tuple[AudioClip, ...]:
        """Clips registered under (pair, interaction), by ascending force."""
        return self._groups.get((tuple(pair), interaction), ())

    def has_pair(self, pair: MaterialPair) -> bool:
        return tuple(pair) in self._known_pairs


def query(library: Library, key: QueryKey) -> AudioClip:
    """Retrieve the clip matching the key's pair and interaction exactly,
    with the recording force nearest to ``key.force_magnitude``.

    Equidistant forces resolve to the lower one. Raises
    UnknownMaterialPairError / UnknownInteractionTypeError when the group
    is empty.
    """
    pair = tuple(key.material_pair)
    group = library.group(pair, key.interaction)
    if not group:
        if not library.has_pair(pair):
            raise UnknownMaterialPairError(f"no clips for material pair {pair}")
        raise UnknownInteractionTypeError(
            f"no {key.interaction.value!r} clips for material pair {pair}"
        )
    forces = [c.force_reference for c in group]
    i = bisect_left(forces, key.force_magnitude)
    if i == 0:
        return group[0]
    if i == len(group):
        return group[-1]
    below, above = group[i - 1], group[i]
    # <= keeps the lower-force clip on exact ties
    if key.force_magnitude - below.force_reference <= above.force_reference - key.force_magnitude:
        return below
    return above


def load_library(manifest_path: str | Path) -> Library:
    """Load and validate a manifest plus every clip it references.

    Raises on the first problem found; use :func:`validate_manifest` to
    collect all diagnostics instead.
    """
    entries, base = _read_manifest(manifest_path)
    clips = []
    symmetric = set()
    for index, entry in enumerate(entries):
        clip = _load_entry(base, entry, index)
        clips.append(clip)
        if entry.get("symmetric", False):
            symmetric.add(clip.clip_id)
    return Library(clips, symmetric_clip_ids=symmetric)


def validate_manifest(manifest_path: str | Path) -> list[dict]:
    """Check every manifest entry, returning one diagnostic dict per problem.

    Unlike :func:`load_library` this does not stop at the first error. Each
    diagnostic has ``entry`` (index or None), ``clip_id`` (when known),
    ``kind`` (short error name), and ``detail``.
    """
    try:
        entries, base = _read_manifest(manifest_path)
    except (MissingFileError, SchemaViolationError) as exc:
        return [_diagnostic(None, None, exc)]

    problems = []
    clips = []
    symmetric = set()
    for index, entry in enumerate(entries):
        clip_id = entry.get("clip_id") if isinstance(entry, dict) else None
        try:
            clip = _load_entry(base, entry, index)
        except Exception as exc:  # noqa: BLE001 - every entry gets checked
            problems.append(_diagnostic(index, clip_id, exc))
            continue
        clips.append(clip)
        if entry.get("symmetric", False):
            symmetric.add(clip.clip_id)
    try:
        Library(clips, symmetric_clip_ids=symmetric)
    except DuplicateKeyError as exc:
        problems.append(_diagnostic(None, None, exc))
    return problems


def _diagnostic(index, clip_id, exc) -> dict:
    kind = getattr(exc, "kind", type(exc).__name__)
    return {"entry": index, "clip_id": clip_id, "kind": kind, "detail": str(exc)}


def _read_manifest(manifest_path: str | Path) -> tuple[list, Path]:
    path = Path(manifest_path)
    if not path.is_file():
        raise MissingFileError(f"manifest not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaViolationError(f"{path}: manifest is not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise SchemaViolationError(f"{path}: manifest must be a JSON object")
    if doc.get("version") != MANIFEST_VERSION:
        raise SchemaViolationError(
            f"{path}: unsupported manifest version {doc.get('version')!r} "
            f"(expected {MANIFEST_VERSION})"
        )
    entries = doc.get("entries")
    if not isinstance(entries, list):
        raise SchemaViolationError(f"{path}: 'entries' must be a list")
    return entries, path.parent


def _load_entry(base: Path, entry: object, index: int) -> AudioClip:
    if not isinstance(entry, dict):
        raise SchemaViolationError(f"entry {index}: must be a JSON object")

    clip_id = _field(entry, index, "clip_id", str)
    file_rel = _field(entry, index, "file", str)
    pair_raw = _field(entry, index, "material_pair", list)
    if len(pair_raw) != 2 or not all(isinstance(m, str) for m in pair_raw):
        raise SchemaViolationError(f"entry {index}: material_pair must be two strings")
    interaction_raw = _field(entry, index, "interaction_type", str)
    try:
        interaction = Interaction(interaction_raw)
    except ValueError:
        raise SchemaViolationError(
            f"entry {index}: unknown interaction_type {interaction_raw!r}"
        ) from None
    force = _field(entry, index, "force_reference_n", (int, float))
    size = _field(entry, index, "size_reference_m", (int, float))
    if not force > 0:
        raise SchemaViolationError(f"entry {index}: force_reference_n must be > 0")
    if not size > 0:
        raise SchemaViolationError(f"entry {index}: size_reference_m must be > 0")

    wav_path = base / file_rel
    if not wav_path.is_file():
        raise MissingFileError(f"entry {index}: audio file not found: {wav_path}")
    samples, rate, _ = read_wav(wav_path)
    if rate != LIBRARY_SAMPLE_RATE:
        raise SampleRateMismatchError(
            f"entry {index}: {file_rel} is {rate} Hz, library clips must be "
            f"{LIBRARY_SAMPLE_RATE} Hz"
        )
    if samples.size == 0:
        raise EmptyClipError(f"entry {index}: {file_rel} holds no samples")
    if not np.all(np.isfinite(samples)):
        raise SchemaViolationError(f"entry {index}: {file_rel} contains non-finite samples")
    peak = float(np.max(np.abs(samples)))
    if peak > 1.0:
        raise SchemaViolationError(
            f"entry {index}: {file_rel} has samples outside [-1, 1] (peak {peak:.4f})"
        )

    return AudioClip(
        clip_id=clip_id,
        samples=samples,
        sample_rate=rate,
        material_pair=(pair_raw[0], pair_raw[1]),
        interaction=interaction,
        force_reference=float(force),
        size_reference=float(size),
    )


def _field(entry: dict, index: int, name: str, types) -> object:
    value = entry.get(name)
    if not isinstance(value, types) or isinstance(value, bool):
        raise SchemaViolationError(f"entry {index}: missing or invalid {name!r}")
    return value
