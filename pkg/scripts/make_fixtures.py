#!/usr/bin/env python3
"""Regenerate the bundled fixtures: a five-clip sound library, a five-event
episode, and a small episode log. Deterministic; run from the repo root."""

import json
from pathlib import Path

import numpy as np

from clank.wav import write_wav

RATE = 48000
ROOT = Path(__file__).resolve().parents[1] / "fixtures"


def decaying_tone(freqs, duration, decay, seed, noise=0.02):
    rng = np.random.default_rng(seed)
    t = np.arange(int(duration * RATE)) / RATE
    signal = sum(np.sin(2 * np.pi * f * t) / (i + 1) for i, f in enumerate(freqs))
    signal += noise * rng.standard_normal(len(t))
    signal *= np.exp(-t / decay)
    signal[: 48] *= np.linspace(0.0, 1.0, 48)  # click-free onset
    return (0.65 * signal / np.max(np.abs(signal))).astype(np.float32)


def band_noise(duration, seed, lowpass=0.3, tremolo_hz=0.0):
    rng = np.random.default_rng(seed)
    n = int(duration * RATE)
    noise = rng.standard_normal(n)
    # one-pole lowpass keeps the scrape broadband but dull
    out = np.empty(n)
    state = 0.0
    for i in range(n):
        state += lowpass * (noise[i] - state)
        out[i] = state
    if tremolo_hz:
        t = np.arange(n) / RATE
        out *= 0.6 + 0.4 * np.sin(2 * np.pi * tremolo_hz * t)
    envelope = np.minimum(np.arange(n) / (0.02 * RATE), 1.0)
    envelope *= np.minimum((n - np.arange(n)) / (0.05 * RATE), 1.0)
    out *= envelope
    return (0.5 * out / np.max(np.abs(out))).astype(np.float32)


CLIPS = {
    "wood_tap_soft": dict(
        samples=decaying_tone([620, 940, 1830], 0.12, 0.025, seed=11),
        material_pair=["gripper", "wood"], interaction_type="impact",
        force_reference_n=2.0, size_reference_m=0.06,
    ),
    "wood_tap_hard": dict(
        samples=decaying_tone([640, 1210, 2400], 0.10, 0.018, seed=12),
        material_pair=["gripper", "wood"], interaction_type="impact",
        force_reference_n=8.0, size_reference_m=0.06,
    ),
    "wood_scrape": dict(
        samples=band_noise(0.40, seed=13, lowpass=0.35, tremolo_hz=14.0),
        material_pair=["wood", "table"], interaction_type="scrape",
        force_reference_n=5.0, size_reference_m=0.10,
    ),
    "ceramic_tap": dict(
        samples=decaying_tone([1310, 2140, 3530], 0.10, 0.012, seed=14, noise=0.01),
        material_pair=["gripper", "ceramic"], interaction_type="impact",
        force_reference_n=3.0, size_reference_m=0.04,
    ),
    "ceramic_slide": dict(
        samples=band_noise(0.50, seed=15, lowpass=0.15, tremolo_hz=6.0),
        material_pair=["ceramic", "table"], interaction_type="sustained",
        force_reference_n=4.0, size_reference_m=0.08,
    ),
}

EVENTS = [
    {"t": 0.10, "kind": "gripper_object", "material_pair": ["gripper", "wood"],
     "interaction": "impact", "velocity_mps": 0.8, "force_n": 2.5, "size_m": 0.06,
     "duration_s": 0.0},
    {"t": 0.50, "kind": "gripper_object", "material_pair": ["gripper", "wood"],
     "interaction": "impact", "velocity_mps": 1.5, "force_n": 7.0, "size_m": 0.05,
     "duration_s": 0.0},
    {"t": 0.80, "kind": "object_environment", "material_pair": ["wood", "table"],
     "interaction": "scrape", "velocity_mps": 0.3, "force_n": 4.0, "size_m": 0.10,
     "duration_s": 0.35},
    {"t": 1.30, "kind": "gripper_object", "material_pair": ["gripper", "ceramic"],
     "interaction": "impact", "velocity_mps": 0.6, "force_n": 3.0, "size_m": 0.03,
     "duration_s": 0.0},
    {"t": 1.45, "kind": "object_environment", "material_pair": ["ceramic", "table"],
     "interaction": "sustained", "velocity_mps": 0.2, "force_n": 5.0, "size_m": 0.08,
     "duration_s": 0.45},
]

EPISODES = [
    {"task": "erase_marks", "achieved": 42.0, "target": 50.0, "success": False},
    {"task": "erase_marks", "achieved": 50.0, "target": 50.0, "success": True},
    {"task": "erase_marks", "achieved": 18.0, "target": 50.0, "success": False},
    {"task": "scoop_oatmeal", "achieved": 5.0, "target": 5.0, "success": True},
    {"task": "scoop_oatmeal", "achieved": 2.5, "target": 5.0, "success": False},
    {"task": "scoop_oatmeal", "achieved": 6.0, "target": 5.0, "success": True},
]


def main():
    clips_dir = ROOT / "clips"
    clips_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for clip_id, spec in CLIPS.items():
        rel = f"clips/{clip_id}.wav"
        write_wav(ROOT / rel, spec["samples"], RATE)
        entries.append({
            "clip_id": clip_id,
            "file": rel,
            "material_pair": spec["material_pair"],
            "interaction_type": spec["interaction_type"],
            "force_reference_n": spec["force_reference_n"],
            "size_reference_m": spec["size_reference_m"],
        })
    (ROOT / "manifest.json").write_text(
        json.dumps({"version": 1, "entries": entries}, indent=2) + "\n"
    )

    lines = [json.dumps({"episode_duration_s": 2.0})]
    lines += [json.dumps(event) for event in EVENTS]
    (ROOT / "events.jsonl").write_text("\n".join(lines) + "\n")

    (ROOT / "episodes.jsonl").write_text(
        "\n".join(json.dumps(e) for e in EPISODES) + "\n"
    )
    print(f"wrote fixtures under {ROOT}")


if __name__ == "__main__":
    main()
