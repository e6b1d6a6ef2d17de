"""Figure rendering for the report paths (Agg backend, files only)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .evaluation import EvalReport
from .spectral import LogPowerSpectrogram


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_spectrogram_figure(
    spec: LogPowerSpectrogram,
    path: str | Path,
    sample_rate: int | None = None,
    hop_length: int = 256,
    fft_size: int = 2048,
) -> None:
    """Render a log-power spectrogram heat map to an image file."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if sample_rate:
        extent = (
            0.0,
            spec.num_frames * hop_length / sample_rate,
            0.0,
            (spec.num_bins - 1) * sample_rate / fft_size / 1000.0,
        )
        ax.set_xlabel("time [s]")
        ax.set_ylabel("frequency [kHz]")
    else:
        extent = (0.0, spec.num_frames, 0.0, spec.num_bins)
        ax.set_xlabel("frame")
        ax.set_ylabel("bin")
    image = ax.imshow(
        spec.values,
        origin="lower",
        aspect="auto",
        extent=extent,
        cmap="magma",
        vmin=max(float(np.min(spec.values)), -180.0),
    )
    fig.colorbar(image, ax=ax, label="power [dB]")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_eval_figure(report: EvalReport, path: str | Path) -> None:
    """Render per-task success rate and mean completion as grouped bars."""
    plt = _plt()
    labels = list(report.per_task) + ["overall"]
    stats = list(report.per_task.values()) + [report.overall]
    success = [s.success_rate for s in stats]
    completion = [s.mean_tcr for s in stats]

    x = np.arange(len(labels))
    width = 0.38
    fig, ax = plt.subplots(figsize=(max(6.0, 1.6 * len(labels)), 4.0))
    ax.bar(x - width / 2, success, width, label="success rate", color="#3b6ea5")
    ax.bar(x + width / 2, completion, width, label="mean TCR", color="#d1793c")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel("percent")
    ax.set_ylim(0, 105)
    ax.legend(frameon=False)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
