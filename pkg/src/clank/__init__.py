"""Contact-audio synthesis and evaluation toolkit for simulated manipulation.

Renders collision event streams into contact audio from a structured
sound library, extracts log-power spectrogram features, runs the
desk-scale multimodal fusion math, and scores manipulation episodes.
"""

from . import errors
from .evaluation import EpisodeResult, EvalReport, TaskStats, aggregate, tcr
from .events import (
    DEFAULT_CONTROL_PERIOD,
    CollisionEvent,
    EventKind,
    EventStream,
    coalesce_contacts,
    parse_events,
)
from .fusion import ActionBlock, FeatureBlock, Modality, ModelDims, l1_loss
from .library import (
    LIBRARY_SAMPLE_RATE,
    AudioClip,
    Interaction,
    Library,
    QueryKey,
    load_library,
    query,
)
from .render import (
    AudioBuffer,
    ChunkedAudio,
    RenderConfig,
    RenderResult,
    chunk_stream,
    fit_duration,
    gain_for_force,
    mix_events,
    pitch_ratio_for_size,
    render,
    resample,
)
from .spectral import (
    ComplexSpectrogram,
    LogPowerSpectrogram,
    SpectralConfig,
    fbsp_transform,
    features_for_chunks,
    log_power,
)

__version__ = "0.1.0"

__all__ = [
    "ActionBlock",
    "AudioBuffer",
    "AudioClip",
    "ChunkedAudio",
    "CollisionEvent",
    "ComplexSpectrogram",
    "DEFAULT_CONTROL_PERIOD",
    "EpisodeResult",
    "EvalReport",
    "EventKind",
    "EventStream",
    "FeatureBlock",
    "Interaction",
    "LIBRARY_SAMPLE_RATE",
    "Library",
    "LogPowerSpectrogram",
    "Modality",
    "ModelDims",
    "QueryKey",
    "RenderConfig",
    "RenderResult",
    "SpectralConfig",
    "TaskStats",
    "aggregate",
    "chunk_stream",
    "coalesce_contacts",
    "errors",
    "fbsp_transform",
    "features_for_chunks",
    "fit_duration",
    "gain_for_force",
    "l1_loss",
    "load_library",
    "log_power",
    "mix_events",
    "parse_events",
    "pitch_ratio_for_size",
    "query",
    "render",
    "resample",
    "tcr",
]
