"""Collision event streams: parsing, validation, and contact coalescing.

A simulator emits one JSONL document per episode. The first non-blank line
is a header, each following line one collision event::

    {"episode_duration_s": 2.0}
    {"t": 0.10, "kind": "gripper_object", "material_pair": ["gripper", "wood"],
     "interaction": "impact", "velocity_mps": 0.8, "force_n": 2.5,
     "size_m": 0.06, "duration_s": 0.0}

``kind`` is ``gripper_object`` or ``object_environment``. Physics engines
report continuous contact as bursts of per-frame events; ``coalesce_contacts``
merges those bursts back into single intervals.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace

from .errors import (
    EventPastEpisodeEndError,
    NegativeQuantityError,
    SchemaViolationError,
)
from .library import Interaction, MaterialPair

# 25 Hz control loop
DEFAULT_CONTROL_PERIOD = 1.0 / 25.0


class EventKind(enum.Enum):
    GRIPPER_OBJECT = "gripper_object"
    OBJECT_ENVIRONMENT = "object_environment"


@dataclass(frozen=True)
class CollisionEvent:
    """One contact occurrence. ``duration`` is 0 for instantaneous impacts."""

    time: float
    kind: EventKind
    material_pair: MaterialPair
    interaction: Interaction
    impact_velocity: float
    force_magnitude: float
    object_size: float
    duration: float

    @property
    def end(self) -> float:
        return self.time + self.duration

    @property
    def key(self) -> tuple:
        """Grouping key for coalescing: events of differing keys never merge."""
        return (self.kind, self.material_pair, self.interaction)


@dataclass(frozen=True)
class EventStream:
    """Events sorted by start time, bounded by the episode duration."""

    events: tuple[CollisionEvent, ...]
    episode_duration: float


def parse_events(text: str) -> EventStream:
    """Parse the JSONL event schema into a validated, time-sorted stream.

    Blank lines are ignored. Errors carry 1-based line numbers.
    """
    header = None
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolationError(f"not valid JSON ({exc.msg})", line=lineno) from exc
        if not isinstance(doc, dict):
            raise SchemaViolationError("expected a JSON object", line=lineno)
        if header is None:
            header = _parse_header(doc, lineno)
            continue
        events.append(_parse_event(doc, lineno, episode_duration=header))
    if header is None:
        raise SchemaViolationError("missing header line with episode_duration_s", line=1)
    events.sort(key=lambda e: e.time)
    return EventStream(events=tuple(events), episode_duration=header)


def _parse_header(doc: dict, lineno: int) -> float:
    duration = doc.get("episode_duration_s")
    if not isinstance(duration, (int, float)) or isinstance(duration, bool):
        raise SchemaViolationError(
            "header must carry a numeric 'episode_duration_s'", line=lineno
        )
    if duration < 0:
        raise NegativeQuantityError("episode_duration_s must be >= 0", line=lineno)
    return float(duration)


def _parse_event(doc: dict, lineno: int, episode_duration: float) -> CollisionEvent:
    t = _number(doc, "t", lineno)
    velocity = _number(doc, "velocity_mps", lineno)
    force = _number(doc, "force_n", lineno)
    size = _number(doc, "size_m", lineno)
    duration = _number(doc, "duration_s", lineno)

    if t < 0:
        raise NegativeQuantityError("t must be >= 0", line=lineno)
    if velocity < 0:
        raise NegativeQuantityError("velocity_mps must be >= 0", line=lineno)
    if force <= 0:
        raise NegativeQuantityError("force_n must be > 0", line=lineno)
    if size <= 0:
        raise NegativeQuantityError("size_m must be > 0", line=lineno)
    if duration < 0:
        raise NegativeQuantityError("duration_s must be >= 0", line=lineno)
    if t + duration > episode_duration:
        raise EventPastEpisodeEndError(
            f"event interval [{t}, {t + duration}] exceeds episode "
            f"duration {episode_duration}",
            line=lineno,
        )

    kind_raw = doc.get("kind")
    try:
        kind = EventKind(kind_raw)
    except ValueError:
        raise SchemaViolationError(f"unknown kind {kind_raw!r}", line=lineno) from None
    interaction_raw = doc.get("interaction")
    try:
        interaction = Interaction(interaction_raw)
    except ValueError:
        raise SchemaViolationError(
            f"unknown interaction {interaction_raw!r}", line=lineno
        ) from None
    pair = doc.get("material_pair")
    if not isinstance(pair, list) or len(pair) != 2 or not all(isinstance(m, str) for m in pair):
        raise SchemaViolationError("material_pair must be two strings", line=lineno)

    return CollisionEvent(
        time=t,
        kind=kind,
        material_pair=(pair[0], pair[1]),
        interaction=interaction,
        impact_velocity=velocity,
        force_magnitude=force,
        object_size=size,
        duration=duration,
    )


def _number(doc: dict, name: str, lineno: int) -> float:
    value = doc.get(name)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaViolationError(f"missing or non-numeric {name!r}", line=lineno)
    return float(value)


def coalesce_contacts(
    stream: EventStream,
    gap_threshold: float = DEFAULT_CONTROL_PERIOD,
    *,
    control_period: float = DEFAULT_CONTROL_PERIOD,
) -> EventStream:
    """Merge per-frame contact reports into continuous-contact intervals.

    Events sharing (kind, material_pair, interaction) are merged whenever the
    gap between one interval's end and the next one's start is at most
    ``gap_threshold`` (0 merges only touching/overlapping intervals). Other
    keys interleaved in time do not break a run. A merged event spans the
    union of its members, takes the maximum force and velocity, and the
    object size of its strongest member. Any event whose duration ends up
    exceeding ``control_period`` is relabeled a sustained contact.

    Merging repeats until nothing changes, so the operation is idempotent:
    relabeled events may join neighboring sustained runs on a later pass.
    """
    if gap_threshold < 0:
        raise ValueError(f"gap_threshold must be >= 0, got {gap_threshold}")
    if control_period <= 0:
        raise ValueError(f"control_period must be > 0, got {control_period}")

    events = list(stream.events)
    while True:
        merged = _coalesce_pass(events, gap_threshold, control_period)
        if merged == events:
            return EventStream(events=tuple(merged), episode_duration=stream.episode_duration)
        events = merged


def _coalesce_pass(events, gap_threshold, control_period):
    groups: dict[tuple, list[CollisionEvent]] = {}
    for event in events:
        groups.setdefault(event.key, []).append(event)

    out = []
    for group in groups.values():
        run: list[CollisionEvent] = []
        run_end = 0.0
        for event in group:
            if run and event.time - run_end <= gap_threshold:
                run.append(event)
                run_end = max(run_end, event.end)
            else:
                if run:
                    out.append(_merge_run(run, run_end, control_period))
                run = [event]
                run_end = event.end
        if run:
            out.append(_merge_run(run, run_end, control_period))

    out.sort(key=lambda e: e.time)
    return out


def _merge_run(run, run_end, control_period):
    if len(run) == 1:
        merged = run[0]
    else:
        strongest = max(run, key=lambda e: e.force_magnitude)
        first = run[0]
        merged = replace(
            first,
            duration=run_end - first.time,
            force_magnitude=strongest.force_magnitude,
            impact_velocity=max(e.impact_velocity for e in run),
            object_size=strongest.object_size,
        )
    if merged.duration > control_period and merged.interaction is not Interaction.SUSTAINED:
        merged = replace(merged, interaction=Interaction.SUSTAINED)
    return merged
