"""Episode scoring: completion rate and success rate over episode logs.

The completion rate of one episode is achieved progress over the task
target, clamped to [0, 1]; progress units are task-specific (erased area,
scooped grams) and arrive pre-measured. Success is a separate externally
judged flag, not derived from the ratio.

Episode logs are JSONL, one episode per line::

    {"task": "scoop_oatmeal", "achieved": 2.5, "target": 5.0, "success": false}

Reports carry exact percentages; rendered output (table, JSON, CSV)
rounds to one decimal place.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import (
    EmptyInputError,
    NegativeQuantityError,
    NonPositiveTargetError,
    SchemaViolationError,
)


def tcr(achieved: float, target: float) -> float:
    """Task completion rate: min(achieved / target, 1.0)."""
    if not target > 0:
        raise NonPositiveTargetError(f"target must be > 0, got {target}")
    if achieved < 0:
        raise NegativeQuantityError(f"achieved progress must be >= 0, got {achieved}")
    return min(achieved / target, 1.0)


@dataclass(frozen=True)
class EpisodeResult:
    """One episode's measured progress against its target."""

    task_id: str
    achieved_progress: float
    task_target: float
    success: bool

    def __post_init__(self):
        if not self.task_target > 0:
            raise NonPositiveTargetError(
                f"task_target must be > 0, got {self.task_target}"
            )
        if self.achieved_progress < 0:
            raise NegativeQuantityError(
                f"achieved_progress must be >= 0, got {self.achieved_progress}"
            )

    @property
    def completion(self) -> float:
        return tcr(self.achieved_progress, self.task_target)


@dataclass(frozen=True)
class TaskStats:
    episode_count: int
    success_rate: float  # percent
    mean_tcr: float  # percent


@dataclass(frozen=True)
class EvalReport:
    """Per-task and overall statistics; tasks sorted by id."""

    per_task: dict[str, TaskStats]
    overall: TaskStats

    def to_json_dict(self, ndigits: int = 1) -> dict:
        def fmt(stats: TaskStats) -> dict:
            return {
                "episodes": stats.episode_count,
                "success_rate": round(stats.success_rate, ndigits),
                "mean_tcr": round(stats.mean_tcr, ndigits),
            }

        return {
            "tasks": {task: fmt(stats) for task, stats in self.per_task.items()},
            "overall": fmt(self.overall),
        }


def aggregate(results: list[EpisodeResult]) -> EvalReport:
    """Group episodes by task and compute success rate and mean completion.

    Both are percentages; the overall row averages over all episodes, not
    over task means.
    """
    if not results:
        raise EmptyInputError("no episodes to aggregate")
    by_task: dict[str, list[EpisodeResult]] = {}
    for result in results:
        by_task.setdefault(result.task_id, []).append(result)

    per_task = {
        task: _stats(episodes) for task, episodes in sorted(by_task.items())
    }
    return EvalReport(per_task=per_task, overall=_stats(results))


def _stats(episodes: list[EpisodeResult]) -> TaskStats:
    n = len(episodes)
    successes = sum(1 for e in episodes if e.success)
    mean_completion = sum(e.completion for e in episodes) / n
    return TaskStats(
        episode_count=n,
        success_rate=100.0 * successes / n,
        mean_tcr=100.0 * mean_completion,
    )


def read_episodes(text: str) -> list[EpisodeResult]:
    """Parse the episode-log JSONL schema; blank lines are ignored."""
    episodes = []
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
        task = doc.get("task")
        achieved = doc.get("achieved")
        target = doc.get("target")
        success = doc.get("success")
        if not isinstance(task, str):
            raise SchemaViolationError("missing or non-string 'task'", line=lineno)
        for name, value in (("achieved", achieved), ("target", target)):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise SchemaViolationError(f"missing or non-numeric {name!r}", line=lineno)
        if not isinstance(success, bool):
            raise SchemaViolationError("missing or non-boolean 'success'", line=lineno)
        if not target > 0:
            raise NonPositiveTargetError(f"target must be > 0, got {target}", line=lineno)
        if achieved < 0:
            raise NegativeQuantityError(f"achieved must be >= 0, got {achieved}", line=lineno)
        episodes.append(
            EpisodeResult(
                task_id=task,
                achieved_progress=float(achieved),
                task_target=float(target),
                success=success,
            )
        )
    return episodes


def format_table(report: EvalReport) -> str:
    """Human-readable fixed-width summary table."""
    rows = [("task", "episodes", "success rate", "mean TCR")]
    for task, stats in report.per_task.items():
        rows.append(_row(task, stats))
    rows.append(_row("overall", report.overall))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = []
    for index, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if index == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def report_rows(report: EvalReport) -> list[tuple[str, int, float, float]]:
    """Rows for delimited output: (task, episodes, success_rate, mean_tcr)."""
    rows = [
        (task, stats.episode_count, round(stats.success_rate, 1), round(stats.mean_tcr, 1))
        for task, stats in report.per_task.items()
    ]
    rows.append(
        (
            "overall",
            report.overall.episode_count,
            round(report.overall.success_rate, 1),
            round(report.overall.mean_tcr, 1),
        )
    )
    return rows


def _row(name: str, stats: TaskStats) -> tuple[str, str, str, str]:
    return (
        name,
        str(stats.episode_count),
        f"{stats.success_rate:.1f}%",
        f"{stats.mean_tcr:.1f}%",
    )
