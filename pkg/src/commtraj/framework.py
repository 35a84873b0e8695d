"""Window/stage machinery: split a trajectory's post index sequence into
non-overlapping windows, group windows into life stages, and evaluate window
functions under the fixed-prefix and full-life views."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

from .ingest import UserTrajectory

FIXED_PREFIX = "fixed-prefix"
FULL_LIFE = "full-life"

# Window-function kinds. "window" maps the window's events to a value;
# "index" maps a single post to a value and is averaged over the window's
# defined indices; "prefix" maps every post up to the window's end to a value
# (cumulative metrics).
KIND_WINDOW = "window"
KIND_INDEX = "index"
KIND_PREFIX = "prefix"


@dataclass(frozen=True)
class WindowSpec:
    w: int = 10
    view: str = FIXED_PREFIX
    prefix_len: int = 50
    stages: int = 5

    def __post_init__(self) -> None:
        if self.w < 1:
            raise ValueError("window size must be >= 1")
        if self.view not in (FIXED_PREFIX, FULL_LIFE):
            raise ValueError(f"unknown view: {self.view!r}")
        if self.view == FIXED_PREFIX and self.prefix_len % self.w != 0:
            raise ValueError("prefix length must be a multiple of the window size")
        if self.stages < 1:
            raise ValueError("stage count must be >= 1")


@dataclass(frozen=True)
class WindowFunction:
    name: str
    kind: str
    fn: Callable

    def __post_init__(self) -> None:
        if self.kind not in (KIND_WINDOW, KIND_INDEX, KIND_PREFIX):
            raise ValueError(f"unknown window-function kind: {self.kind!r}")


@dataclass(frozen=True)
class WindowSeries:
    user_id: str
    values: tuple[float | None, ...]  # slot i-1 holds window i; None = missing


@dataclass(frozen=True)
class StageSeries:
    user_id: str
    values: tuple[float | None, ...]  # slot s-1 holds stage s


@dataclass(frozen=True)
class CurvePoint:
    group: str
    x: int
    mean: float
    stderr: float
    n: int


def windows(total_posts: int, w: int) -> list[tuple[int, int]]:
    """The ``floor(T/w)`` consecutive 1-based index ranges of length ``w``.
    Trailing remainder posts are not covered."""
    if total_posts < 0:
        raise ValueError("post count must be >= 0")
    if w < 1:
        raise ValueError("window size must be >= 1")
    n = total_posts // w
    return [(i * w + 1, (i + 1) * w) for i in range(n)]


def stages(n_windows: int, n_stages: int) -> list[int]:
    """Stage index (1-based) for each window: stage s gets the windows in
    (floor((s-1)N/S), floor(sN/S)], a balanced split with sizes differing by
    at most one."""
    if n_windows < 0:
        raise ValueError("window count must be >= 0")
    if n_stages < 1:
        raise ValueError("stage count must be >= 1")
    assignment = [0] * n_windows
    for s in range(1, n_stages + 1):
        lo = ((s - 1) * n_windows) // n_stages
        hi = (s * n_windows) // n_stages
        for i in range(lo, hi):
            assignment[i] = s
    return assignment


def eval_window_function(
    trajectory: UserTrajectory, func: WindowFunction, spec: WindowSpec
) -> WindowSeries:
    events = trajectory.events
    if spec.view == FIXED_PREFIX:
        events = events[: spec.prefix_len]
    values: list[float | None] = []
    for start, end in windows(len(events), spec.w):
        chunk = events[start - 1 : end]
        if func.kind == KIND_WINDOW:
            values.append(func.fn(chunk))
        elif func.kind == KIND_PREFIX:
            values.append(func.fn(events[:end]))
        else:
            defined = [v for v in (func.fn(e) for e in chunk) if v is not None]
            values.append(sum(defined) / len(defined) if defined else None)
    return WindowSeries(trajectory.user_id, tuple(values))


def eval_stage_view(series: WindowSeries, n_stages: int) -> StageSeries:
    assignment = stages(len(series.values), n_stages)
    buckets: list[list[float]] = [[] for _ in range(n_stages)]
    for value, stage in zip(series.values, assignment):
        if value is not None:
            buckets[stage - 1].append(value)
    means = tuple(sum(b) / len(b) if b else None for b in buckets)
    return StageSeries(series.user_id, means)


def population_curve(
    series_by_user: Mapping[str, WindowSeries | StageSeries],
    group_of: Mapping[str, str | None],
) -> list[CurvePoint]:
    """Per-group mean and standard error (sample stddev / sqrt(n)) at each x.
    Users mapped to ``None`` are excluded; missing values do not contribute.
    By convention a single contributing user yields standard error 0."""
    samples: dict[tuple[str, int], list[float]] = {}
    for user in sorted(series_by_user):
        group = group_of.get(user)
        if group is None:
            continue
        for i, value in enumerate(series_by_user[user].values, start=1):
            if value is not None:
                samples.setdefault((group, i), []).append(value)
    points = []
    for (group, x), vals in sorted(samples.items()):
        n = len(vals)
        mean = sum(vals) / n
        if n > 1:
            var = sum((v - mean) ** 2 for v in vals) / (n - 1)
            stderr = math.sqrt(var) / math.sqrt(n)
        else:
            stderr = 0.0
        points.append(CurvePoint(group, x, mean, stderr, n))
    return points


def series_to_rows(
    series: WindowSeries | StageSeries, metric: str
) -> list[tuple[str, str, int, str, float | None, int]]:
    """Rows in the series CSV schema: user, x_kind, x, metric, value, missing_flag."""
    x_kind = "window" if isinstance(series, WindowSeries) else "stage"
    rows = []
    for i, value in enumerate(series.values, start=1):
        rows.append((series.user_id, x_kind, i, metric, value, int(value is None)))
    return rows
