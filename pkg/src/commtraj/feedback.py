"""Feedback metrics: community-month vote quantiles, the outperform indicator,
and the single-post vs multi-post community analyses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from scipy import stats as scipy_stats

from .framework import KIND_INDEX, WindowFunction
from .ingest import CommunityMonthStats, PostEvent, UserTrajectory

METRIC_FB_MED = "fb_med"
METRIC_FB_P75 = "fb_p75"

SIDE_SINGLE = "single"
SIDE_MULTI = "multi"


@dataclass(frozen=True)
class MonthQuantiles:
    community_id: str
    month: tuple[int, int]
    median: float
    p75: float
    n: int


def month_quantiles(stats: CommunityMonthStats) -> MonthQuantiles | None:
    """Median via the midpoint rule; 75th percentile as the ceil(0.75 n)-th
    order statistic. None when the month has no feedback data."""
    values = stats.feedback_values
    if not values:
        return None
    n = len(values)
    if n % 2 == 1:
        median = float(values[n // 2])
    else:
        median = (values[n // 2 - 1] + values[n // 2]) / 2
    p75 = float(values[math.ceil(0.75 * n) - 1])
    return MonthQuantiles(stats.community_id, stats.month, median, p75, n)


def build_quantiles(
    month_stats: Mapping[tuple[str, tuple[int, int]], CommunityMonthStats],
) -> dict[tuple[str, tuple[int, int]], MonthQuantiles]:
    out = {}
    for key, stats in month_stats.items():
        q = month_quantiles(stats)
        if q is not None:
            out[key] = q
    return out


def outperform(feedback: int, threshold: float) -> int:
    """1 iff the post's feedback strictly exceeds the quantile value."""
    return int(feedback > threshold)


def feedback_window_functions(
    quantiles: Mapping[tuple[str, tuple[int, int]], MonthQuantiles],
) -> list[WindowFunction]:
    def against(which: str):
        def fn(e: PostEvent) -> float | None:
            if e.feedback is None:
                return None
            q = quantiles.get((e.community_id, e.month()))
            if q is None:
                return None
            threshold = q.median if which == "median" else q.p75
            return float(outperform(e.feedback, threshold))

        return fn

    return [
        WindowFunction(METRIC_FB_MED, KIND_INDEX, against("median")),
        WindowFunction(METRIC_FB_P75, KIND_INDEX, against("p75")),
    ]


def single_multi_partition(trajectory: UserTrajectory) -> tuple[int, int]:
    """Partition the user's distinct communities by lifetime post count:
    exactly one post vs two or more."""
    counts: dict[str, int] = {}
    for e in trajectory.events:
        counts[e.community_id] = counts.get(e.community_id, 0) + 1
    single = sum(1 for c in counts.values() if c == 1)
    return single, len(counts) - single


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    n: int
    zero_variance: bool


def paired_t_test(differences: Sequence[float]) -> TTestResult:
    """Classic paired t on the given differences; two-sided p from the t
    distribution with n-1 degrees of freedom. Zero-variance inputs are
    flagged: all-zero differences give p = 1 exactly, otherwise the direction
    is certain and p is reported as 0."""
    n = len(differences)
    if n < 2:
        raise ValueError("paired t-test needs at least 2 pairs")
    mean = sum(differences) / n
    var = sum((d - mean) ** 2 for d in differences) / (n - 1)
    if var == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, 1.0, n, True)
        return TTestResult(math.copysign(math.inf, mean), 0.0, n, True)
    t = mean / math.sqrt(var / n)
    p = 2.0 * float(scipy_stats.t.sf(abs(t), df=n - 1))
    return TTestResult(t, p, n, False)


@dataclass(frozen=True)
class FirstPostRow:
    user_id: str
    single_mean: float
    multi_mean: float


@dataclass(frozen=True)
class FirstPostComparison:
    rows: tuple[FirstPostRow, ...]
    mean_single: float
    mean_multi: float
    ttest: TTestResult  # on per-user (multi - single) differences


def first_post_feedback_comparison(
    trajectories: Mapping[str, UserTrajectory],
    quantiles: Mapping[tuple[str, tuple[int, int]], MonthQuantiles],
) -> FirstPostComparison | None:
    """Per user, the outperform-the-median rate of the temporally first post in
    single-post vs multi-post communities. Communities whose first post lacks
    feedback are ineligible; users without at least one eligible community on
    each side are excluded. None when fewer than two users remain."""
    rows: list[FirstPostRow] = []
    for user in sorted(trajectories):
        traj = trajectories[user]
        first_post: dict[str, PostEvent] = {}
        counts: dict[str, int] = {}
        for e in traj.events:
            if e.community_id not in first_post:
                first_post[e.community_id] = e
            counts[e.community_id] = counts.get(e.community_id, 0) + 1
        sides: dict[str, list[int]] = {SIDE_SINGLE: [], SIDE_MULTI: []}
        for community, e in first_post.items():
            if e.feedback is None:
                continue
            q = quantiles.get((e.community_id, e.month()))
            if q is None:
                continue
            side = SIDE_SINGLE if counts[community] == 1 else SIDE_MULTI
            sides[side].append(outperform(e.feedback, q.median))
        if not sides[SIDE_SINGLE] or not sides[SIDE_MULTI]:
            continue
        rows.append(
            FirstPostRow(
                user,
                sum(sides[SIDE_SINGLE]) / len(sides[SIDE_SINGLE]),
                sum(sides[SIDE_MULTI]) / len(sides[SIDE_MULTI]),
            )
        )
    if len(rows) < 2:
        return None
    diffs = [r.multi_mean - r.single_mean for r in rows]
    return FirstPostComparison(
        tuple(rows),
        sum(r.single_mean for r in rows) / len(rows),
        sum(r.multi_mean for r in rows) / len(rows),
        paired_t_test(diffs),
    )
