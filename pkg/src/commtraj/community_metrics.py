"""Community-choice metrics: per-window diversity and switching measures,
cumulative exploration counts, apparent community size, and poster-overlap
dissimilarity."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

from .framework import KIND_INDEX, KIND_PREFIX, KIND_WINDOW, WindowFunction
from .ingest import CommunityMonthStats, CommunityUserIndex, PostEvent, UserTrajectory

DISSIM_MIN_POSTS = 1000

METRIC_UNIQUE = "uniq"
METRIC_CUMNEW = "cumnew"
METRIC_JUMPS = "jumps"
METRIC_ENTROPY = "entropy"
METRIC_GINI = "gini"
METRIC_LOGSIZE = "logsize"
METRIC_DISSIM = "dissim"


def unique_communities(events: Sequence[PostEvent]) -> int:
    return len({e.community_id for e in events})


def jumps(events: Sequence[PostEvent]) -> int:
    """Adjacent same-window pairs posted to different communities."""
    return sum(
        1 for a, b in zip(events, events[1:]) if a.community_id != b.community_id
    )


def community_distribution(events: Sequence[PostEvent]) -> dict[str, float]:
    if not events:
        raise ValueError("empty window has no community distribution")
    counts: dict[str, int] = {}
    for e in events:
        counts[e.community_id] = counts.get(e.community_id, 0) + 1
    total = len(events)
    return {c: n / total for c, n in counts.items()}


def entropy(distribution: Mapping[str, float]) -> float:
    return -sum(p * math.log2(p) for p in distribution.values() if p > 0)


def gini_simpson(distribution: Mapping[str, float]) -> float:
    return 1.0 - sum(p * p for p in distribution.values())


def cumulative_new_communities(trajectory: UserTrajectory, x: int) -> int:
    """Distinct communities among the user's temporally first ``x`` posts."""
    if not 1 <= x <= trajectory.T:
        raise ValueError(f"x must be in [1, {trajectory.T}]")
    return len({e.community_id for e in trajectory.events[:x]})


def cumulative_new_communities_percent(trajectory: UserTrajectory, pct: float) -> int:
    """Percent variant: the first ceil(pct * T / 100) posts."""
    if not 0 < pct <= 100:
        raise ValueError("pct must be in (0, 100]")
    x = math.ceil(pct * trajectory.T / 100)
    return cumulative_new_communities(trajectory, x)


def apparent_size(
    event: PostEvent,
    month_stats: Mapping[tuple[str, tuple[int, int]], CommunityMonthStats],
) -> float:
    """log2 of the community's post count in the post's calendar month.
    The stats entry always exists because the post itself is counted."""
    stats = month_stats[(event.community_id, event.month())]
    return math.log2(stats.post_count)


def community_dissimilarity(
    c1: str,
    c2: str,
    user_index: Mapping[str, CommunityUserIndex],
    min_posts: int = DISSIM_MIN_POSTS,
) -> float | None:
    """1 minus the Jaccard overlap of the two eventual poster sets. Pairs with
    an ineligible side (under ``min_posts`` lifetime posts) are inapplicable
    and reported as None rather than 0 or 1."""
    a = user_index.get(c1)
    b = user_index.get(c2)
    if a is None or b is None or a.total_posts < min_posts or b.total_posts < min_posts:
        return None
    inter = len(a.posters & b.posters)
    union = len(a.posters | b.posters)
    return 1.0 - inter / union


def window_dissimilarity(
    events: Sequence[PostEvent],
    user_index: Mapping[str, CommunityUserIndex],
    min_posts: int = DISSIM_MIN_POSTS,
) -> float | None:
    """Mean pairwise dissimilarity over the distinct communities visited in
    the window; missing with fewer than two eligible distinct communities."""
    communities = sorted({e.community_id for e in events})
    eligible = [
        c
        for c in communities
        if c in user_index and user_index[c].total_posts >= min_posts
    ]
    if len(eligible) < 2:
        return None
    values = []
    for i in range(len(eligible)):
        for j in range(i + 1, len(eligible)):
            d = community_dissimilarity(eligible[i], eligible[j], user_index, min_posts)
            values.append(d)
    return sum(values) / len(values)


def subinfo_window_functions(
    month_stats: Mapping[tuple[str, tuple[int, int]], CommunityMonthStats],
    user_index: Mapping[str, CommunityUserIndex] | None = None,
    dissim_min_posts: int = DISSIM_MIN_POSTS,
    include_dissim: bool = True,
) -> list[WindowFunction]:
    """The community-choice metric family as window functions."""
    funcs = [
        WindowFunction(METRIC_UNIQUE, KIND_WINDOW, lambda ev: float(unique_communities(ev))),
        WindowFunction(METRIC_JUMPS, KIND_WINDOW, lambda ev: float(jumps(ev))),
        WindowFunction(
            METRIC_ENTROPY, KIND_WINDOW, lambda ev: entropy(community_distribution(ev))
        ),
        WindowFunction(
            METRIC_GINI, KIND_WINDOW, lambda ev: gini_simpson(community_distribution(ev))
        ),
        WindowFunction(
            METRIC_LOGSIZE, KIND_INDEX, lambda e: apparent_size(e, month_stats)
        ),
        WindowFunction(
            METRIC_CUMNEW,
            KIND_PREFIX,
            lambda prefix: float(len({e.community_id for e in prefix})),
        ),
    ]
    if include_dissim and user_index is not None:
        funcs.append(
            WindowFunction(
                METRIC_DISSIM,
                KIND_WINDOW,
                lambda ev: window_dissimilarity(ev, user_index, dissim_min_posts),
            )
        )
    return funcs
