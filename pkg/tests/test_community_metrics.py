import math
import random

import pytest

import oracles
from commtraj.community_metrics import (
    apparent_size,
    community_dissimilarity,
    community_distribution,
    cumulative_new_communities,
    cumulative_new_communities_percent,
    entropy,
    gini_simpson,
    jumps,
    unique_communities,
    window_dissimilarity,
)
from commtraj.ingest import (
    CommunityUserIndex,
    UserTrajectory,
    build_community_month_stats,
)
from conftest import make_event

# The worked 50-post example trajectory (the first-time communities are the
# 15 distinct names).
EXAMPLE_50 = (
    "skyrim aww skyrim aww pics aww aww pics WTF aww pics WTF pokemontrades "
    "funny pokemontrades pics aww AskReddit pics pokemon fashion AskReddit aww "
    "Scotland fashion aww Scotland pics keto keto Fitness keto skyrim pokemon "
    "cats aww aww pokemon Scotland AskReddit fashion keto pokemon ketouk "
    "Scotland keto pics ketouk funny gamecollecting"
).split()


def _events(communities):
    return [make_event(ts=i, community=c, seq=i) for i, c in enumerate(communities)]


def _trajectory(communities):
    return UserTrajectory("u1", tuple(_events(communities)))


def test_unique_degenerate_and_max():
    assert unique_communities(_events(["a"] * 10)) == 1
    assert unique_communities(_events([f"c{i}" for i in range(10)])) == 10


def test_jumps_constant_and_alternating():
    assert jumps(_events(["a"] * 10)) == 0
    assert jumps(_events(["a", "b"] * 5)) == 9


def test_jumps_exclude_cross_window_adjacency():
    # windows are scored independently, so a boundary switch is not counted
    window1 = _events(["a", "a", "b"])
    window2 = _events(["c", "c", "c"])
    assert jumps(window1) + jumps(window2) == 1


def test_entropy_cases():
    assert entropy({"a": 1.0}) == 0.0
    assert entropy({"a": 0.5, "b": 0.5}) == pytest.approx(1.0)
    dist = community_distribution(_events(["a"] * 3 + ["b"] * 4 + ["c"] * 2 + ["d"]))
    assert entropy(dist) == pytest.approx(1.8464393446710154, abs=1e-9)


def test_gini_simpson_cases():
    assert gini_simpson({"a": 1.0}) == 0.0
    assert gini_simpson({"a": 0.5, "b": 0.5}) == pytest.approx(0.5)
    dist = community_distribution(_events(["a"] * 3 + ["b"] * 4 + ["c"] * 2 + ["d"]))
    assert gini_simpson(dist) == pytest.approx(0.70, abs=1e-12)


def test_cumulative_first_post_is_one():
    assert cumulative_new_communities(_trajectory(["a", "b", "a"]), 1) == 1


def test_cumulative_on_worked_example_counts_first_time_communities():
    traj = _trajectory(EXAMPLE_50)
    assert cumulative_new_communities(traj, 50) == 15


def test_cumulative_non_decreasing_and_bounded():
    rng = random.Random(0)
    traj = _trajectory([f"c{rng.randrange(7)}" for _ in range(60)])
    values = [cumulative_new_communities(traj, x) for x in range(1, 61)]
    assert values == sorted(values)
    for x, v in enumerate(values, start=1):
        assert v <= min(x, len({e.community_id for e in traj.events}))


def test_cumulative_percent_uses_ceiling():
    traj = _trajectory(["a", "b", "c", "d"])
    # 30% of 4 posts -> ceil(1.2) = 2 posts
    assert cumulative_new_communities_percent(traj, 30) == 2
    assert cumulative_new_communities_percent(traj, 100) == 4


def test_apparent_size_cases():
    events = [make_event(ts=i, community="c", seq=i) for i in range(1024)]
    stats = build_community_month_stats(events)
    assert apparent_size(events[0], stats) == pytest.approx(10.0)
    lone = make_event(user="u9", ts=10**9, community="lonely")
    stats2 = build_community_month_stats([lone])
    assert apparent_size(lone, stats2) == 0.0


def _index(posters_by_community, totals=None):
    out = {}
    for c, posters in posters_by_community.items():
        total = len(posters) if totals is None else totals[c]
        out[c] = CommunityUserIndex(c, set(posters), total)
    return out


def test_dissimilarity_identity_and_disjoint():
    index = _index({"a": {"u1", "u2"}, "b": {"u1", "u2"}, "c": {"u3"}}, {"a": 2000, "b": 2000, "c": 2000})
    assert community_dissimilarity("a", "b", index) == 0.0
    assert community_dissimilarity("a", "c", index) == 1.0


def test_dissimilarity_worked_example():
    index = _index({"a": {"u1", "u2"}, "b": {"u2", "u3"}}, {"a": 1500, "b": 1500})
    assert community_dissimilarity("a", "b", index) == pytest.approx(2 / 3, abs=1e-12)


def test_dissimilarity_ineligible_pair_is_inapplicable():
    index = _index({"a": {"u1"}, "b": {"u2"}}, {"a": 999, "b": 5000})
    assert community_dissimilarity("a", "b", index) is None


def test_window_dissimilarity_single_community_missing():
    index = _index({"a": {"u1"}}, {"a": 5000})
    assert window_dissimilarity(_events(["a"] * 10), index) is None


def test_window_dissimilarity_single_pair():
    index = _index({"x": {"u1", "u2"}, "y": {"u2", "u3", "u4"}}, {"x": 1500, "y": 1500})
    expected = community_dissimilarity("x", "y", index)
    got = window_dissimilarity(_events(["x", "y", "x"]), index)
    assert got == pytest.approx(expected)


def test_window_dissimilarity_matches_pair_enumeration():
    rng = random.Random(5)
    posters = {
        f"c{i}": {f"u{rng.randrange(40)}" for _ in range(rng.randrange(3, 25))}
        for i in range(6)
    }
    totals = {c: rng.choice([500, 1500, 3000]) for c in posters}
    index = _index(posters, totals)
    for _ in range(50):
        events = _events([f"c{rng.randrange(6)}" for _ in range(10)])
        got = window_dissimilarity(events, index, min_posts=1000)
        expected = oracles.window_dissim(events, posters, totals, 1000)
        if expected is None:
            assert got is None
        else:
            assert got == pytest.approx(expected, abs=1e-12)


def test_window_dissimilarity_invariant_under_permutation():
    rng = random.Random(6)
    posters = {f"c{i}": {f"u{j}" for j in range(i + 2)} for i in range(4)}
    index = _index(posters, {c: 2000 for c in posters})
    events = _events([f"c{rng.randrange(4)}" for _ in range(10)])
    base = window_dissimilarity(events, index)
    for _ in range(5):
        shuffled = events[:]
        rng.shuffle(shuffled)
        assert window_dissimilarity(shuffled, index) == pytest.approx(base)


def test_structural_relations_between_metrics():
    rng = random.Random(7)
    for _ in range(300):
        w = 10
        events = _events([f"c{rng.randrange(1, 11)}" for _ in range(w)])
        uniq = unique_communities(events)
        j = jumps(events)
        dist = community_distribution(events)
        h = entropy(dist)
        g = gini_simpson(dist)
        assert uniq - 1 <= j <= w - 1
        assert -1e-12 <= h <= math.log2(uniq) + 1e-12
        assert -1e-12 <= g <= 1 - 1 / uniq + 1e-12
        assert (g == 0) == (h == 0) == (uniq == 1)
