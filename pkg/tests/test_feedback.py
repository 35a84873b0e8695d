import math
import random

import pytest

import oracles
from commtraj.feedback import (
    first_post_feedback_comparison,
    build_quantiles,
    month_quantiles,
    outperform,
    paired_t_test,
    single_multi_partition,
)
from commtraj.ingest import (
    UserTrajectory,
    build_community_month_stats,
    build_trajectories,
)
from conftest import make_event


def _stats_with_feedback(values):
    events = [make_event(ts=i, feedback=v, seq=i) for i, v in enumerate(values)]
    return build_community_month_stats(events)[("c", (1970, 1))]


def test_median_odd_count():
    q = month_quantiles(_stats_with_feedback([1, 3, 5, 7, 9]))
    assert q.median == 5.0


def test_median_even_count_midpoint_rule():
    q = month_quantiles(_stats_with_feedback([1, 3, 5, 7]))
    assert q.median == 4.0


def test_quantiles_match_sort_oracle():
    rng = random.Random(0)
    for _ in range(200):
        values = [rng.randrange(-10, 50) for _ in range(rng.randrange(1, 40))]
        q = month_quantiles(_stats_with_feedback(values))
        assert q.median == oracles.sorted_median(values)
        assert q.p75 == oracles.sorted_p75(values)
        assert q.median <= q.p75
        assert q.n == len(values)


def test_no_feedback_means_no_quantiles():
    stats = build_community_month_stats([make_event(ts=0)])[("c", (1970, 1))]
    assert month_quantiles(stats) is None


def test_outperform_is_strict():
    assert outperform(5, 5.0) == 0
    assert outperform(6, 5.0) == 1


def test_lone_post_never_outperforms_itself():
    stats = _stats_with_feedback([7])
    q = month_quantiles(stats)
    assert outperform(7, q.median) == 0


def test_outperform_invariant_under_monotone_transform():
    rng = random.Random(1)
    values = [rng.randrange(-5, 20) for _ in range(15)]
    q = month_quantiles(_stats_with_feedback(values))
    transformed = [v * 3 + 7 for v in values]
    qt = month_quantiles(_stats_with_feedback(transformed))
    for v, t in zip(values, transformed):
        assert outperform(v, q.median) == outperform(t, qt.median)


def test_strictly_above_median_fraction_at_most_half():
    rng = random.Random(2)
    for _ in range(100):
        values = [rng.randrange(100) for _ in range(rng.randrange(1, 30))]
        q = month_quantiles(_stats_with_feedback(values))
        frac = sum(outperform(v, q.median) for v in values) / len(values)
        assert frac <= 0.5


def test_single_multi_partition_cases():
    events = [
        make_event(ts=0, community="A", seq=0),
        make_event(ts=1, community="A", seq=1),
        make_event(ts=2, community="B", seq=2),
    ]
    traj = UserTrajectory("u1", tuple(events))
    assert single_multi_partition(traj) == (1, 1)
    mono = UserTrajectory("u1", tuple(make_event(ts=i, seq=i) for i in range(5)))
    assert single_multi_partition(mono) == (0, 1)


def test_single_multi_counts_sum_to_distinct_communities():
    rng = random.Random(3)
    for _ in range(50):
        events = [
            make_event(ts=i, community=f"c{rng.randrange(8)}", seq=i)
            for i in range(rng.randrange(1, 60))
        ]
        traj = UserTrajectory("u1", tuple(events))
        single, multi = single_multi_partition(traj)
        assert single + multi == len({e.community_id for e in events})


def test_paired_t_zero_variance_flag():
    result = paired_t_test([1.0, 1.0, 1.0])
    assert result.zero_variance and result.t == math.inf
    null = paired_t_test([0.0, 0.0])
    assert null.zero_variance and null.p == 1.0 and null.t == 0.0


def test_paired_t_symmetric_pair():
    result = paired_t_test([1.0, -1.0])
    assert result.t == 0.0 and result.p == pytest.approx(1.0)


def test_paired_t_matches_textbook_formula():
    diffs = [2.0, 1.0, 3.0, 2.5]
    result = paired_t_test(diffs)
    assert result.t == pytest.approx(oracles.t_statistic(diffs), abs=1e-12)
    assert result.t == pytest.approx(4.9770903720375195, abs=1e-12)


def test_paired_t_p_matches_numeric_integration():
    diffs = [2.0, 1.0, 3.0, 2.5, -0.5, 1.5]
    result = paired_t_test(diffs)
    expected = oracles.t_two_sided_p(oracles.t_statistic(diffs), len(diffs) - 1)
    assert result.p == pytest.approx(expected, abs=1e-6)


def _comparison_fixture(rows):
    """rows: list of (user, [(community, n_posts, first_feedback)])."""
    events = []
    seq = 0
    for user, specs in rows:
        t = 0
        for community, n_posts, first_fb in specs:
            for k in range(n_posts):
                events.append(
                    make_event(
                        user=user,
                        ts=t,
                        community=community,
                        feedback=first_fb if k == 0 else 0,
                        seq=seq,
                    )
                )
                seq += 1
                t += 1000
    trajectories = build_trajectories(events)
    quantiles = build_quantiles(build_community_month_stats(events))
    return trajectories, quantiles


def test_comparison_excludes_one_sided_users():
    trajectories, quantiles = _comparison_fixture(
        [
            ("multi_only", [("A", 2, 5), ("B", 3, 5)]),
            ("both", [("A", 1, 9), ("B", 2, 9)]),
            ("both2", [("A", 1, -9), ("B", 2, 9)]),
        ]
    )
    result = first_post_feedback_comparison(trajectories, quantiles)
    assert {r.user_id for r in result.rows} == {"both", "both2"}


def test_comparison_identical_pairs_gives_null_t():
    # every eligible first post sits below its community-month median, so both
    # sides come out 0 for every user
    trajectories, quantiles = _comparison_fixture(
        [
            ("u1", [("A", 1, 0), ("B", 2, 0)]),
            ("u2", [("A", 1, 0), ("B", 2, 0)]),
            ("u3", [("A", 1, 0), ("B", 2, 0)]),
        ]
    )
    result = first_post_feedback_comparison(trajectories, quantiles)
    diffs = [r.multi_mean - r.single_mean for r in result.rows]
    assert all(d == 0 for d in diffs)
    assert result.ttest.p == 1.0


def test_comparison_recovers_planted_direction():
    # Multi-post communities planted with clearly stronger first posts.
    rng = random.Random(4)
    rows = []
    for i in range(60):
        single_fb = rng.randrange(-6, 1)
        multi_fb = rng.randrange(6, 14)
        rows.append(
            (
                f"u{i:03d}",
                [
                    ("A", 1, single_fb),
                    ("B", 2 + rng.randrange(3), multi_fb),
                    ("C", 1, single_fb - 1),
                ],
            )
        )
    trajectories, quantiles = _comparison_fixture(rows)
    result = first_post_feedback_comparison(trajectories, quantiles)
    assert result.mean_multi > result.mean_single
    assert result.ttest.p < 0.01


def test_comparison_requires_two_users():
    trajectories, quantiles = _comparison_fixture([("solo", [("A", 1, 3), ("B", 2, 5)])])
    assert first_post_feedback_comparison(trajectories, quantiles) is None
