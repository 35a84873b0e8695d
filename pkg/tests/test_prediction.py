import random

import numpy as np
import pytest

import oracles
from commtraj import prediction as pred
from commtraj.ingest import build_trajectories
from commtraj.labeling import UserLabel
from conftest import make_event

DAY = 86400


def _events_for_user(user, n=60, seed=0, communities=4, feedback=True, tokens=True):
    rng = random.Random(f"{seed}:{user}")
    events = []
    ts = rng.randrange(10**6)
    for i in range(n):
        toks = (
            [f"w{rng.randrange(10)}" for _ in range(rng.randrange(2, 8))]
            if tokens
            else None
        )
        events.append(
            make_event(
                user=user,
                ts=ts,
                community=f"c{rng.randrange(communities)}",
                tokens=toks,
                pos=[f"t{len(t)}" for t in toks] if toks else None,
                feedback=rng.randrange(-3, 9) if feedback else None,
                seq=i,
            )
        )
        ts += rng.randrange(DAY // 2, 3 * DAY)
    return events


def _context(events, **kw):
    cfg = pred.FeatureConfig(**kw)
    return cfg, pred.build_feature_context(events, cfg)


def _small_dataset(n_users=8, **kw):
    import dataclasses

    events = []
    for i in range(n_users):
        events.extend(_events_for_user(f"u{i}", seed=1, **kw))
    events = [dataclasses.replace(e, seq=s) for s, e in enumerate(events)]
    return events, build_trajectories(events)


def test_subinfo_family_has_38_entries_at_x50():
    events, trajectories = _small_dataset()
    cfg, ctx = _context(events, families=(pred.FAMILY_SUBINFO,))
    vector = pred.extract_features(trajectories["u0"].events[:50], ctx, cfg, "first", 50)
    # 5 series x 5 windows + 5 x (argmax, argmin) + 3 whole-range values
    assert len(vector) == 38
    assert {n.split(".")[1] for n in vector} == {"uniq", "jumps", "entropy", "gini", "logsize"}
    assert sum(n.endswith(".all") for n in vector) == 3


def test_argmax_tie_takes_smallest_window_index():
    assert pred._argminmax((2.0, 1.0, 2.0)) == (1.0, 2.0)
    assert pred._argminmax((None, None)) == (None, None)
    assert pred._argminmax((None, 3.0)) == (2.0, 2.0)


def test_first_and_last_ranges_select_expected_posts():
    events, trajectories = _small_dataset()
    cfg, ctx = _context(events, families=(pred.FAMILY_TIMEGAP,))
    prefix = trajectories["u0"].events[:50]
    first = pred.extract_features(prefix, ctx, cfg, "first", 10)
    last = pred.extract_features(prefix, ctx, cfg, "last", 10)
    gaps_first = [
        (b.timestamp - a.timestamp) / DAY for a, b in zip(prefix[:10], prefix[1:10])
    ]
    gaps_last = [
        (b.timestamp - a.timestamp) / DAY for a, b in zip(prefix[-10:], prefix[-9:])
    ]
    assert first["timegap.gap.w1"] == pytest.approx(sum(gaps_first) / 9)
    assert last["timegap.gap.w1"] == pytest.approx(sum(gaps_last) / 9)
    assert first["timegap.gap.mean"] == pytest.approx(sum(gaps_first) / 9)


def test_identical_windows_make_first_and_last_agree():
    # all posts in one calendar month so month-dependent metrics agree too
    events = []
    for i in range(50):
        events.append(
            make_event(
                user="u",
                ts=i * (DAY // 2),
                community=f"c{i % 2}",
                tokens=["i", "am", "here"],
                feedback=3,
                seq=i,
            )
        )
    trajectories = build_trajectories(events)
    cfg, ctx = _context(events)
    prefix = trajectories["u"].events
    first = pred.extract_features(prefix, ctx, cfg, "first", 10)
    last = pred.extract_features(prefix, ctx, cfg, "last", 10)
    for name, value in first.items():
        if value is None:
            assert last[name] is None
        else:
            assert last[name] == pytest.approx(value)


def test_missing_feedback_drops_family():
    events, trajectories = _small_dataset(feedback=False)
    cfg, ctx = _context(events)
    assert pred.FAMILY_FEEDBACK not in pred.available_families(ctx, cfg)
    vector = pred.extract_features(trajectories["u0"].events[:50], ctx, cfg)
    assert not any(n.startswith("feedback.") for n in vector)


def test_missing_tokens_drop_lang_family():
    events, trajectories = _small_dataset(tokens=False)
    cfg, ctx = _context(events)
    families = pred.available_families(ctx, cfg)
    assert pred.FAMILY_LANG not in families
    assert pred.FAMILY_TIMEGAP in families


def test_feature_names_are_stable_across_users():
    events, trajectories = _small_dataset()
    cfg, ctx = _context(events)
    users = sorted(trajectories)
    matrix = pred.build_feature_matrix(trajectories, users, ctx, cfg)
    assert matrix.users == tuple(users)
    vector = pred.extract_features(trajectories[users[-1]].events[:50], ctx, cfg)
    assert matrix.names == tuple(vector)


def test_impute_columns_uses_train_mean_and_flags():
    train = np.array([[1.0, np.nan], [3.0, np.nan]])
    test = np.array([[np.nan, 5.0]])
    train_f, test_f = pred.impute_columns(train, test)
    assert train_f.shape == (2, 4)
    assert test_f[0].tolist() == [2.0, 5.0, 1.0, 0.0]
    assert train_f[:, 1].tolist() == [0.0, 0.0]  # all-missing column imputes 0


def test_family_columns_split_and_all():
    names = ("timegap.gap.w1", "subinfo.uniq.w1", "lang.pronoun.w1")
    assert pred.family_columns(names, "all") == [0, 1, 2]
    assert pred.family_columns(names, "subinfo") == [1]
    with pytest.raises(ValueError):
        pred.family_columns(names, "nosuch")


def test_wilcoxon_mirrored_pairs_null():
    result = pred.wilcoxon_signed_rank([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert result.p == 1.0 and result.all_zero


def test_wilcoxon_one_sided_differences_significant():
    first = [float(i + 2) for i in range(10)]
    second = [float(i) for i in range(10)]
    result = pred.wilcoxon_signed_rank(first, second)
    assert result.p < 0.01
    exact = oracles.wilcoxon_exact_p([a - b for a, b in zip(first, second)])
    assert exact < 0.01


def test_wilcoxon_statistic_matches_enumeration_oracle():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randrange(2, 13)
        first = [rng.randrange(-6, 7) / 2 for _ in range(n)]
        second = [rng.randrange(-6, 7) / 2 for _ in range(n)]
        diffs = [a - b for a, b in zip(first, second)]
        if all(d == 0 for d in diffs):
            continue
        with np.errstate(all="ignore"):
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                result = pred.wilcoxon_signed_rank(first, second)
        assert result.statistic == pytest.approx(
            oracles.wilcoxon_statistic(diffs), abs=1e-12
        )


def test_wilcoxon_textbook_vector():
    # classic before/after example with ties in |d|
    before = [125, 115, 130, 140, 140, 115, 140, 125, 140, 135]
    after = [110, 122, 125, 120, 140, 124, 123, 137, 135, 145]
    diffs = [a - b for a, b in zip(before, after)]
    result = pred.wilcoxon_signed_rank(
        [float(v) for v in before], [float(v) for v in after]
    )
    assert result.n == 9  # one zero difference dropped
    assert result.statistic == pytest.approx(oracles.wilcoxon_statistic(diffs))


def _toy_prediction_dataset(n_users=60, seed=0):
    """Labeled cohort whose departing users have visibly lower window diversity."""
    rng = random.Random(seed)
    events = []
    labels = {}
    seq = 0
    for i in range(n_users):
        user = f"u{i:03d}"
        departing = i % 2 == 0
        communities = 2 if departing else 8
        ts = 0
        for k in range(55):
            events.append(
                make_event(
                    user=user,
                    ts=ts,
                    community=f"c{rng.randrange(communities)}",
                    tokens=["i", "like", f"w{rng.randrange(5)}"],
                    feedback=rng.randrange(-2, 6),
                    seq=seq,
                )
            )
            seq += 1
            ts += DAY
        labels[user] = UserLabel(
            user, "departing" if departing else "staying", 1 + i % 4, 5 + i
        )
    trajectories = build_trajectories(events)
    cfg = pred.PredictConfig(
        n_train=30,
        n_test=16,
        n_val=10,
        trials=3,
        seed=9,
        xs=(50,),
        ranges=(pred.RANGE_FIRST,),
        feature_sets=(pred.SET_ALL, pred.FAMILY_TIMEGAP),
        sweep_sets=(),
        tasks=(pred.TASK_DEPARTURE, pred.TASK_ACTIVITY),
    )
    ctx = pred.build_feature_context(events, cfg.features)
    dataset = pred.prepare_prediction_dataset(trajectories, labels, ctx, cfg)
    return dataset, cfg


def test_protocol_is_deterministic():
    dataset, cfg = _toy_prediction_dataset()
    first = pred.run_trial_protocol(dataset, cfg)
    second = pred.run_trial_protocol(dataset, cfg)
    assert first.rows == second.rows
    assert first.summary == second.summary


def test_protocol_emits_expected_cells_and_baselines():
    dataset, cfg = _toy_prediction_dataset()
    result = pred.run_trial_protocol(dataset, cfg)
    sets = {(r.task, r.feature_set) for r in result.rows}
    assert (pred.TASK_DEPARTURE, pred.BASELINE_POSITIVE) in sets
    assert (pred.TASK_ACTIVITY, pred.BASELINE_MEAN) in sets
    assert all(0.0 <= r.value <= 1.0 for r in result.rows if r.metric == "f1")
    assert all(r.value >= 0.0 for r in result.rows if r.metric == "rmse")
    f1 = result.values(pred.TASK_DEPARTURE, pred.SET_ALL, pred.RANGE_FIRST, 50)
    assert len(f1) == cfg.trials


def test_protocol_insufficient_users_is_fatal():
    dataset, cfg = _toy_prediction_dataset(n_users=20)
    with pytest.raises(ValueError, match="insufficient users"):
        pred.run_trial_protocol(dataset, cfg)


def test_activity_target_handles_zero():
    assert pred.activity_target(0) == 0.0
    assert pred.activity_target(8) == 3.0


def test_ablation_isolation_of_family_columns():
    # a family's columns are the same whether or not other families are built
    events, trajectories = _small_dataset()
    cfg_all, ctx = _context(events)
    cfg_sub, _ = _context(events, families=(pred.FAMILY_SUBINFO,))
    user = sorted(trajectories)[0]
    prefix = trajectories[user].events[:50]
    full = pred.extract_features(prefix, ctx, cfg_all)
    only = pred.extract_features(prefix, ctx, cfg_sub)
    subset = {n: v for n, v in full.items() if n.startswith("subinfo.")}
    assert subset == only
