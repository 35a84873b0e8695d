import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from commtraj import prediction as pred
from commtraj import synth
from commtraj.ingest import (
    build_community_month_stats,
    build_community_user_index,
    build_trajectories,
    filter_min_posts,
)
from commtraj.labeling import LabelConfig, label_users


def make_event(
    user="u1",
    ts=1262304000,  # 2010-01-01
    community="c",
    tokens=None,
    pos=None,
    feedback=None,
    seq=0,
):
    from commtraj.ingest import PostEvent

    return PostEvent(
        user,
        ts,
        community,
        None if tokens is None else tuple(tokens),
        None if pos is None else tuple(pos),
        feedback,
        seq,
    )


class Bundle:
    """Synthetic dataset plus every derived index the analyses need."""

    def __init__(self, preset, users, seed, min_posts=50, build_seconds=0.0):
        self.spec = synth.preset_spec(preset, users=users)
        t0 = time.time()
        self.events, self.truth = synth.generate(self.spec, seed)
        self.trajectories = filter_min_posts(build_trajectories(self.events), min_posts)
        self.month_stats = build_community_month_stats(self.events)
        self.user_index = build_community_user_index(self.events)
        self.archetype = {r.user_id: r.archetype.name for r in self.truth}
        self.build_seconds = build_seconds + (time.time() - t0)


@pytest.fixture(scope="session")
def oracle_bundle():
    return Bundle("oracle-mix", users=200, seed=11)


@pytest.fixture(scope="session")
def planted_bundle():
    """Two-archetype cohort with departure, exploration, language-adaptation,
    and feedback contrasts planted; shared by the end-to-end checks."""
    bundle = Bundle("two-archetype", users=2000, seed=23)
    t0 = time.time()
    bundle.labels = label_users(bundle.trajectories, LabelConfig())
    cfg = pred.PredictConfig(
        n_train=1200,
        n_test=400,
        n_val=300,
        trials=10,
        seed=5,
        xs=(50,),
        ranges=(pred.RANGE_FIRST,),
        feature_sets=(pred.SET_ALL, pred.FAMILY_TIMEGAP),
        sweep_sets=(),
        tasks=(pred.TASK_DEPARTURE,),
    )
    ctx = pred.build_feature_context(bundle.events, cfg.features, bundle.month_stats)
    bundle.predict_cfg = cfg
    bundle.feature_ctx = ctx
    bundle.dataset = pred.prepare_prediction_dataset(
        bundle.trajectories, bundle.labels, ctx, cfg
    )
    bundle.build_seconds += time.time() - t0
    return bundle
