"""Multi-community trajectory analytics: windowed engagement metrics over
post-event logs, future-activity labeling and prediction, and cross-community
style classification, with a synthetic generator for verification."""

from .framework import WindowSpec, eval_stage_view, eval_window_function, stages, windows
from .ingest import (
    PostEvent,
    UserTrajectory,
    build_community_month_stats,
    build_community_user_index,
    build_trajectories,
    filter_min_posts,
    parse_events,
)
from .labeling import LabelConfig, label_users
from .language import Vocabulary, build_vocabulary, cross_entropy, monthly_lm
from .synth import PopulationSpec, generate, preset_spec

__version__ = "0.1.0"

__all__ = [
    "PostEvent",
    "UserTrajectory",
    "parse_events",
    "build_trajectories",
    "filter_min_posts",
    "build_community_month_stats",
    "build_community_user_index",
    "WindowSpec",
    "windows",
    "stages",
    "eval_window_function",
    "eval_stage_view",
    "Vocabulary",
    "build_vocabulary",
    "monthly_lm",
    "cross_entropy",
    "LabelConfig",
    "label_users",
    "PopulationSpec",
    "preset_spec",
    "generate",
    "__version__",
]
