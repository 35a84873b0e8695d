"""Report-ready aggregation: population curves per user group, and the
optional full-data reproduction targets with their tolerances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .framework import StageSeries, WindowSeries, population_curve
from .labeling import STATUS_DEPARTING, STATUS_STAYING, UserLabel

GROUP_ALL = "all"


def group_assignments(
    users: Sequence[str],
    labels: Mapping[str, UserLabel] | None = None,
    archetypes: Mapping[str, str] | None = None,
) -> dict[str, dict[str, str | None]]:
    """Grouping schemes for population curves: everyone, departure status,
    activity quartile, and (for synthetic data) planted archetype."""
    schemes: dict[str, dict[str, str | None]] = {
        "all": {u: GROUP_ALL for u in users}
    }
    if labels:
        schemes["status"] = {
            u: (
                f"status:{labels[u].status}"
                if u in labels and labels[u].status in (STATUS_DEPARTING, STATUS_STAYING)
                else None
            )
            for u in users
        }
        schemes["quartile"] = {
            u: (
                f"quartile:{labels[u].quartile}"
                if u in labels and labels[u].quartile is not None
                else None
            )
            for u in users
        }
    if archetypes:
        schemes["archetype"] = {
            u: (f"archetype:{archetypes[u]}" if u in archetypes else None)
            for u in users
        }
    return schemes


def population_curves(
    series_by_metric: Mapping[str, Mapping[str, WindowSeries | StageSeries]],
    labels: Mapping[str, UserLabel] | None = None,
    archetypes: Mapping[str, str] | None = None,
) -> list[tuple[str, int, str, float, float, int]]:
    """Rows (group, x, metric, mean, stderr, n) over every grouping scheme."""
    rows: list[tuple[str, int, str, float, float, int]] = []
    for metric in sorted(series_by_metric):
        series_map = series_by_metric[metric]
        users = sorted(series_map)
        for scheme_name, assignment in sorted(
            group_assignments(users, labels, archetypes).items()
        ):
            for point in population_curve(series_map, assignment):
                rows.append(
                    (point.group, point.x, metric, point.mean, point.stderr, point.n)
                )
    rows.sort(key=lambda r: (r[2], r[0], r[1]))
    return rows


@dataclass(frozen=True)
class Target:
    name: str
    expected: float
    tolerance: float  # absolute


# Headline numbers from the full 76.6M-post Reddit run; only reproducible with
# the released dataset, so they live behind an opt-in checker. Count targets
# are exact; means/medians compare at their printed precision.
FULL_DATA_TARGETS = (
    Target("retained_users_thousands", 157.0, 0.5),
    Target("mean_posts", 152.04, 0.005),
    Target("median_posts", 89.0, 0.5),
    Target("mean_communities", 28.85, 0.005),
    Target("median_communities", 26.0, 0.5),
    Target("mean_avg_gap_days", 10.47, 0.005),
    Target("departing_users", 43910.0, 0.0),
    Target("staying_users", 75708.0, 0.0),
    Target("departure_f1_all", 0.699, 0.02),
    Target("departure_f1_timegap", 0.591, 0.02),
    Target("style_accuracy_pos", 0.625, 0.02),
    Target("style_accuracy_top-100", 0.560, 0.02),
    Target("style_accuracy_top-500", 0.614, 0.02),
)


def check_full_data_targets(
    observed: Mapping[str, float],
) -> list[tuple[str, float, float | None, str]]:
    """Per target: (name, expected, observed-or-None, verdict)."""
    results = []
    for target in FULL_DATA_TARGETS:
        value = observed.get(target.name)
        if value is None:
            verdict = "absent"
        elif abs(value - target.expected) <= target.tolerance:
            verdict = "pass"
        else:
            verdict = "fail"
        results.append((target.name, target.expected, value, verdict))
    return results
