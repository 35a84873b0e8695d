import pytest

from commtraj.framework import WindowSeries
from commtraj.labeling import UserLabel
from commtraj.report import (
    FULL_DATA_TARGETS,
    check_full_data_targets,
    group_assignments,
    population_curves,
)


def _series(values_by_user):
    return {u: WindowSeries(u, tuple(v)) for u, v in values_by_user.items()}


def test_group_assignments_cover_status_quartile_archetype():
    labels = {
        "u1": UserLabel("u1", "departing", 1, 0),
        "u2": UserLabel("u2", "staying", 4, 99),
        "u3": UserLabel("u3", "neither", 2, 5),
    }
    archetypes = {"u1": "leaver", "u2": "stayer"}
    schemes = group_assignments(["u1", "u2", "u3"], labels, archetypes)
    assert schemes["all"] == {"u1": "all", "u2": "all", "u3": "all"}
    assert schemes["status"]["u1"] == "status:departing"
    assert schemes["status"]["u3"] is None  # neither is not a curve group
    assert schemes["quartile"]["u2"] == "quartile:4"
    assert schemes["archetype"]["u3"] is None


def test_population_curves_rows_cover_all_groupings():
    series = {"m": _series({"u1": [1.0, 2.0], "u2": [3.0, None]})}
    labels = {
        "u1": UserLabel("u1", "departing", 1, 0),
        "u2": UserLabel("u2", "staying", 2, 10),
    }
    rows = population_curves(series, labels)
    groups = {r[0] for r in rows}
    assert {"all", "status:departing", "status:staying", "quartile:1", "quartile:2"} <= groups
    all_x1 = next(r for r in rows if r[0] == "all" and r[1] == 1)
    assert all_x1[3] == pytest.approx(2.0) and all_x1[5] == 2
    all_x2 = next(r for r in rows if r[0] == "all" and r[1] == 2)
    assert all_x2[5] == 1  # u2 missing at x=2


def test_full_data_targets_pass_when_exact():
    observed = {t.name: t.expected for t in FULL_DATA_TARGETS}
    results = check_full_data_targets(observed)
    assert all(verdict == "pass" for _, _, _, verdict in results)


def test_full_data_targets_fail_and_absent_cases():
    observed = {
        "departure_f1_all": 0.699 + 0.021,  # outside +/-0.02
        "style_accuracy_pos": 0.625 + 0.019,  # inside +/-2 points
    }
    results = {name: verdict for name, _, _, verdict in check_full_data_targets(observed)}
    assert results["departure_f1_all"] == "fail"
    assert results["style_accuracy_pos"] == "pass"
    assert results["departing_users"] == "absent"
