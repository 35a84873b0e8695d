"""Future-activity labels: departing/staying status relative to a
start-of-future instant, and activity quartiles over post counts beyond the
initial prefix."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Mapping

from .ingest import UserTrajectory

STATUS_DEPARTING = "departing"
STATUS_STAYING = "staying"
STATUS_NEITHER = "neither"
STATUS_INELIGIBLE = "ineligible"  # fewer than prefix_len posts before SOF

HALVES_CALENDAR = "calendar"
HALVES_DAYS91 = "days91"

# Default start-of-future: six months before January 2014.
DEFAULT_SOF = int(datetime(2013, 7, 1, tzinfo=timezone.utc).timestamp())


def add_months(ts: int, months: int) -> int:
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    total = dt.year * 12 + (dt.month - 1) + months
    year, month = divmod(total, 12)
    return int(dt.replace(year=year, month=month + 1).timestamp())


@dataclass(frozen=True)
class LabelConfig:
    sof: int = DEFAULT_SOF  # epoch seconds, UTC
    prefix_len: int = 50
    halves: str = HALVES_CALENDAR  # how the 6-month horizon splits in two
    quartile_scope: str = "all"  # "all" 50+ posters or only "classified" ones

    def horizon_bounds(self) -> tuple[int, int, int]:
        """(start, midpoint, end) of the two future observation halves."""
        if self.halves == HALVES_CALENDAR:
            return self.sof, add_months(self.sof, 3), add_months(self.sof, 6)
        if self.halves == HALVES_DAYS91:
            day = 86400
            return self.sof, self.sof + 91 * day, self.sof + 182 * day
        raise ValueError(f"unknown halves mode: {self.halves!r}")


@dataclass(frozen=True)
class UserLabel:
    user_id: str
    status: str
    quartile: int | None
    future_post_count: int


def departing_status(trajectory: UserTrajectory, config: LabelConfig) -> str | None:
    """Departing users stopped posting before SOF; staying users post at least
    once in each 3-month half of the horizon. Users hitting neither pattern are
    'neither'. Returns None for users with fewer than prefix_len posts before
    SOF (ineligible for the classification task)."""
    start, mid, end = config.horizon_bounds()
    before = sum(1 for e in trajectory.events if e.timestamp < start)
    if before < config.prefix_len:
        return None
    last = trajectory.events[-1].timestamp
    if last < start:
        return STATUS_DEPARTING
    first_half = any(start <= e.timestamp < mid for e in trajectory.events)
    second_half = any(mid <= e.timestamp < end for e in trajectory.events)
    if first_half and second_half:
        return STATUS_STAYING
    return STATUS_NEITHER


def activity_quartile(future_counts: Mapping[str, int]) -> dict[str, int]:
    """Rank users by future post count (ties by user id) and cut into four
    buckets; any remainder goes to the lower quartiles. Quartile 4 is the most
    active."""
    users = sorted(future_counts, key=lambda u: (future_counts[u], u))
    n = len(users)
    base, rem = divmod(n, 4)
    sizes = [base + (1 if q < rem else 0) for q in range(4)]
    out: dict[str, int] = {}
    i = 0
    for q, size in enumerate(sizes, start=1):
        for user in users[i : i + size]:
            out[user] = q
        i += size
    return out


def label_users(
    trajectories: Mapping[str, UserTrajectory], config: LabelConfig
) -> dict[str, UserLabel]:
    """Labels for every user with at least prefix_len posts overall."""
    eligible = {
        u: t for u, t in trajectories.items() if t.T >= config.prefix_len
    }
    statuses = {}
    for user, traj in eligible.items():
        s = departing_status(traj, config)
        statuses[user] = STATUS_INELIGIBLE if s is None else s
    if config.quartile_scope == "classified":
        scope = {
            u
            for u, s in statuses.items()
            if s in (STATUS_DEPARTING, STATUS_STAYING)
        }
    else:
        scope = set(eligible)
    future = {u: eligible[u].T - config.prefix_len for u in scope}
    quartiles = activity_quartile(future) if future else {}
    return {
        u: UserLabel(
            u,
            statuses[u],
            quartiles.get(u),
            eligible[u].T - config.prefix_len,
        )
        for u in sorted(eligible)
    }
