"""Event-log ingestion: parse the events-v1 format, validate records, and build
the per-user / per-community indices everything downstream runs on."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import IO, Iterable, Mapping, Sequence

EVENTS_V1 = "events-v1"

_RECORD_KEYS = ("user", "ts", "community", "tokens", "pos", "feedback")


class IngestError(ValueError):
    """Fatal ingestion failure (unknown format, strict-mode violation)."""


@dataclass(frozen=True)
class Diagnostic:
    line_no: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line_no}: {self.message}"


@dataclass(frozen=True)
class PostEvent:
    """One contribution: who, when, where, and (optionally) what and how it fared."""

    user_id: str
    timestamp: int  # epoch seconds, UTC
    community_id: str
    tokens: tuple[str, ...] | None = None
    pos_tags: tuple[str, ...] | None = None
    feedback: int | None = None
    seq: int = 0  # input-file order; breaks timestamp ties

    def month(self) -> tuple[int, int]:
        dt = datetime.fromtimestamp(self.timestamp, tz=timezone.utc)
        return (dt.year, dt.month)


@dataclass(frozen=True)
class UserTrajectory:
    user_id: str
    events: tuple[PostEvent, ...]  # ascending (timestamp, input order)

    @property
    def T(self) -> int:
        return len(self.events)


@dataclass
class CommunityMonthStats:
    community_id: str
    month: tuple[int, int]
    post_count: int = 0
    token_counts: Counter | None = None
    total_tokens: int = 0
    pos_tag_counts: Counter | None = None
    total_pos_tags: int = 0
    feedback_values: list[int] | None = None  # sorted ascending once built


@dataclass
class CommunityUserIndex:
    community_id: str
    posters: set[str] = field(default_factory=set)
    total_posts: int = 0


def parse_timestamp(value: object) -> int:
    """Accept integer epoch seconds or an ISO-8601 string (naive means UTC)."""
    if isinstance(value, bool):
        raise ValueError(f"bad timestamp: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if value != int(value):
            raise ValueError(f"non-integral timestamp: {value!r}")
        return int(value)
    if isinstance(value, str):
        s = value.strip()
        if s and (s.isdigit() or (s[0] in "+-" and s[1:].isdigit())):
            return int(s)
        if s.endswith("Z"):
            s = s[:-1] + "+00:00"
        try:
            dt = datetime.fromisoformat(s)
        except ValueError as exc:
            raise ValueError(f"bad timestamp: {value!r}") from exc
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(dt.timestamp())
    raise ValueError(f"bad timestamp: {value!r}")


def _string_list(value: object, what: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise ValueError(f"{what} must be an array of strings")
    return tuple(value)


def _record_to_event(rec: dict, seq: int) -> PostEvent:
    for k in ("user", "ts", "community"):
        if k not in rec:
            raise ValueError(f"missing required field '{k}'")
    user = rec["user"]
    community = rec["community"]
    if not isinstance(user, str) or not user:
        raise ValueError("'user' must be a non-empty string")
    if not isinstance(community, str) or not community:
        raise ValueError("'community' must be a non-empty string")
    ts = parse_timestamp(rec["ts"])

    tokens = None
    if rec.get("tokens") is not None:
        tokens = _string_list(rec["tokens"], "'tokens'")
    pos_tags = None
    if rec.get("pos") is not None:
        pos_tags = _string_list(rec["pos"], "'pos'")
        if tokens is None:
            raise ValueError("'pos' given without 'tokens'")
        if len(pos_tags) != len(tokens):
            raise ValueError(
                f"'pos' length {len(pos_tags)} != 'tokens' length {len(tokens)}"
            )
    feedback = rec.get("feedback")
    if feedback is not None:
        if isinstance(feedback, bool) or not isinstance(feedback, int):
            raise ValueError("'feedback' must be an integer")
    return PostEvent(user, ts, community, tokens, pos_tags, feedback, seq)


def parse_events(
    stream: IO[str] | Iterable[str],
    fmt: str = EVENTS_V1,
    strict: bool = False,
) -> tuple[list[PostEvent], list[Diagnostic]]:
    """Parse line-delimited events. Malformed lines are skipped and reported in
    lenient mode, fatal in strict mode. Unknown format ids are always fatal."""
    if fmt != EVENTS_V1:
        raise IngestError(f"unknown input format: {fmt!r}")
    events: list[PostEvent] = []
    diagnostics: list[Diagnostic] = []
    for line_no, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            if not isinstance(rec, dict):
                raise ValueError("record is not an object")
            events.append(_record_to_event(rec, seq=len(events)))
        except ValueError as exc:
            if strict:
                raise IngestError(f"line {line_no}: {exc}") from exc
            diagnostics.append(Diagnostic(line_no, str(exc)))
    return events, diagnostics


def event_to_record(event: PostEvent) -> dict:
    rec: dict = {
        "user": event.user_id,
        "ts": event.timestamp,
        "community": event.community_id,
    }
    if event.tokens is not None:
        rec["tokens"] = list(event.tokens)
    if event.pos_tags is not None:
        rec["pos"] = list(event.pos_tags)
    if event.feedback is not None:
        rec["feedback"] = event.feedback
    return rec


def write_events(events: Iterable[PostEvent], fh: IO[str]) -> int:
    """Serialize events back to events-v1 (one JSON object per line)."""
    n = 0
    for event in events:
        fh.write(json.dumps(event_to_record(event), separators=(",", ":")) + "\n")
        n += 1
    return n


def filter_before(events: Sequence[PostEvent], cutoff_ts: int) -> list[PostEvent]:
    """Uniform cutoff: drop every event at or after ``cutoff_ts``."""
    return [e for e in events if e.timestamp < cutoff_ts]


def build_trajectories(events: Iterable[PostEvent]) -> dict[str, UserTrajectory]:
    by_user: dict[str, list[PostEvent]] = {}
    for e in events:
        by_user.setdefault(e.user_id, []).append(e)
    out: dict[str, UserTrajectory] = {}
    for user in sorted(by_user):
        ordered = sorted(by_user[user], key=lambda e: (e.timestamp, e.seq))
        out[user] = UserTrajectory(user, tuple(ordered))
    return out


def filter_min_posts(
    trajectories: Mapping[str, UserTrajectory], k: int = 50
) -> dict[str, UserTrajectory]:
    if k < 1:
        raise ValueError("k must be >= 1")
    return {u: t for u, t in trajectories.items() if t.T >= k}


def trajectories_to_events(trajectories: Mapping[str, UserTrajectory]) -> list[PostEvent]:
    out: list[PostEvent] = []
    for user in sorted(trajectories):
        out.extend(trajectories[user].events)
    return out


def _new_stats(community: str, month: tuple[int, int]) -> CommunityMonthStats:
    return CommunityMonthStats(community, month)


def _add_event_to_stats(stats: CommunityMonthStats, e: PostEvent) -> None:
    stats.post_count += 1
    if e.tokens is not None:
        if stats.token_counts is None:
            stats.token_counts = Counter()
        stats.token_counts.update(e.tokens)
        stats.total_tokens += len(e.tokens)
    if e.pos_tags is not None:
        if stats.pos_tag_counts is None:
            stats.pos_tag_counts = Counter()
        stats.pos_tag_counts.update(e.pos_tags)
        stats.total_pos_tags += len(e.pos_tags)
    if e.feedback is not None:
        if stats.feedback_values is None:
            stats.feedback_values = []
        stats.feedback_values.append(e.feedback)


def merge_month_stats(
    a: dict[tuple[str, tuple[int, int]], CommunityMonthStats],
    b: dict[tuple[str, tuple[int, int]], CommunityMonthStats],
) -> dict[tuple[str, tuple[int, int]], CommunityMonthStats]:
    """Order-independent merge of partial aggregates (all fields are counts/bags)."""
    for key, sb in b.items():
        sa = a.get(key)
        if sa is None:
            a[key] = sb
            continue
        sa.post_count += sb.post_count
        if sb.token_counts is not None:
            if sa.token_counts is None:
                sa.token_counts = Counter()
            sa.token_counts.update(sb.token_counts)
        sa.total_tokens += sb.total_tokens
        if sb.pos_tag_counts is not None:
            if sa.pos_tag_counts is None:
                sa.pos_tag_counts = Counter()
            sa.pos_tag_counts.update(sb.pos_tag_counts)
        sa.total_pos_tags += sb.total_pos_tags
        if sb.feedback_values is not None:
            if sa.feedback_values is None:
                sa.feedback_values = []
            sa.feedback_values.extend(sb.feedback_values)
    return a


def build_community_month_stats(
    events: Iterable[PostEvent],
) -> dict[tuple[str, tuple[int, int]], CommunityMonthStats]:
    stats: dict[tuple[str, tuple[int, int]], CommunityMonthStats] = {}
    for e in events:
        key = (e.community_id, e.month())
        s = stats.get(key)
        if s is None:
            s = stats[key] = _new_stats(e.community_id, e.month())
        _add_event_to_stats(s, e)
    for s in stats.values():
        if s.feedback_values is not None:
            s.feedback_values.sort()
    return stats


def build_community_user_index(
    events: Iterable[PostEvent],
) -> dict[str, CommunityUserIndex]:
    index: dict[str, CommunityUserIndex] = {}
    for e in events:
        idx = index.get(e.community_id)
        if idx is None:
            idx = index[e.community_id] = CommunityUserIndex(e.community_id)
        idx.posters.add(e.user_id)
        idx.total_posts += 1
    return index


def count_tokens(events: Iterable[PostEvent]) -> Counter:
    """Whole-dataset word frequencies (vocabulary source)."""
    counts: Counter = Counter()
    for e in events:
        if e.tokens is not None:
            counts.update(e.tokens)
    return counts


def count_pos_tags(events: Iterable[PostEvent]) -> Counter:
    counts: Counter = Counter()
    for e in events:
        if e.pos_tags is not None:
            counts.update(e.pos_tags)
    return counts
