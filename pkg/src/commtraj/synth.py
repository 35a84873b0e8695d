"""Deterministic synthetic event-log generator. Archetypes plant the
behavioral contrasts the analyses are supposed to recover: community
exploration and size preference, language adaptation toward the community,
feedback propensity, return-on-positive-feedback, and departure."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from typing import IO, Sequence

import numpy as np

from .ingest import PostEvent

POS_TAGS = ("nn", "vb", "jj", "rb", "prp", "dt", "in", "cc", "vbd", "nns", "md", "uh")

_STOPWORDS = (
    "the", "i", "to", "a", "and", "me", "of", "my", "it", "is",
    "in", "that", "for", "you", "on", "this", "was", "with", "but", "have",
    "are", "not", "be", "at", "so", "we", "they", "all", "just", "like",
    "what", "out", "up", "or", "about", "one", "do", "can", "get", "if",
)
_PRONOUN_IDX = tuple(i for i, w in enumerate(_STOPWORDS) if w in ("i", "me", "my"))

STOP_WEIGHT = 0.70  # stopword share of every token distribution
LEAVER_STOP_MARGIN_DAYS = 45  # leavers fall silent this long before start-of-future


def _ts(year: int, month: int, day: int = 1) -> int:
    return int(datetime(year, month, day, tzinfo=timezone.utc).timestamp())


@dataclass(frozen=True)
class ArchetypeConfig:
    name: str
    exploration_rate: float  # P(a post after the first opens a new community)
    size_preference: float  # >0 tilts exploration toward high-volume communities
    concentration: float  # revisit weight exponent on per-community visit counts
    return_feedback_bias: float  # revisit weight coefficient on first-post feedback
    language_adaptation: float  # token mixing weight toward the community
    feedback_quality: float  # additive shift on vote-difference draws
    pronoun_factor: float  # multiplier on first-person mass in the user's own style
    mean_gap_days: float
    posts_min: int
    posts_max: int
    departs: bool  # stop before start-of-future vs post through the dataset end
    home_communities: int = 0  # >0: fixed home set, no exploration walk

    def __post_init__(self) -> None:
        if not 0.0 <= self.exploration_rate <= 1.0:
            raise ValueError("exploration rate must be in [0, 1]")
        if not 0.0 <= self.language_adaptation <= 1.0:
            raise ValueError("language adaptation must be in [0, 1]")
        if self.mean_gap_days <= 0:
            raise ValueError("mean gap must be positive")
        if not 1 <= self.posts_min <= self.posts_max:
            raise ValueError("bad post count range")


@dataclass(frozen=True)
class PopulationSpec:
    archetypes: tuple[tuple[ArchetypeConfig, int], ...]
    communities: int = 60
    volume_exponent: float = 1.0  # power-law tilt of community popularity
    stopword_shift: float = 0.0  # relative per-community stopword perturbation
    content_words: int = 8  # topical tokens per community
    user_words: int = 4  # personal tokens per user
    mean_post_len: int = 18
    start_lo: int = _ts(2010, 1)
    start_hi: int = _ts(2010, 9, 30)
    sof: int = _ts(2013, 7)
    end: int = _ts(2014, 1, 31)
    emit_tokens: bool = True
    emit_pos: bool = True
    emit_feedback: bool = True

    def __post_init__(self) -> None:
        if not self.archetypes or all(n <= 0 for _, n in self.archetypes):
            raise ValueError("population needs at least one archetype with users")
        if self.communities < 1:
            raise ValueError("population needs at least one community")

    def total_users(self) -> int:
        return sum(n for _, n in self.archetypes)


@dataclass(frozen=True)
class TruthRow:
    user_id: str
    archetype: ArchetypeConfig


def _pos_tag(token: str) -> str:
    return POS_TAGS[zlib.crc32(token.encode()) % len(POS_TAGS)]


class _World:
    """Community inventory shared by all users: popularity, per-community
    stopword perturbations, content tokens, and feedback baselines."""

    def __init__(self, spec: PopulationSpec, seed: int) -> None:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x1D]))
        m = spec.communities
        ranks = np.arange(1, m + 1, dtype=float)
        self.popularity = ranks ** (-spec.volume_exponent)
        self.popularity /= self.popularity.sum()
        self.names = [f"c{j:03d}" for j in range(m)]

        stop_base = 1.0 / np.arange(1, len(_STOPWORDS) + 1, dtype=float)
        stop_base /= stop_base.sum()
        self.stop_base = stop_base
        factors = 1.0 + spec.stopword_shift * rng.uniform(-1.0, 1.0, size=(m, len(_STOPWORDS)))
        shifted = stop_base[None, :] * factors
        self.stop_by_community = shifted / shifted.sum(axis=1, keepdims=True)

        self.content_tokens = [
            [f"c{j:03d}t{k}" for k in range(spec.content_words)] for j in range(m)
        ]
        # larger communities attract somewhat higher raw vote differences
        self.feedback_base = 3.0 * self.popularity / self.popularity[0]


def _user_stop_dist(world: _World, arch: ArchetypeConfig) -> np.ndarray:
    probs = world.stop_base.copy()
    for i in _PRONOUN_IDX:
        probs[i] *= arch.pronoun_factor
    return probs / probs.sum()


def _generate_user(
    spec: PopulationSpec,
    world: _World,
    arch: ArchetypeConfig,
    user_id: str,
    user_idx: int,
    seed: int,
) -> list[PostEvent]:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xE0, user_idx]))
    user_tokens = [f"u{user_idx:05d}x{k}" for k in range(spec.user_words)]
    user_stop = _user_stop_dist(world, arch)

    # per-community token sampler: cumulative distribution plus aligned label
    # and tag tables over [stopwords | community content | user tokens]
    sampler_cache: dict[int, tuple[list[float], list[str], list[str]]] = {}

    def sampler_for(cj: int) -> tuple[list[float], list[str], list[str]]:
        entry = sampler_cache.get(cj)
        if entry is None:
            a = arch.language_adaptation
            stop = STOP_WEIGHT * (a * world.stop_by_community[cj] + (1 - a) * user_stop)
            content = np.full(spec.content_words, a * (1 - STOP_WEIGHT) / spec.content_words)
            personal = np.full(spec.user_words, (1 - a) * (1 - STOP_WEIGHT) / spec.user_words)
            cum = np.cumsum(np.concatenate([stop, content, personal]))
            cum[-1] = 1.0
            labels = list(_STOPWORDS) + world.content_tokens[cj] + user_tokens
            tags = [_pos_tag(t) for t in labels]
            entry = (cum, labels, tags)
            sampler_cache[cj] = entry
        return entry

    def draw_feedback(cj: int) -> int:
        value = world.feedback_base[cj] + arch.feedback_quality + rng.laplace(0.0, 2.0)
        if rng.random() < 0.12:
            value += rng.geometric(0.08)  # occasional runaway hit
        return int(round(value))

    def pick_new_community(visited) -> int | None:
        candidates = [j for j in range(spec.communities) if j not in visited]
        if not candidates:
            return None
        weights = world.popularity[candidates] ** (1.0 + arch.size_preference)
        weights /= weights.sum()
        return candidates[int(np.searchsorted(np.cumsum(weights), rng.random()))]

    # revisit weights maintained incrementally with plain floats:
    # weight = visits^concentration * exp(bias * clipped first feedback)
    visited_order: list[int] = []
    revisit_weights: list[float] = []
    slot_of: dict[int, int] = {}
    fb_terms: dict[int, float] = {}
    visits: dict[int, int] = {}

    def note_visit(cj: int, feedback: int | None) -> None:
        if cj not in visits:
            fb = float(feedback) if feedback is not None else 0.0
            fb_terms[cj] = math.exp(
                arch.return_feedback_bias * min(max(fb, -4.0), 8.0)
            )
            visits[cj] = 1
            slot_of[cj] = len(visited_order)
            visited_order.append(cj)
            revisit_weights.append(fb_terms[cj])
        else:
            visits[cj] += 1
            revisit_weights[slot_of[cj]] = (
                visits[cj] ** arch.concentration * fb_terms[cj]
            )

    def pick_revisit() -> int:
        total = 0.0
        r = rng.random()
        threshold = r * sum(revisit_weights)
        for cj, w in zip(visited_order, revisit_weights):
            total += w
            if total >= threshold:
                return cj
        return visited_order[-1]

    target = int(rng.integers(arch.posts_min, arch.posts_max + 1))
    ts = float(rng.integers(spec.start_lo, spec.start_hi + 1))
    stop_before = spec.sof - LEAVER_STOP_MARGIN_DAYS * 86400 if arch.departs else None

    homes: list[int] = []
    if arch.home_communities > 0:
        while len(homes) < min(arch.home_communities, spec.communities):
            homes.append(pick_new_community(homes))

    events: list[PostEvent] = []
    while True:
        if arch.departs and len(events) >= target:
            break
        if stop_before is not None and ts >= stop_before:
            break
        if ts > spec.end:
            break
        if not arch.departs and len(events) >= 1000:
            break
        if homes:
            cj = homes[int(rng.integers(len(homes)))]
        elif not visits:
            cj = pick_new_community(())
        elif rng.random() < arch.exploration_rate:
            cj = pick_new_community(visits)
            if cj is None:
                cj = pick_revisit()
        else:
            cj = pick_revisit()

        tokens = pos = None
        if spec.emit_tokens:
            cum, labels, tags = sampler_for(cj)
            length = 1 + int(rng.poisson(max(1, spec.mean_post_len - 1)))
            idx = np.searchsorted(cum, rng.random(length), side="right").tolist()
            tokens = tuple(labels[i] for i in idx)
            if spec.emit_pos:
                pos = tuple(tags[i] for i in idx)
        feedback = draw_feedback(cj) if spec.emit_feedback else None
        events.append(
            PostEvent(user_id, int(ts), world.names[cj], tokens, pos, feedback)
        )
        note_visit(cj, feedback)
        ts += rng.exponential(arch.mean_gap_days * 86400.0)
    return events


def generate(
    spec: PopulationSpec, seed: int, threads: int = 1
) -> tuple[list[PostEvent], list[TruthRow]]:
    """Event log plus per-user ground truth, byte-reproducible under the seed
    at any thread count: every user draws from an independently derived seed
    and the output is stitched together in user-id order. Events come out
    grouped by user id and time-ordered within each user."""
    from .parallel import parallel_map

    world = _World(spec, seed)
    plan: list[tuple[ArchetypeConfig, str, int]] = []
    user_idx = 0
    for arch, count in spec.archetypes:
        for _ in range(count):
            plan.append((arch, f"u{user_idx:05d}", user_idx))
            user_idx += 1

    per_user = parallel_map(
        lambda job: _generate_user(spec, world, job[0], job[1], job[2], seed),
        plan,
        threads,
    )
    events: list[PostEvent] = []
    truth: list[TruthRow] = []
    for (arch, user_id, _), user_events in zip(plan, per_user):
        for e in user_events:
            events.append(
                PostEvent(
                    e.user_id,
                    e.timestamp,
                    e.community_id,
                    e.tokens,
                    e.pos_tags,
                    e.feedback,
                    seq=len(events),
                )
            )
        truth.append(TruthRow(user_id, arch))
    return events, truth


def write_truth_csv(truth: Sequence[TruthRow], fh: IO[str]) -> None:
    param_names = [f.name for f in fields(ArchetypeConfig) if f.name != "name"]
    fh.write("user,archetype," + ",".join(param_names) + "\n")
    for row in truth:
        values = [str(getattr(row.archetype, p)) for p in param_names]
        fh.write(f"{row.user_id},{row.archetype.name}," + ",".join(values) + "\n")


def _leaver(**overrides) -> ArchetypeConfig:
    base = dict(
        name="leaver",
        exploration_rate=0.15,
        size_preference=0.8,
        concentration=0.5,
        return_feedback_bias=0.3,
        language_adaptation=0.85,
        feedback_quality=-1.2,
        pronoun_factor=0.6,
        mean_gap_days=5.0,
        posts_min=55,
        posts_max=140,
        departs=True,
    )
    base.update(overrides)
    return ArchetypeConfig(**base)


def _stayer(**overrides) -> ArchetypeConfig:
    base = dict(
        name="stayer",
        exploration_rate=0.5,
        size_preference=-0.4,
        concentration=0.5,
        return_feedback_bias=0.3,
        language_adaptation=0.45,
        feedback_quality=1.2,
        pronoun_factor=1.5,
        mean_gap_days=5.0,
        posts_min=55,
        posts_max=140,
        departs=False,
    )
    base.update(overrides)
    return ArchetypeConfig(**base)


FAR_FUTURE = _ts(2099, 1)

PRESETS = ("two-archetype", "null", "style-shift", "oracle-mix")


def preset_spec(name: str, users: int = 2000, stopword_shift: float | None = None) -> PopulationSpec:
    """Canned populations for the verification experiments."""
    if name == "two-archetype":
        half = users // 2
        return PopulationSpec(
            archetypes=((_leaver(), half), (_stayer(), users - half)),
            communities=60,
            volume_exponent=1.1,
            stopword_shift=0.15 if stopword_shift is None else stopword_shift,
        )
    if name == "null":
        arch = ArchetypeConfig(
            name="uniform",
            exploration_rate=0.0,
            size_preference=0.0,
            concentration=0.5,
            return_feedback_bias=0.0,
            language_adaptation=0.5,
            feedback_quality=0.0,
            pronoun_factor=1.0,
            mean_gap_days=4.0,
            posts_min=60,
            posts_max=140,
            departs=True,
        )
        return PopulationSpec(
            archetypes=((arch, users),),
            communities=30,
            volume_exponent=1.0,
            stopword_shift=0.0 if stopword_shift is None else stopword_shift,
            sof=FAR_FUTURE,
            end=FAR_FUTURE,
        )
    if name == "style-shift":
        arch = ArchetypeConfig(
            name="two-home",
            exploration_rate=0.0,
            size_preference=0.0,
            concentration=0.0,
            return_feedback_bias=0.0,
            language_adaptation=0.9,
            feedback_quality=0.0,
            pronoun_factor=1.0,
            mean_gap_days=4.0,
            posts_min=70,
            posts_max=140,
            departs=True,
            home_communities=2,
        )
        return PopulationSpec(
            archetypes=((arch, users),),
            communities=24,
            volume_exponent=0.8,
            stopword_shift=0.2 if stopword_shift is None else stopword_shift,
            sof=FAR_FUTURE,
            end=FAR_FUTURE,
        )
    if name == "oracle-mix":
        explorer = _stayer(
            name="explorer",
            exploration_rate=0.45,
            posts_min=60,
            posts_max=200,
            departs=True,
        )
        homebody = _leaver(
            name="homebody",
            exploration_rate=0.1,
            posts_min=60,
            posts_max=200,
        )
        half = users // 2
        return PopulationSpec(
            archetypes=((explorer, half), (homebody, users - half)),
            communities=25,
            volume_exponent=1.0,
            stopword_shift=0.1 if stopword_shift is None else stopword_shift,
            sof=FAR_FUTURE,
            end=FAR_FUTURE,
        )
    raise ValueError(f"unknown preset: {name!r} (choose from {PRESETS})")
