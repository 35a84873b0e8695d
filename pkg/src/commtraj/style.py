"""Cross-community style experiment: from two same-user post collections and
their non-content-word cross-entropies alone, recover which collection came
from which community."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import language as lang
from .ingest import PostEvent, UserTrajectory
from .linear import (
    apply_scaler,
    fit_scaler,
    predict_labels,
    train_linear_classifier,
)

POSTS_PER_SIDE = 25
CE_WINDOW = 5  # posts per averaged cross-entropy window


@dataclass(frozen=True)
class StyleTriple:
    user_id: str
    community_a: str
    community_b: str
    posts_a: tuple[PostEvent, ...]  # the user's temporally first posts in a
    posts_b: tuple[PostEvent, ...]
    orientation: int  # 1 iff posts_a is presented first


def _first_posts_by_community(
    trajectory: UserTrajectory, min_posts: int
) -> dict[str, list[PostEvent]]:
    posts: dict[str, list[PostEvent]] = {}
    for e in trajectory.events:
        posts.setdefault(e.community_id, []).append(e)
    return {c: p[:min_posts] for c, p in posts.items() if len(p) >= min_posts}


def build_triples(
    trajectories: Mapping[str, UserTrajectory],
    posts_per_side: int = POSTS_PER_SIDE,
    seed: int = 0,
    max_pairs_per_user: int | None = None,
) -> list[StyleTriple]:
    """One triple per (user, unordered community pair) where the user has at
    least ``posts_per_side`` posts in both communities; presentation order is
    randomized under the seed. A per-user cap bounds the quadratic blow-up from
    very prolific users."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC0FFEE]))
    triples: list[StyleTriple] = []
    for user in sorted(trajectories):
        eligible = _first_posts_by_community(trajectories[user], posts_per_side)
        communities = sorted(eligible)
        pairs = [
            (a, b)
            for i, a in enumerate(communities)
            for b in communities[i + 1 :]
        ]
        if max_pairs_per_user is not None and len(pairs) > max_pairs_per_user:
            chosen = rng.choice(len(pairs), size=max_pairs_per_user, replace=False)
            pairs = [pairs[i] for i in sorted(chosen)]
        for a, b in pairs:
            triples.append(
                StyleTriple(
                    user,
                    a,
                    b,
                    tuple(eligible[a]),
                    tuple(eligible[b]),
                    int(rng.integers(2)),
                )
            )
    return triples


def build_same_community_triples(
    trajectories: Mapping[str, UserTrajectory],
    posts_per_side: int = POSTS_PER_SIDE,
    seed: int = 0,
) -> list[StyleTriple]:
    """Null-control triples: both sides drawn from the user's posts in a single
    community (first ``posts_per_side`` vs the next), so no signal links sides
    to communities and accuracy should sit at chance."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x500C1A1]))
    triples: list[StyleTriple] = []
    for user in sorted(trajectories):
        posts: dict[str, list[PostEvent]] = {}
        for e in trajectories[user].events:
            posts.setdefault(e.community_id, []).append(e)
        for community in sorted(posts):
            p = posts[community]
            if len(p) < 2 * posts_per_side:
                continue
            triples.append(
                StyleTriple(
                    user,
                    community,
                    community,
                    tuple(p[:posts_per_side]),
                    tuple(p[posts_per_side : 2 * posts_per_side]),
                    int(rng.integers(2)),
                )
            )
    return triples


class OwnPostExcludingCache:
    """Model cache that removes the querying user's own contributions from
    each community-month corpus before building the model (the stricter
    reading of the origin-classification setup; sharing the corpus with the
    user is the default elsewhere)."""

    def __init__(self, month_stats, events, smoothed: bool = True) -> None:
        self._stats = month_stats
        self._smoothed = smoothed
        self._user_tokens: dict[tuple[str, str, tuple[int, int]], Counter] = {}
        self._user_tags: dict[tuple[str, str, tuple[int, int]], Counter] = {}
        for e in events:
            key = (e.user_id, e.community_id, e.month())
            if e.tokens is not None:
                self._user_tokens.setdefault(key, Counter()).update(e.tokens)
            if e.pos_tags is not None:
                self._user_tags.setdefault(key, Counter()).update(e.pos_tags)
        self._models: dict = {}

    @staticmethod
    def _minus(base: Counter | None, own: Counter | None) -> Counter:
        counts = Counter(base or ())
        if own:
            counts.subtract(own)
            counts = +counts  # drop zero and negative entries
        return counts

    def get(
        self, community: str, month: tuple[int, int], vocab: lang.Vocabulary, user: str
    ) -> lang.MonthlyLanguageModel | None:
        key = (community, month, vocab.vid, user)
        if key not in self._models:
            from commtraj.ingest import CommunityMonthStats

            stats = self._stats.get((community, month))
            model = None
            if stats is not None:
                tokens = self._minus(
                    stats.token_counts, self._user_tokens.get((user, community, month))
                )
                tags = self._minus(
                    stats.pos_tag_counts, self._user_tags.get((user, community, month))
                )
                reduced = CommunityMonthStats(
                    community_id=stats.community_id,
                    month=stats.month,
                    post_count=stats.post_count,
                    token_counts=tokens,
                    total_tokens=sum(tokens.values()),
                    pos_tag_counts=tags,
                    total_pos_tags=sum(tags.values()),
                )
                model = lang.monthly_lm(reduced, vocab, self._smoothed)
            self._models[key] = model
        return self._models[key]


def _model_for(lm_cache, community, month, vocab, user):
    if isinstance(lm_cache, OwnPostExcludingCache):
        return lm_cache.get(community, month, vocab, user)
    return lm_cache.get(community, month, vocab)


def style_features(
    triple: StyleTriple,
    lm_cache,
    vocab: lang.Vocabulary,
    window: int = CE_WINDOW,
) -> np.ndarray | None:
    """Per presented side, per window of posts, the average cross-entropy under
    each community's monthly (smoothed) language model. Every post is scored
    against the model of its own calendar month. None when a needed model is
    unavailable, in which case the triple is dropped."""
    sides = (triple.posts_a, triple.posts_b)
    if triple.orientation == 1:
        sides = (sides[1], sides[0])
    uses_pos = vocab.kind == "pos"
    values: list[float] = []
    for side in sides:
        n_windows = len(side) // window
        for i in range(n_windows):
            chunk = side[i * window : (i + 1) * window]
            for community in (triple.community_a, triple.community_b):
                ces = []
                for e in chunk:
                    tokens = e.pos_tags if uses_pos else e.tokens
                    if not tokens:
                        return None
                    model = _model_for(lm_cache, community, e.month(), vocab, triple.user_id)
                    if model is None:
                        return None
                    ces.append(lang.cross_entropy(tokens, model))
                values.append(sum(ces) / len(ces))
    return np.array(values)


@dataclass(frozen=True)
class StyleConfig:
    n_train: int = 1500  # includes the development carve-out
    n_test: int = 500
    dev_fraction: float = 0.25
    trials: int = 10
    seed: int = 0
    c_grid: tuple[float, ...] = (0.01, 0.1, 1.0, 10.0, 100.0)
    window: int = CE_WINDOW


@dataclass(frozen=True)
class StyleTrialRow:
    vocab_id: str
    trial: int
    accuracy: float


@dataclass(frozen=True)
class StyleSummaryRow:
    vocab_id: str
    mean: float
    stderr: float
    n_trials: int
    n_triples: int
    dropped: int


@dataclass(frozen=True)
class StyleResult:
    rows: tuple[StyleTrialRow, ...]
    summary: tuple[StyleSummaryRow, ...]

    def accuracies(self, vocab_id: str) -> list[float]:
        return [r.accuracy for r in self.rows if r.vocab_id == vocab_id]


def _check_orientations(triples: Sequence[StyleTriple]) -> None:
    bits = {t.orientation for t in triples}
    if bits != {0, 1}:
        raise ValueError(
            "triple orientations are constant: presentation order was not "
            "randomized, so a classifier could exploit ordering"
        )
    if len(triples) >= 100:
        share = sum(t.orientation for t in triples) / len(triples)
        if not 0.35 <= share <= 0.65:
            raise ValueError(
                f"triple orientations are badly imbalanced ({share:.3f}): "
                "presentation order does not look randomized"
            )


def run_style_experiment(
    triples: Sequence[StyleTriple],
    lm_cache: lang.LmCache,
    vocabularies: Sequence[lang.Vocabulary],
    cfg: StyleConfig,
) -> StyleResult:
    """Random-split trials of orientation recovery with logistic
    classification, one accuracy per (vocabulary, trial)."""
    _check_orientations(triples)
    rows: list[StyleTrialRow] = []
    summary: list[StyleSummaryRow] = []
    for v_idx, vocab in enumerate(vocabularies):
        feats: list[np.ndarray] = []
        labels: list[int] = []
        dropped = 0
        for t in triples:
            f = style_features(t, lm_cache, vocab, cfg.window)
            if f is None:
                dropped += 1
                continue
            feats.append(f)
            labels.append(t.orientation)
        n = len(feats)
        if n < cfg.n_train + cfg.n_test:
            raise ValueError(
                f"insufficient triples for vocabulary {vocab.vid!r}: need "
                f"{cfg.n_train + cfg.n_test}, have {n}"
            )
        X = np.vstack(feats)
        y = np.array(labels)
        accs = []
        for trial in range(cfg.trials):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, v_idx, trial]))
            perm = rng.permutation(n)
            test = perm[: cfg.n_test]
            train = perm[cfg.n_test : cfg.n_test + cfg.n_train]
            n_dev = max(1, int(len(train) * cfg.dev_fraction))
            dev, fit = train[:n_dev], train[n_dev:]
            scaler = fit_scaler(X[fit])
            best_c, best_acc = None, -1.0
            for c in cfg.c_grid:
                model = train_linear_classifier(
                    apply_scaler(scaler, X[fit]), y[fit], c=c, weighted=False
                )
                preds = predict_labels(model, apply_scaler(scaler, X[dev]))
                acc = float(np.mean(preds == y[dev]))
                if acc > best_acc:
                    best_c, best_acc = c, acc
            scaler = fit_scaler(X[train])
            model = train_linear_classifier(
                apply_scaler(scaler, X[train]), y[train], c=best_c, weighted=False
            )
            preds = predict_labels(model, apply_scaler(scaler, X[test]))
            acc = float(np.mean(preds == y[test]))
            accs.append(acc)
            rows.append(StyleTrialRow(vocab.vid, trial, acc))
        mean = sum(accs) / len(accs)
        if len(accs) > 1:
            var = sum((a - mean) ** 2 for a in accs) / (len(accs) - 1)
            stderr = math.sqrt(var / len(accs))
        else:
            stderr = 0.0
        summary.append(StyleSummaryRow(vocab.vid, mean, stderr, len(accs), n, dropped))
    return StyleResult(tuple(rows), tuple(summary))
