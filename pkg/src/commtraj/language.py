"""Language metrics: restricted vocabularies with a rare-word sink token,
monthly per-community language models, cross-entropy, pronoun rate, and post
length."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterator, Mapping, Sequence

from .ingest import CommunityMonthStats

RARE_TOKEN = "<RARE>"

TOP_K_CHOICES = (100, 500, 1000, 5000, 10000)
FULL_MIN_COUNT = 100  # "full" keeps words appearing strictly more often than this

PRONOUNS_1SG = frozenset({"i", "me", "my", "mine", "myself"})


@dataclass(frozen=True)
class Vocabulary:
    vid: str  # e.g. "pos", "top-100", "full"
    kind: str  # "pos" | "top" | "full"
    ordered: tuple[str, ...]  # rank order where meaningful
    members: frozenset[str]

    def __post_init__(self) -> None:
        if RARE_TOKEN in self.members:
            raise ValueError(f"{RARE_TOKEN} cannot be a vocabulary member")

    def __len__(self) -> int:
        return len(self.members)


def build_vocabulary(
    kind: str,
    token_counts: Mapping[str, int] | None = None,
    tag_counts: Mapping[str, int] | None = None,
) -> Vocabulary:
    """Build a vocabulary of the given kind. ``kind`` is "pos", "full", or
    "top-K". Word kinds rank by whole-dataset frequency with ties broken
    lexicographically; "full" keeps words with count > 100."""
    if kind == "pos":
        if not tag_counts:
            raise ValueError("pos vocabulary requested but no pos tags were ingested")
        ordered = tuple(sorted(tag_counts))
        return Vocabulary("pos", "pos", ordered, frozenset(ordered))
    if not token_counts:
        raise ValueError(f"{kind!r} vocabulary requested but no tokens were ingested")
    if kind == "full":
        ordered = tuple(
            t
            for t in sorted(token_counts, key=lambda t: (-token_counts[t], t))
            if token_counts[t] > FULL_MIN_COUNT
        )
        return Vocabulary("full", "full", ordered, frozenset(ordered))
    if kind.startswith("top-"):
        try:
            k = int(kind[4:])
        except ValueError:
            raise ValueError(f"unknown vocabulary kind: {kind!r}") from None
        if k < 1:
            raise ValueError("top-k vocabulary needs k >= 1")
        ranked = sorted(token_counts, key=lambda t: (-token_counts[t], t))
        ordered = tuple(ranked[:k])
        return Vocabulary(kind, "top", ordered, frozenset(ordered))
    raise ValueError(f"unknown vocabulary kind: {kind!r}")


def map_rare(tokens: Sequence[str], vocab: Vocabulary) -> list[str]:
    members = vocab.members
    return [t if t in members else RARE_TOKEN for t in tokens]


def write_vocabulary(vocab: Vocabulary, fh: IO[str]) -> None:
    for token in vocab.ordered:
        fh.write(token + "\n")


@dataclass(frozen=True)
class MonthlyLanguageModel:
    """Distribution over V plus the rare token for one community-month.
    Probabilities are computed on demand from the corpus counts, so absent
    vocabulary entries cost nothing to represent."""

    community_id: str
    month: tuple[int, int]
    vocab: Vocabulary
    counts: Mapping[str, int]  # raw corpus counts (not rare-mapped)
    total: int
    rare_count: int  # corpus occurrences outside V
    smoothed: bool

    def prob(self, token: str) -> float:
        if token in self.vocab.members:
            c = self.counts.get(token, 0)
        else:
            c = self.rare_count
        if self.smoothed:
            pseudo = 1.0 / (len(self.vocab) + 1)
            return (c + pseudo) / (self.total + 1)
        return c / self.total

    def items(self) -> Iterator[tuple[str, float]]:
        """(token, probability) over V plus the rare token. Intended for dumps
        and checks; materializes one entry per vocabulary member."""
        for token in self.vocab.ordered:
            yield token, self.prob(token)
        yield RARE_TOKEN, self.prob(RARE_TOKEN)

    def entropy(self) -> float:
        return -sum(p * math.log2(p) for _, p in self.items() if p > 0)


def monthly_lm(
    stats: CommunityMonthStats, vocab: Vocabulary, smoothed: bool = False
) -> MonthlyLanguageModel | None:
    """Language model for one community-month, or None when that month has no
    usable corpus (dependent metrics then go missing)."""
    if vocab.kind == "pos":
        counts, total = stats.pos_tag_counts, stats.total_pos_tags
    else:
        counts, total = stats.token_counts, stats.total_tokens
    if not counts or total == 0:
        return None
    in_v = sum(c for t, c in counts.items() if t in vocab.members)
    return MonthlyLanguageModel(
        stats.community_id, stats.month, vocab, counts, total, total - in_v, smoothed
    )


def dump_model_csv(model: MonthlyLanguageModel, fh: IO[str]) -> None:
    fh.write("token,probability\n")
    for token, p in sorted(model.items(), key=lambda kv: (-kv[1], kv[0])):
        fh.write(f"{token},{p!r}\n")


def cross_entropy(tokens: Sequence[str], model: MonthlyLanguageModel) -> float:
    """Mean over token occurrences of -log2 model probability (bits/token)."""
    if not tokens:
        raise ValueError("cross-entropy of an empty post is undefined")
    total = 0.0
    for t in tokens:
        p = model.prob(t)
        if p <= 0.0:
            raise ValueError(
                f"token {t!r} has zero probability under the unsmoothed model for "
                f"{model.community_id}/{model.month}: post is not part of the "
                f"model's corpus"
            )
        total += -math.log2(p)
    return total / len(tokens)


class LmCache:
    """Lazy per-(community, month, vocabulary) model store over a stats map."""

    def __init__(
        self,
        month_stats: Mapping[tuple[str, tuple[int, int]], CommunityMonthStats],
        smoothed: bool = False,
    ) -> None:
        self._stats = month_stats
        self._smoothed = smoothed
        self._models: dict[tuple[str, tuple[int, int], str], MonthlyLanguageModel | None] = {}

    def get(
        self, community: str, month: tuple[int, int], vocab: Vocabulary
    ) -> MonthlyLanguageModel | None:
        key = (community, month, vocab.vid)
        if key not in self._models:
            stats = self._stats.get((community, month))
            model = None if stats is None else monthly_lm(stats, vocab, self._smoothed)
            self._models[key] = model
        return self._models[key]


def pronoun_rate(
    tokens: Sequence[str] | None, lexicon: frozenset[str] = PRONOUNS_1SG
) -> float | None:
    """Share of first-person-singular pronouns among a post's tokens.
    All-caps multi-letter tokens are acronyms and never count. Undefined
    (None) for posts without tokens."""
    if not tokens:
        return None
    hits = 0
    for t in tokens:
        if len(t) > 1 and t.isupper():
            continue
        if t.lower() in lexicon:
            hits += 1
    return hits / len(tokens)


def post_length(tokens: Sequence[str] | None) -> int | None:
    """Token count; None when the post carries no token field at all."""
    if tokens is None:
        return None
    return len(tokens)
