"""Prediction experiments: feature assembly from the fixed 50-post prefix,
imputation and scaling, the departure classifier and activity regressor,
the randomized trial protocol, and the signed-rank significance test."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import community_metrics as cm
from . import feedback as fb
from . import language as lang
from .framework import (
    FULL_LIFE,
    KIND_INDEX,
    KIND_WINDOW,
    WindowFunction,
    WindowSpec,
    eval_window_function,
)
from .ingest import PostEvent, UserTrajectory
from .labeling import STATUS_DEPARTING, STATUS_STAYING, UserLabel
from .linear import (
    apply_scaler,
    evaluate_f1,
    evaluate_rmse,
    fit_scaler,
    predict_labels,
    predict_values,
    train_linear_classifier,
    train_linear_svr,
)
from .parallel import parallel_map

FAMILY_TIMEGAP = "timegap"
FAMILY_SUBINFO = "subinfo"
FAMILY_LANG = "lang"
FAMILY_FEEDBACK = "feedback"
ALL_FAMILIES = (FAMILY_TIMEGAP, FAMILY_SUBINFO, FAMILY_LANG, FAMILY_FEEDBACK)

SET_ALL = "all"
BASELINE_POSITIVE = "always-positive"  # predicts the target class for everyone
BASELINE_MEAN = "train-mean"  # predicts the training-mean target

TASK_DEPARTURE = "departure"
TASK_ACTIVITY = "activity"

RANGE_FIRST = "first"
RANGE_LAST = "last"

DEFAULT_VOCAB_KINDS = (
    "pos",
    "top-100",
    "top-500",
    "top-1000",
    "top-5000",
    "top-10000",
    "full",
)

SECONDS_PER_DAY = 86400.0


@dataclass(frozen=True)
class FeatureConfig:
    w: int = 10
    prefix_len: int = 50
    families: tuple[str, ...] = ALL_FAMILIES
    vocab_kinds: tuple[str, ...] = DEFAULT_VOCAB_KINDS
    argminmax: bool = True  # argmax/argmin window-index features per series
    timegap_overall: bool = True  # whole-range mean gap alongside window values


@dataclass
class FeatureContext:
    """Dataset-level aggregates the feature extractors read from."""

    month_stats: Mapping
    quantiles: Mapping
    vocabularies: dict[str, lang.Vocabulary]
    lm_cache: lang.LmCache
    has_tokens: bool
    has_pos: bool
    has_feedback: bool


def build_feature_context(
    events: Sequence[PostEvent],
    config: FeatureConfig,
    month_stats: Mapping | None = None,
) -> FeatureContext:
    if month_stats is None:
        from .ingest import build_community_month_stats

        month_stats = build_community_month_stats(events)
    token_counts = None
    pos_counts = None
    has_tokens = any(e.tokens is not None for e in events)
    has_pos = any(e.pos_tags is not None for e in events)
    has_feedback = any(e.feedback is not None for e in events)
    if has_tokens:
        from .ingest import count_tokens

        token_counts = count_tokens(events)
    if has_pos:
        from .ingest import count_pos_tags

        pos_counts = count_pos_tags(events)
    vocabularies = {}
    for kind in config.vocab_kinds:
        if kind == "pos":
            if has_pos:
                vocabularies[kind] = lang.build_vocabulary(kind, tag_counts=pos_counts)
        elif has_tokens:
            vocabularies[kind] = lang.build_vocabulary(kind, token_counts=token_counts)
    return FeatureContext(
        month_stats=month_stats,
        quantiles=fb.build_quantiles(month_stats),
        vocabularies=vocabularies,
        lm_cache=lang.LmCache(month_stats, smoothed=False),
        has_tokens=has_tokens,
        has_pos=has_pos,
        has_feedback=has_feedback,
    )


def _gap_window_fn(events: Sequence[PostEvent]) -> float | None:
    """Mean gap in days between consecutive posts inside the window."""
    if len(events) < 2:
        return None
    gaps = [
        (b.timestamp - a.timestamp) / SECONDS_PER_DAY
        for a, b in zip(events, events[1:])
    ]
    return sum(gaps) / len(gaps)


def ce_index_fn(lm_cache: lang.LmCache, vocab: lang.Vocabulary) -> Callable:
    """Per-post cross-entropy against the post's own community-month model."""
    uses_pos = vocab.kind == "pos"

    def fn(e: PostEvent) -> float | None:
        tokens = e.pos_tags if uses_pos else e.tokens
        if not tokens:
            return None
        model = lm_cache.get(e.community_id, e.month(), vocab)
        if model is None:
            return None
        return lang.cross_entropy(tokens, model)

    return fn


def _family_series(
    family: str, ctx: FeatureContext, config: FeatureConfig
) -> list[WindowFunction]:
    """The windowed series making up one feature family, in a fixed order."""
    if family == FAMILY_TIMEGAP:
        return [WindowFunction("gap", KIND_WINDOW, _gap_window_fn)]
    if family == FAMILY_SUBINFO:
        return [
            f
            for f in cm.subinfo_window_functions(ctx.month_stats, include_dissim=False)
            if f.name != cm.METRIC_CUMNEW
        ]
    if family == FAMILY_LANG:
        series = []
        for kind in config.vocab_kinds:
            vocab = ctx.vocabularies.get(kind)
            if vocab is None:
                continue
            name = "ce_" + kind.replace("top-", "top")
            series.append(WindowFunction(name, KIND_INDEX, ce_index_fn(ctx.lm_cache, vocab)))
        series.append(
            WindowFunction("pronoun", KIND_INDEX, lambda e: lang.pronoun_rate(e.tokens))
        )
        series.append(
            WindowFunction(
                "postlen",
                KIND_INDEX,
                lambda e: None if e.tokens is None else float(len(e.tokens)),
            )
        )
        return series
    if family == FAMILY_FEEDBACK:
        return fb.feedback_window_functions(ctx.quantiles)
    raise ValueError(f"unknown feature family: {family!r}")


def available_families(ctx: FeatureContext, config: FeatureConfig) -> tuple[str, ...]:
    """Families the ingested data can support; omissions are the caller's to
    report."""
    out = []
    for family in config.families:
        if family == FAMILY_LANG and not ctx.has_tokens:
            continue
        if family == FAMILY_FEEDBACK and not ctx.has_feedback:
            continue
        out.append(family)
    return tuple(out)


def _argminmax(values: Sequence[float | None]) -> tuple[float | None, float | None]:
    """1-based indices of the largest and smallest defined window values;
    earlier windows win ties."""
    best_max: tuple[float, int] | None = None
    best_min: tuple[float, int] | None = None
    for i, v in enumerate(values, start=1):
        if v is None:
            continue
        if best_max is None or v > best_max[0]:
            best_max = (v, i)
        if best_min is None or v < best_min[0]:
            best_min = (v, i)
    if best_max is None:
        return None, None
    return float(best_max[1]), float(best_min[1])


def extract_features(
    prefix_events: Sequence[PostEvent],
    ctx: FeatureContext,
    config: FeatureConfig,
    which: str = RANGE_FIRST,
    x: int | None = None,
) -> dict[str, float | None]:
    """Feature vector over the first-x or last-x posts of the user's prefix.
    Every windowed series contributes one value per window plus (optionally)
    argmax/argmin window indices; the community family adds whole-range
    diversity values and the time-gap family a whole-range mean gap."""
    if x is None:
        x = config.prefix_len
    if x % config.w != 0 or x < config.w:
        raise ValueError("x must be a positive multiple of the window size")
    if which == RANGE_FIRST:
        events = tuple(prefix_events[:x])
    elif which == RANGE_LAST:
        events = tuple(prefix_events[-x:])
    else:
        raise ValueError(f"unknown range: {which!r}")
    pseudo = UserTrajectory("", events)
    spec = WindowSpec(w=config.w, view=FULL_LIFE, stages=1)
    features: dict[str, float | None] = {}
    for family in available_families(ctx, config):
        for func in _family_series(family, ctx, config):
            series = eval_window_function(pseudo, func, spec)
            for i, v in enumerate(series.values, start=1):
                features[f"{family}.{func.name}.w{i}"] = v
            if config.argminmax:
                hi, lo = _argminmax(series.values)
                features[f"{family}.{func.name}.argmax"] = hi
                features[f"{family}.{func.name}.argmin"] = lo
        if family == FAMILY_SUBINFO:
            dist = cm.community_distribution(events)
            features["subinfo.uniq.all"] = float(cm.unique_communities(events))
            features["subinfo.entropy.all"] = cm.entropy(dist)
            features["subinfo.gini.all"] = cm.gini_simpson(dist)
        if family == FAMILY_TIMEGAP and config.timegap_overall:
            features["timegap.gap.mean"] = _gap_window_fn(events)
    return features


@dataclass(frozen=True)
class FeatureMatrix:
    users: tuple[str, ...]
    names: tuple[str, ...]
    X: np.ndarray  # float matrix; NaN marks missing values


def build_feature_matrix(
    trajectories: Mapping[str, UserTrajectory],
    users: Sequence[str],
    ctx: FeatureContext,
    config: FeatureConfig,
    which: str = RANGE_FIRST,
    x: int | None = None,
    threads: int = 1,
) -> FeatureMatrix:
    users = tuple(users)

    def row(user: str) -> dict[str, float | None]:
        prefix = trajectories[user].events[: config.prefix_len]
        return extract_features(prefix, ctx, config, which, x)

    rows = parallel_map(row, users, threads)
    if not rows:
        raise ValueError("no users to featurize")
    names = tuple(rows[0])
    X = np.full((len(users), len(names)), np.nan)
    for r, vector in enumerate(rows):
        if tuple(vector) != names:
            raise AssertionError("feature names must be identical across users")
        for j, name in enumerate(names):
            v = vector[name]
            if v is not None:
                X[r, j] = v
    return FeatureMatrix(users, names, X)


def family_columns(names: Sequence[str], feature_set: str) -> list[int]:
    if feature_set == SET_ALL:
        return list(range(len(names)))
    cols = [j for j, n in enumerate(names) if n.split(".", 1)[0] == feature_set]
    if not cols:
        raise ValueError(f"feature set {feature_set!r} has no columns")
    return cols


def impute_columns(train: np.ndarray, *apply: np.ndarray) -> tuple[np.ndarray, ...]:
    """Fill missing entries with the training-column mean (0 for all-missing
    columns) and append one 0/1 missing-indicator column per base column."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN columns
        means = np.nanmean(train, axis=0)
    means = np.where(np.isnan(means), 0.0, means)

    def fill(M: np.ndarray) -> np.ndarray:
        mask = np.isnan(M)
        filled = np.where(mask, means[None, :], M)
        return np.hstack([filled, mask.astype(float)])

    return tuple(fill(M) for M in (train, *apply))


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # sum of ranks of positive differences
    p: float
    n: int  # nonzero differences used
    all_zero: bool


def _average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def wilcoxon_signed_rank(
    first: Sequence[float], second: Sequence[float]
) -> WilcoxonResult:
    """Paired signed-rank test: zero differences dropped, absolute differences
    ranked with average ranks for ties, two-sided p from the tie-corrected
    normal approximation."""
    if len(first) != len(second):
        raise ValueError("paired scores must have equal length")
    diffs = [a - b for a, b in zip(first, second) if a != b]
    n = len(diffs)
    if n == 0:
        return WilcoxonResult(0.0, 1.0, 0, True)
    if n < 6:
        warnings.warn(
            "fewer than 6 nonzero differences: normal approximation is crude",
            RuntimeWarning,
            stacklevel=2,
        )
    absd = [abs(d) for d in diffs]
    ranks = _average_ranks(absd)
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    mu = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    # tie correction over groups of equal |d|
    seen: dict[float, int] = {}
    for a in absd:
        seen[a] = seen.get(a, 0) + 1
    var -= sum(t**3 - t for t in seen.values()) / 48.0
    if var <= 0:
        return WilcoxonResult(w_plus, 1.0, n, False)
    z = (w_plus - mu) / math.sqrt(var)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return WilcoxonResult(w_plus, p, n, False)


@dataclass(frozen=True)
class PredictConfig:
    n_train: int = 2000  # validation is carved out of this draw
    n_test: int = 500
    n_val: int = 500
    trials: int = 10
    seed: int = 0
    c_grid: tuple[float, ...] = (0.01, 0.1, 1.0, 10.0, 100.0)
    eps_grid: tuple[float, ...] = (0.01, 0.1)
    xs: tuple[int, ...] = (10, 20, 30, 40, 50)
    ranges: tuple[str, ...] = (RANGE_FIRST, RANGE_LAST)
    feature_sets: tuple[str, ...] = (SET_ALL,) + ALL_FAMILIES
    sweep_sets: tuple[str, ...] = (SET_ALL, FAMILY_TIMEGAP)
    tasks: tuple[str, ...] = (TASK_DEPARTURE, TASK_ACTIVITY)
    features: FeatureConfig = field(default_factory=FeatureConfig)


@dataclass(frozen=True)
class TrialRow:
    trial: int
    task: str
    feature_set: str
    range_kind: str
    x: int
    metric: str
    value: float


@dataclass(frozen=True)
class SummaryRow:
    task: str
    kind: str  # "mean" or "wilcoxon"
    feature_set: str  # set name, or "a|b" for comparisons
    range_kind: str
    x: int
    metric: str
    value: float
    stderr: float | None = None
    p: float | None = None
    n: int = 0


@dataclass
class PredictionDataset:
    users: tuple[str, ...]
    status: dict[str, str]
    future_count: dict[str, int]
    matrices: dict[tuple[str, int], FeatureMatrix]
    omitted_families: tuple[str, ...] = ()

    def task_pool(self, task: str) -> list[str]:
        if task == TASK_DEPARTURE:
            return [
                u
                for u in self.users
                if self.status[u] in (STATUS_DEPARTING, STATUS_STAYING)
            ]
        return list(self.users)


def _cells_needed(cfg: PredictConfig) -> list[tuple[str, int]]:
    cells = {(RANGE_FIRST, cfg.features.prefix_len)}
    for which in cfg.ranges:
        for x in cfg.xs:
            if x == cfg.features.prefix_len:
                continue  # first-50 and last-50 coincide
            cells.add((which, x))
    return sorted(cells)


def prepare_prediction_dataset(
    trajectories: Mapping[str, UserTrajectory],
    labels: Mapping[str, UserLabel],
    ctx: FeatureContext,
    cfg: PredictConfig,
    threads: int = 1,
) -> PredictionDataset:
    users = tuple(sorted(u for u in labels if u in trajectories))
    if not users:
        raise ValueError("no labeled users available")
    matrices = {}
    for which, x in _cells_needed(cfg):
        matrices[(which, x)] = build_feature_matrix(
            trajectories, users, ctx, cfg.features, which, x, threads
        )
    omitted = tuple(
        f for f in cfg.features.families if f not in available_families(ctx, cfg.features)
    )
    return PredictionDataset(
        users=users,
        status={u: labels[u].status for u in users},
        future_count={u: labels[u].future_post_count for u in users},
        matrices=matrices,
        omitted_families=omitted,
    )


def _matrix_for(dataset: PredictionDataset, cfg: PredictConfig, which: str, x: int):
    if x == cfg.features.prefix_len:
        which = RANGE_FIRST
    return dataset.matrices[(which, x)]


def _fit_classifier_cell(
    M: FeatureMatrix,
    cols: list[int],
    y: np.ndarray,
    fit_idx: np.ndarray,
    val_idx: np.ndarray,
    test_idx: np.ndarray,
    cfg: PredictConfig,
) -> float:
    sub = M.X[:, cols]
    best_c, best_score = None, -1.0
    fit_f, val_f = impute_columns(sub[fit_idx], sub[val_idx])
    scaler = fit_scaler(fit_f)
    fit_s, val_s = apply_scaler(scaler, fit_f), apply_scaler(scaler, val_f)
    for c in cfg.c_grid:
        model = train_linear_classifier(fit_s, y[fit_idx], c=c)
        score = evaluate_f1(predict_labels(model, val_s), y[val_idx])
        if score > best_score:
            best_c, best_score = c, score
    train_idx = np.concatenate([fit_idx, val_idx])
    train_f, test_f = impute_columns(sub[train_idx], sub[test_idx])
    scaler = fit_scaler(train_f)
    model = train_linear_classifier(apply_scaler(scaler, train_f), y[train_idx], c=best_c)
    preds = predict_labels(model, apply_scaler(scaler, test_f))
    return evaluate_f1(preds, y[test_idx])


def _fit_svr_cell(
    M: FeatureMatrix,
    cols: list[int],
    y: np.ndarray,
    fit_idx: np.ndarray,
    val_idx: np.ndarray,
    test_idx: np.ndarray,
    cfg: PredictConfig,
) -> float:
    sub = M.X[:, cols]
    best, best_score = None, math.inf
    fit_f, val_f = impute_columns(sub[fit_idx], sub[val_idx])
    scaler = fit_scaler(fit_f)
    fit_s, val_s = apply_scaler(scaler, fit_f), apply_scaler(scaler, val_f)
    for c in cfg.c_grid:
        for eps in cfg.eps_grid:
            model = train_linear_svr(fit_s, y[fit_idx], c=c, epsilon=eps)
            score = evaluate_rmse(predict_values(model, val_s), y[val_idx])
            if score < best_score:
                best, best_score = (c, eps), score
    train_idx = np.concatenate([fit_idx, val_idx])
    train_f, test_f = impute_columns(sub[train_idx], sub[test_idx])
    scaler = fit_scaler(train_f)
    model = train_linear_svr(
        apply_scaler(scaler, train_f), y[train_idx], c=best[0], epsilon=best[1]
    )
    preds = predict_values(model, apply_scaler(scaler, test_f))
    return evaluate_rmse(preds, y[test_idx])


def activity_target(count: int) -> float:
    """log2 of the future post count, with log2(1 + count) for zero."""
    return math.log2(count) if count > 0 else math.log2(1 + count)


def run_trial_protocol(dataset: PredictionDataset, cfg: PredictConfig):
    """Seeded randomized trials with disjoint train/test draws and a validation
    split carved from the training draw; runs the feature-family ablations and
    the first-x/last-x sweeps, then summarizes with means, standard errors, and
    pairwise signed-rank p-values."""
    rows: list[TrialRow] = []
    prefix = cfg.features.prefix_len
    ablation_cells = [(fs, RANGE_FIRST, prefix) for fs in cfg.feature_sets]
    sweep_cells = [
        (fs, which, x)
        for fs in cfg.sweep_sets
        for which in cfg.ranges
        for x in cfg.xs
        if x != prefix
    ]
    for task_idx, task in enumerate(cfg.tasks):
        pool = dataset.task_pool(task)
        needed = cfg.n_train + cfg.n_test
        if len(pool) < needed:
            raise ValueError(
                f"insufficient users for task {task!r}: need {needed}, have {len(pool)}"
            )
        if cfg.n_val >= cfg.n_train:
            raise ValueError("validation size must be smaller than the training draw")
        if task == TASK_DEPARTURE:
            y_all = {u: int(dataset.status[u] == STATUS_DEPARTING) for u in pool}
        else:
            y_all = {u: activity_target(dataset.future_count[u]) for u in pool}
        pool_idx = {u: i for i, u in enumerate(pool)}
        for trial in range(cfg.trials):
            rng = np.random.default_rng(
                np.random.SeedSequence([cfg.seed, task_idx, trial])
            )
            perm = rng.permutation(len(pool))
            test_p = perm[: cfg.n_test]
            train_p = perm[cfg.n_test : cfg.n_test + cfg.n_train]
            val_p = train_p[: cfg.n_val]
            fit_p = train_p[cfg.n_val :]
            users_of = np.array(pool)

            def emit(fs: str, which: str, x: int, metric: str, value: float) -> None:
                rows.append(TrialRow(trial, task, fs, which, x, metric, value))

            for fs, which, x in ablation_cells + sweep_cells:
                M = _matrix_for(dataset, cfg, which, x)
                row_of = {u: i for i, u in enumerate(M.users)}
                to_rows = np.array([row_of[u] for u in users_of])
                fit_idx = to_rows[fit_p]
                val_idx = to_rows[val_p]
                test_idx = to_rows[test_p]
                # matrices may carry users outside this task's pool
                y = np.array([y_all.get(u, math.nan) for u in M.users], dtype=float)
                cols = family_columns(M.names, fs)
                if task == TASK_DEPARTURE:
                    value = _fit_classifier_cell(
                        M, cols, y, fit_idx, val_idx, test_idx, cfg
                    )
                    emit(fs, which, x, "f1", value)
                else:
                    value = _fit_svr_cell(M, cols, y, fit_idx, val_idx, test_idx, cfg)
                    emit(fs, which, x, "rmse", value)
            # trivial reference predictors on the same draw
            M = _matrix_for(dataset, cfg, RANGE_FIRST, prefix)
            row_of = {u: i for i, u in enumerate(M.users)}
            to_rows = np.array([row_of[u] for u in users_of])
            y = np.array([y_all.get(u, math.nan) for u in M.users], dtype=float)
            y_test = y[to_rows[test_p]]
            if task == TASK_DEPARTURE:
                emit(
                    BASELINE_POSITIVE,
                    RANGE_FIRST,
                    prefix,
                    "f1",
                    evaluate_f1(np.ones_like(y_test, dtype=int), y_test),
                )
            else:
                y_train = y[to_rows[np.concatenate([fit_p, val_p])]]
                emit(
                    BASELINE_MEAN,
                    RANGE_FIRST,
                    prefix,
                    "rmse",
                    evaluate_rmse(np.full_like(y_test, y_train.mean()), y_test),
                )
    return ProtocolResult(tuple(rows), tuple(_summarize(rows, cfg)))


@dataclass(frozen=True)
class ProtocolResult:
    rows: tuple[TrialRow, ...]
    summary: tuple[SummaryRow, ...]

    def values(
        self, task: str, feature_set: str, which: str, x: int
    ) -> list[float]:
        out = [
            r.value
            for r in self.rows
            if r.task == task
            and r.feature_set == feature_set
            and r.range_kind == which
            and r.x == x
        ]
        return out


def _summarize(rows: Sequence[TrialRow], cfg: PredictConfig) -> list[SummaryRow]:
    grouped: dict[tuple[str, str, str, int, str], list[float]] = {}
    for r in rows:
        grouped.setdefault(
            (r.task, r.feature_set, r.range_kind, r.x, r.metric), []
        ).append(r.value)
    out: list[SummaryRow] = []
    for (task, fs, which, x, metric), vals in sorted(grouped.items()):
        n = len(vals)
        mean = sum(vals) / n
        if n > 1:
            var = sum((v - mean) ** 2 for v in vals) / (n - 1)
            stderr = math.sqrt(var / n)
        else:
            stderr = 0.0
        out.append(SummaryRow(task, "mean", fs, which, x, metric, mean, stderr, None, n))
    prefix = cfg.features.prefix_len

    def series(task, fs, which, x, metric):
        return grouped.get((task, fs, which, x, metric))

    for task in cfg.tasks:
        metric = "f1" if task == TASK_DEPARTURE else "rmse"
        reference = FAMILY_TIMEGAP
        for fs in cfg.feature_sets + (BASELINE_POSITIVE, BASELINE_MEAN):
            if fs == reference:
                continue
            a = series(task, fs, RANGE_FIRST, prefix, metric)
            b = series(task, reference, RANGE_FIRST, prefix, metric)
            if a and b and len(a) == len(b):
                w = wilcoxon_signed_rank(a, b)
                out.append(
                    SummaryRow(
                        task,
                        "wilcoxon",
                        f"{fs}|{reference}",
                        RANGE_FIRST,
                        prefix,
                        metric,
                        w.statistic,
                        None,
                        w.p,
                        w.n,
                    )
                )
        for fs in cfg.sweep_sets:
            for x in cfg.xs:
                if x == prefix:
                    continue
                a = series(task, fs, RANGE_FIRST, x, metric)
                b = series(task, fs, RANGE_LAST, x, metric)
                if a and b and len(a) == len(b):
                    w = wilcoxon_signed_rank(a, b)
                    out.append(
                        SummaryRow(
                            task,
                            "wilcoxon",
                            f"{fs}:first|last",
                            "both",
                            x,
                            metric,
                            w.statistic,
                            None,
                            w.p,
                            w.n,
                        )
                    )
    return out
