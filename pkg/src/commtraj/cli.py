"""Command-line pipeline: synth | ingest | metrics | labels | features |
predict | style | singlemulti | report, each persisting hash-guarded artifacts
into a shared workspace directory."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import community_metrics as cm
from . import feedback as fb
from . import language as lang
from . import prediction as pred
from . import report as rpt
from . import style as sty
from . import synth as syn
from .framework import (
    FIXED_PREFIX,
    FULL_LIFE,
    StageSeries,
    WindowSeries,
    WindowSpec,
    eval_stage_view,
    eval_window_function,
    series_to_rows,
)
from .ingest import (
    IngestError,
    build_community_month_stats,
    build_community_user_index,
    build_trajectories,
    filter_before,
    filter_min_posts,
    parse_events,
    parse_timestamp,
    write_events,
)
from .labeling import DEFAULT_SOF, LabelConfig, UserLabel, label_users
from .parallel import parallel_map
from .workspace import (
    WorkspaceError,
    require_artifact,
    run_stage,
    write_csv,
)

SERIES_HEADER = ("user", "x_kind", "x", "metric", "value", "missing_flag")
POPULATION_HEADER = ("group", "x", "metric", "mean", "stderr", "n")


def _split_csv_arg(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _load_events(path: Path):
    with path.open("r", encoding="utf-8") as fh:
        events, diagnostics = parse_events(fh, strict=True)
    return events, diagnostics


def _load_ingested(workspace: Path):
    path = require_artifact(workspace, "ingest", "events.norm.jsonl", "ingest")
    return _load_events(path)[0]


def _load_labels(workspace: Path) -> dict[str, UserLabel]:
    path = require_artifact(workspace, "labels", "labels.csv", "labels")
    labels = {}
    with path.open("r", encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            user, status, quartile, future = line.rstrip("\n").split(",")
            labels[user] = UserLabel(
                user, status, int(quartile) if quartile else None, int(future)
            )
    return labels


def _load_truth(workspace: Path) -> dict[str, str] | None:
    path = workspace / "synth" / "truth.csv"
    if not path.exists():
        return None
    out = {}
    with path.open("r", encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            parts = line.rstrip("\n").split(",")
            out[parts[0]] = parts[1]
    return out


def _metric_functions(args, events, month_stats, user_index, quantiles):
    has_tokens = any(e.tokens is not None for e in events)
    has_pos = any(e.pos_tags is not None for e in events)
    has_feedback = any(e.feedback is not None for e in events)
    funcs = cm.subinfo_window_functions(
        month_stats, user_index, dissim_min_posts=args.dissim_min_posts
    )
    vocabularies = {}
    if has_tokens or has_pos:
        from .ingest import count_pos_tags, count_tokens

        token_counts = count_tokens(events) if has_tokens else None
        pos_counts = count_pos_tags(events) if has_pos else None
        cache = lang.LmCache(month_stats, smoothed=False)
        for kind in _split_csv_arg(args.vocab):
            if kind == "pos" and not has_pos:
                continue
            if kind != "pos" and not has_tokens:
                continue
            vocab = lang.build_vocabulary(
                kind, token_counts=token_counts, tag_counts=pos_counts
            )
            vocabularies[kind] = vocab
            name = "ce_" + kind.replace("top-", "top")
            funcs.append(
                pred.WindowFunction(name, "index", pred.ce_index_fn(cache, vocab))
            )
    if has_tokens:
        funcs.append(
            pred.WindowFunction(
                "pronoun", "index", lambda e: lang.pronoun_rate(e.tokens)
            )
        )
        funcs.append(
            pred.WindowFunction(
                "postlen",
                "index",
                lambda e: None if e.tokens is None else float(len(e.tokens)),
            )
        )
    if has_feedback:
        funcs.extend(fb.feedback_window_functions(quantiles))
    return funcs, vocabularies


def cmd_synth(args) -> int:
    workspace = Path(args.workspace)
    spec = syn.preset_spec(args.preset, users=args.users, stopword_shift=args.stopword_shift)
    config = {
        "preset": args.preset,
        "users": args.users,
        "seed": args.seed,
        "stopword_shift": args.stopword_shift,
    }

    def build(outdir: Path) -> None:
        events, truth = syn.generate(spec, args.seed, threads=args.threads)
        with (outdir / "events.jsonl").open("w", encoding="utf-8") as fh:
            write_events(events, fh)
        with (outdir / "truth.csv").open("w", encoding="utf-8") as fh:
            syn.write_truth_csv(truth, fh)
        print(f"synth: {len(truth)} users, {len(events)} events")

    changed = run_stage(workspace, "synth", config, [], build, force=args.force)
    if not changed:
        print("synth: up to date")
    return 0


def cmd_ingest(args) -> int:
    workspace = Path(args.workspace)
    if args.input is not None:
        source = Path(args.input)
    else:
        source = workspace / "synth" / "events.jsonl"
        if not source.exists():
            raise WorkspaceError(
                "no --input given and no synth/events.jsonl in the workspace; "
                "run `commtraj synth` or pass --input"
            )
    cutoff = parse_timestamp(args.cutoff) if args.cutoff else None
    config = {"strict": args.strict, "cutoff": cutoff}

    def build(outdir: Path) -> None:
        with source.open("r", encoding="utf-8") as fh:
            events, diagnostics = parse_events(fh, strict=args.strict)
        if cutoff is not None:
            events = filter_before(events, cutoff)
        trajectories = build_trajectories(events)
        month_stats = build_community_month_stats(events)
        with (outdir / "events.norm.jsonl").open("w", encoding="utf-8") as fh:
            write_events(events, fh)
        rows = [
            (c, y, m, s.post_count, s.total_tokens,
             len(s.feedback_values) if s.feedback_values else 0)
            for (c, (y, m)), s in sorted(month_stats.items())
        ]
        write_csv(
            outdir / "community_months.csv",
            ("community", "year", "month", "post_count", "total_tokens", "n_feedback"),
            rows,
        )
        summary = {
            "events": len(events),
            "users": len(trajectories),
            "communities": len({e.community_id for e in events}),
            "skipped_lines": len(diagnostics),
            "has_tokens": any(e.tokens is not None for e in events),
            "has_pos": any(e.pos_tags is not None for e in events),
            "has_feedback": any(e.feedback is not None for e in events),
        }
        (outdir / "summary.json").write_text(
            json.dumps(summary, sort_keys=True, indent=2) + "\n"
        )
        for d in diagnostics[:20]:
            print(f"ingest: skipped {d}", file=sys.stderr)
        print(f"ingest: {summary['events']} events from {summary['users']} users")

    changed = run_stage(workspace, "ingest", config, [source], build, force=args.force)
    if not changed:
        print("ingest: up to date")
    return 0


def cmd_metrics(args) -> int:
    workspace = Path(args.workspace)
    events_path = require_artifact(workspace, "ingest", "events.norm.jsonl", "ingest")
    config = {
        "w": args.window_size,
        "prefix_len": args.prefix_len,
        "stages": args.stages,
        "min_posts": args.min_posts,
        "vocab": args.vocab,
        "dissim_min_posts": args.dissim_min_posts,
        "dump_lm": args.dump_lm,
    }

    def build(outdir: Path) -> None:
        events = _load_events(events_path)[0]
        trajectories = filter_min_posts(build_trajectories(events), args.min_posts)
        month_stats = build_community_month_stats(events)
        user_index = build_community_user_index(events)
        quantiles = fb.build_quantiles(month_stats)
        funcs, vocabularies = _metric_functions(
            args, events, month_stats, user_index, quantiles
        )
        prefix_spec = WindowSpec(
            w=args.window_size, view=FIXED_PREFIX, prefix_len=args.prefix_len
        )
        life_spec = WindowSpec(w=args.window_size, view=FULL_LIFE, stages=args.stages)
        users = sorted(trajectories)

        def evaluate(user):
            traj = trajectories[user]
            window_rows = []
            stage_rows = []
            for func in funcs:
                series = eval_window_function(traj, func, prefix_spec)
                window_rows.extend(series_to_rows(series, func.name))
                life = eval_window_function(traj, func, life_spec)
                stage_rows.extend(
                    series_to_rows(eval_stage_view(life, args.stages), func.name)
                )
            return window_rows, stage_rows

        results = parallel_map(evaluate, users, args.threads)
        write_csv(
            outdir / "series_window.csv",
            SERIES_HEADER,
            (row for window_rows, _ in results for row in window_rows),
        )
        write_csv(
            outdir / "series_stage.csv",
            SERIES_HEADER,
            (row for _, stage_rows in results for row in stage_rows),
        )
        for vid, vocab in sorted(vocabularies.items()):
            with (outdir / f"vocab_{vid}.txt").open("w", encoding="utf-8") as fh:
                lang.write_vocabulary(vocab, fh)
        for spec_str in args.dump_lm or ():
            community, month_str, kind = spec_str.split(":")
            year, month = (int(v) for v in month_str.split("-"))
            vocab = vocabularies.get(kind)
            if vocab is None:
                raise WorkspaceError(f"--dump-lm vocabulary {kind!r} not built")
            stats = month_stats.get((community, (year, month)))
            model = lang.monthly_lm(stats, vocab) if stats else None
            if model is None:
                raise WorkspaceError(f"no model for {spec_str!r}: empty corpus")
            name = f"lm_{community}_{year:04d}-{month:02d}_{kind}.csv"
            with (outdir / name).open("w", encoding="utf-8") as fh:
                lang.dump_model_csv(model, fh)
        print(f"metrics: {len(users)} users, {len(funcs)} metrics")

    changed = run_stage(workspace, "metrics", config, [events_path], build, force=args.force)
    if not changed:
        print("metrics: up to date")
    return 0


def cmd_labels(args) -> int:
    workspace = Path(args.workspace)
    events_path = require_artifact(workspace, "ingest", "events.norm.jsonl", "ingest")
    sof = parse_timestamp(args.sof)
    config = {
        "sof": sof,
        "halves": args.halves,
        "prefix_len": args.prefix_len,
        "min_posts": args.min_posts,
        "quartile_scope": args.quartile_scope,
    }

    def build(outdir: Path) -> None:
        events = _load_events(events_path)[0]
        trajectories = filter_min_posts(build_trajectories(events), args.min_posts)
        label_cfg = LabelConfig(
            sof=sof,
            prefix_len=args.prefix_len,
            halves=args.halves,
            quartile_scope=args.quartile_scope,
        )
        labels = label_users(trajectories, label_cfg)
        write_csv(
            outdir / "labels.csv",
            ("user", "status", "quartile", "future_post_count"),
            (
                (l.user_id, l.status, l.quartile, l.future_post_count)
                for l in labels.values()
            ),
        )
        counts: dict[str, int] = {}
        for l in labels.values():
            counts[l.status] = counts.get(l.status, 0) + 1
        print("labels: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))

    changed = run_stage(workspace, "labels", config, [events_path], build, force=args.force)
    if not changed:
        print("labels: up to date")
    return 0


def _feature_cells(args) -> list[tuple[str, int]]:
    xs = [int(v) for v in _split_csv_arg(args.xs)]
    ranges = _split_csv_arg(args.ranges)
    cells = {(pred.RANGE_FIRST, args.prefix_len)} if args.prefix_len in xs else set()
    for which in ranges:
        for x in xs:
            if x == args.prefix_len:
                continue
            cells.add((which, x))
    return sorted(cells)


def cmd_features(args) -> int:
    workspace = Path(args.workspace)
    events_path = require_artifact(workspace, "ingest", "events.norm.jsonl", "ingest")
    config = {
        "w": args.window_size,
        "prefix_len": args.prefix_len,
        "xs": args.xs,
        "ranges": args.ranges,
        "families": args.families,
        "vocabs": args.vocabs,
        "min_posts": args.min_posts,
        "argminmax": not args.no_argminmax,
    }

    def build(outdir: Path) -> None:
        events = _load_events(events_path)[0]
        trajectories = filter_min_posts(build_trajectories(events), args.min_posts)
        feature_cfg = pred.FeatureConfig(
            w=args.window_size,
            prefix_len=args.prefix_len,
            families=tuple(_split_csv_arg(args.families)),
            vocab_kinds=tuple(_split_csv_arg(args.vocabs)),
            argminmax=not args.no_argminmax,
        )
        ctx = pred.build_feature_context(events, feature_cfg)
        omitted = [
            f
            for f in feature_cfg.families
            if f not in pred.available_families(ctx, feature_cfg)
        ]
        if omitted:
            print(
                "features: omitting unavailable families: " + ", ".join(omitted),
                file=sys.stderr,
            )
        users = sorted(trajectories)
        for which, x in _feature_cells(args):
            matrix = pred.build_feature_matrix(
                trajectories, users, ctx, feature_cfg, which, x, args.threads
            )
            path = outdir / f"features_{which}_{x}.csv"
            with path.open("w", encoding="utf-8") as fh:
                fh.write("user," + ",".join(matrix.names) + "\n")
                for i, user in enumerate(matrix.users):
                    cells = [
                        "" if math.isnan(v) else repr(float(v)) for v in matrix.X[i]
                    ]
                    fh.write(user + "," + ",".join(cells) + "\n")
        for vid, vocab in sorted(ctx.vocabularies.items()):
            with (outdir / f"vocab_{vid}.txt").open("w", encoding="utf-8") as fh:
                lang.write_vocabulary(vocab, fh)
        print(f"features: {len(users)} users x {len(_feature_cells(args))} ranges")

    changed = run_stage(workspace, "features", config, [events_path], build, force=args.force)
    if not changed:
        print("features: up to date")
    return 0


def _load_matrix(path: Path) -> pred.FeatureMatrix:
    with path.open("r", encoding="utf-8") as fh:
        names = tuple(fh.readline().rstrip("\n").split(",")[1:])
        users = []
        rows = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            users.append(parts[0])
            rows.append([float(v) if v else math.nan for v in parts[1:]])
    return pred.FeatureMatrix(tuple(users), names, np.array(rows))


def _parse_kv_config(path: Path) -> dict[str, str]:
    out = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _predict_config(args) -> pred.PredictConfig:
    file_cfg = _parse_kv_config(Path(args.config)) if args.config else {}

    def pick(flag_value, key: str, cast, default):
        if flag_value is not None:
            return cast(flag_value) if isinstance(flag_value, str) else flag_value
        if key in file_cfg:
            return cast(file_cfg[key])
        return default

    def cast_list(cast):
        return lambda s: tuple(cast(v) for v in _split_csv_arg(s))

    defaults = pred.PredictConfig()
    return pred.PredictConfig(
        n_train=pick(args.train, "train", int, defaults.n_train),
        n_test=pick(args.test, "test", int, defaults.n_test),
        n_val=pick(args.val, "val", int, defaults.n_val),
        trials=pick(args.trials, "trials", int, defaults.trials),
        seed=pick(args.seed, "seed", int, defaults.seed),
        c_grid=pick(None, "c_grid", cast_list(float), defaults.c_grid),
        eps_grid=pick(None, "eps_grid", cast_list(float), defaults.eps_grid),
        xs=pick(args.predict_xs, "xs", cast_list(int), defaults.xs),
        ranges=pick(args.predict_ranges, "ranges", cast_list(str), defaults.ranges),
        feature_sets=pick(
            args.feature_sets, "feature_sets", cast_list(str), defaults.feature_sets
        ),
        sweep_sets=pick(args.sweep_sets, "sweep_sets", cast_list(str), defaults.sweep_sets),
        tasks=pick(args.tasks, "tasks", cast_list(str), defaults.tasks),
        features=pred.FeatureConfig(w=args.window_size, prefix_len=args.prefix_len),
    )


def cmd_predict(args) -> int:
    workspace = Path(args.workspace)
    labels_path = require_artifact(workspace, "labels", "labels.csv", "labels")
    cfg = _predict_config(args)
    needed = pred._cells_needed(cfg)
    matrix_paths = []
    for which, x in needed:
        matrix_paths.append(
            require_artifact(workspace, "features", f"features_{which}_{x}.csv", "features")
        )
    config = {
        "train": cfg.n_train,
        "test": cfg.n_test,
        "val": cfg.n_val,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "xs": list(cfg.xs),
        "ranges": list(cfg.ranges),
        "feature_sets": list(cfg.feature_sets),
        "sweep_sets": list(cfg.sweep_sets),
        "tasks": list(cfg.tasks),
    }

    def build(outdir: Path) -> None:
        labels = _load_labels(workspace)
        matrices = {}
        for (which, x), path in zip(needed, matrix_paths):
            matrices[(which, x)] = _load_matrix(path)
        any_matrix = matrices[needed[0]]
        users = tuple(u for u in any_matrix.users if u in labels)
        omitted = tuple(
            f
            for f in pred.ALL_FAMILIES
            if not any(n.startswith(f + ".") for n in any_matrix.names)
        )
        dataset = pred.PredictionDataset(
            users=users,
            status={u: labels[u].status for u in users},
            future_count={u: labels[u].future_post_count for u in users},
            matrices=matrices,
            omitted_families=omitted,
        )
        result = pred.run_trial_protocol(dataset, cfg)
        write_csv(
            outdir / "results.csv",
            ("trial", "task", "feature_set", "range", "x", "metric", "value"),
            (
                (r.trial, r.task, r.feature_set, r.range_kind, r.x, r.metric, r.value)
                for r in result.rows
            ),
        )
        write_csv(
            outdir / "summary.csv",
            ("task", "kind", "feature_set", "range", "x", "metric", "value", "stderr", "p", "n"),
            (
                (s.task, s.kind, s.feature_set, s.range_kind, s.x, s.metric, s.value,
                 s.stderr, s.p, s.n)
                for s in result.summary
            ),
        )
        print(f"predict: {len(result.rows)} trial rows")

    changed = run_stage(
        workspace, "predict", config, [labels_path] + matrix_paths, build, force=args.force
    )
    if not changed:
        print("predict: up to date")
    return 0


def cmd_style(args) -> int:
    workspace = Path(args.workspace)
    events_path = require_artifact(workspace, "ingest", "events.norm.jsonl", "ingest")
    config = {
        "vocab": args.vocab,
        "train": args.train,
        "test": args.test,
        "trials": args.trials,
        "seed": args.seed,
        "posts_per_side": args.posts_per_side,
        "max_pairs": args.max_pairs,
        "min_posts": args.min_posts,
        "null_mode": args.null_mode,
        "exclude_own_posts": args.exclude_own_posts,
    }

    def build(outdir: Path) -> None:
        events = _load_events(events_path)[0]
        trajectories = filter_min_posts(build_trajectories(events), args.min_posts)
        month_stats = build_community_month_stats(events)
        from .ingest import count_pos_tags, count_tokens

        token_counts = count_tokens(events)
        pos_counts = count_pos_tags(events)
        vocabularies = []
        for kind in _split_csv_arg(args.vocab):
            vocabularies.append(
                lang.build_vocabulary(kind, token_counts=token_counts, tag_counts=pos_counts)
            )
        if args.null_mode:
            triples = sty.build_same_community_triples(
                trajectories, args.posts_per_side, seed=args.seed
            )
        else:
            triples = sty.build_triples(
                trajectories,
                args.posts_per_side,
                seed=args.seed,
                max_pairs_per_user=args.max_pairs,
            )
        if args.exclude_own_posts:
            cache = sty.OwnPostExcludingCache(month_stats, events, smoothed=True)
        else:
            cache = lang.LmCache(month_stats, smoothed=True)
        cfg = sty.StyleConfig(
            n_train=args.train, n_test=args.test, trials=args.trials, seed=args.seed
        )
        result = sty.run_style_experiment(triples, cache, vocabularies, cfg)
        write_csv(
            outdir / "accuracy.csv",
            ("vocabulary", "trial", "accuracy"),
            ((r.vocab_id, r.trial, r.accuracy) for r in result.rows),
        )
        write_csv(
            outdir / "style_summary.csv",
            ("vocabulary", "mean", "stderr", "n_trials", "n_triples", "dropped"),
            (
                (s.vocab_id, s.mean, s.stderr, s.n_trials, s.n_triples, s.dropped)
                for s in result.summary
            ),
        )
        for s in result.summary:
            print(f"style: {s.vocab_id} accuracy {s.mean:.3f} +/- {s.stderr:.3f}")

    changed = run_stage(workspace, "style", config, [events_path], build, force=args.force)
    if not changed:
        print("style: up to date")
    return 0


def cmd_singlemulti(args) -> int:
    workspace = Path(args.workspace)
    events_path = require_artifact(workspace, "ingest", "events.norm.jsonl", "ingest")
    config = {"min_posts": args.min_posts}

    def build(outdir: Path) -> None:
        events = _load_events(events_path)[0]
        trajectories = filter_min_posts(build_trajectories(events), args.min_posts)
        month_stats = build_community_month_stats(events)
        quantiles = fb.build_quantiles(month_stats)
        labels = None
        if (workspace / "labels" / "labels.csv").exists():
            labels = _load_labels(workspace)
        comparison = fb.first_post_feedback_comparison(trajectories, quantiles)
        rows = []
        counts_rows = []
        for user in sorted(trajectories):
            single, multi = fb.single_multi_partition(trajectories[user])
            counts_rows.append((user, single, multi))
        write_csv(outdir / "community_counts.csv", ("user", "single", "multi"), counts_rows)
        if comparison is not None:
            for r in comparison.rows:
                rows.append((r.user_id, fb.SIDE_SINGLE, r.single_mean))
                rows.append((r.user_id, fb.SIDE_MULTI, r.multi_mean))
        write_csv(outdir / "report.csv", ("user", "side", "mean_indicator"), rows)
        summary_rows = []

        def add_summary(group: str, included: set[str] | None) -> None:
            if comparison is None:
                return
            picked = [
                r for r in comparison.rows if included is None or r.user_id in included
            ]
            if len(picked) < 2:
                return
            diffs = [r.multi_mean - r.single_mean for r in picked]
            t = fb.paired_t_test(diffs)
            summary_rows.append(
                (
                    group,
                    len(picked),
                    sum(r.single_mean for r in picked) / len(picked),
                    sum(r.multi_mean for r in picked) / len(picked),
                    sum(diffs) / len(diffs),
                    t.t,
                    t.p,
                    int(t.zero_variance),
                )
            )

        add_summary("all", None)
        if labels:
            for scheme, assignment in rpt.group_assignments(
                sorted(trajectories), labels
            ).items():
                if scheme == "all":
                    continue
                groups = sorted({g for g in assignment.values() if g is not None})
                for g in groups:
                    add_summary(g, {u for u, v in assignment.items() if v == g})
        write_csv(
            outdir / "singlemulti_summary.csv",
            ("group", "n", "mean_single", "mean_multi", "mean_diff", "t", "p", "zero_variance"),
            summary_rows,
        )
        if summary_rows:
            row = summary_rows[0]
            print(
                f"singlemulti: n={row[1]} single={row[2]:.3f} multi={row[3]:.3f} p={row[6]:.2g}"
            )
        else:
            print("singlemulti: no eligible users (needs feedback on first posts)")

    changed = run_stage(workspace, "singlemulti", config, [events_path], build, force=args.force)
    if not changed:
        print("singlemulti: up to date")
    return 0


def _load_series(path: Path) -> dict[str, dict[str, list[float | None]]]:
    by_metric: dict[str, dict[str, list[float | None]]] = {}
    with path.open("r", encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            user, _, x, metric, value, missing = line.rstrip("\n").split(",")
            series = by_metric.setdefault(metric, {}).setdefault(user, [])
            x = int(x)
            while len(series) < x:
                series.append(None)
            series[x - 1] = None if missing == "1" else float(value)
    return by_metric


def cmd_report(args) -> int:
    workspace = Path(args.workspace)
    window_path = require_artifact(workspace, "metrics", "series_window.csv", "metrics")
    stage_path = require_artifact(workspace, "metrics", "series_stage.csv", "metrics")
    config = {"check_full_data_targets": args.check_full_data_targets}
    inputs = [window_path, stage_path]
    labels_file = workspace / "labels" / "labels.csv"
    if labels_file.exists():
        inputs.append(labels_file)

    def build(outdir: Path) -> None:
        labels = _load_labels(workspace) if labels_file.exists() else None
        archetypes = _load_truth(workspace)
        for name, path, cls in (
            ("population_window.csv", window_path, WindowSeries),
            ("population_stage.csv", stage_path, StageSeries),
        ):
            by_metric = _load_series(path)
            series_objects = {
                metric: {
                    user: cls(user, tuple(values)) for user, values in users.items()
                }
                for metric, users in by_metric.items()
            }
            rows = rpt.population_curves(series_objects, labels, archetypes)
            write_csv(outdir / name, POPULATION_HEADER, rows)
        print("report: population curves written")
        if args.check_full_data_targets:
            observed = _collect_full_data_observations(workspace, labels)
            results = rpt.check_full_data_targets(observed)
            failed = False
            for name, expected, value, verdict in results:
                shown = "-" if value is None else f"{value:g}"
                print(f"report: target {name}: expected {expected:g}, got {shown} [{verdict}]")
                failed = failed or verdict == "fail"
            if failed:
                raise WorkspaceError("full-data reproduction targets failed")

    changed = run_stage(workspace, "report", config, inputs, build, force=args.force)
    if not changed:
        print("report: up to date")
    return 0


def _collect_full_data_observations(workspace: Path, labels) -> dict[str, float]:
    observed: dict[str, float] = {}
    events = _load_ingested(workspace)
    trajectories = filter_min_posts(build_trajectories(events), 50)
    if trajectories:
        counts = sorted(t.T for t in trajectories.values())
        communities = sorted(
            len({e.community_id for e in t.events}) for t in trajectories.values()
        )
        gaps = []
        for t in trajectories.values():
            if t.T > 1:
                span = [
                    (b.timestamp - a.timestamp) / 86400.0
                    for a, b in zip(t.events, t.events[1:])
                ]
                gaps.append(sum(span) / len(span))
        observed["retained_users_thousands"] = len(trajectories) / 1000.0
        observed["mean_posts"] = sum(counts) / len(counts)
        observed["median_posts"] = float(counts[len(counts) // 2])
        observed["mean_communities"] = sum(communities) / len(communities)
        observed["median_communities"] = float(communities[len(communities) // 2])
        if gaps:
            observed["mean_avg_gap_days"] = sum(gaps) / len(gaps)
    if labels:
        observed["departing_users"] = float(
            sum(1 for l in labels.values() if l.status == "departing")
        )
        observed["staying_users"] = float(
            sum(1 for l in labels.values() if l.status == "staying")
        )
    summary_path = workspace / "predict" / "summary.csv"
    if summary_path.exists():
        with summary_path.open("r", encoding="utf-8") as fh:
            next(fh)
            for line in fh:
                task, kind, fs, rng_kind, x, metric, value = line.split(",")[:7]
                if task == "departure" and kind == "mean" and metric == "f1" and x == "50":
                    if fs == "all":
                        observed["departure_f1_all"] = float(value)
                    if fs == "timegap":
                        observed["departure_f1_timegap"] = float(value)
    style_path = workspace / "style" / "style_summary.csv"
    if style_path.exists():
        with style_path.open("r", encoding="utf-8") as fh:
            next(fh)
            for line in fh:
                vocab, mean = line.split(",")[:2]
                observed[f"style_accuracy_{vocab}"] = float(mean)
    return observed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commtraj",
        description="Multi-community trajectory analytics pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, threads: bool = True):
        p.add_argument("--workspace", required=True, help="pipeline workspace directory")
        p.add_argument("--force", action="store_true", help="rerun even if up to date")
        if threads:
            p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("synth", help="generate a synthetic event log with ground truth")
    common(p)
    p.add_argument("--preset", choices=syn.PRESETS, default="two-archetype")
    p.add_argument("--users", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stopword-shift", type=float, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse and validate an events-v1 log")
    common(p, threads=False)
    p.add_argument("--input", help="events-v1 file (defaults to the synth stage output)")
    p.add_argument("--strict", action="store_true", help="malformed lines are fatal")
    p.add_argument("--cutoff", help="drop events at/after this instant (ISO-8601 or epoch)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("metrics", help="per-user windowed/staged metric series")
    common(p)
    p.add_argument("--window-size", type=int, default=10)
    p.add_argument("--prefix-len", type=int, default=50)
    p.add_argument("--stages", type=int, default=5)
    p.add_argument("--min-posts", type=int, default=50)
    p.add_argument("--vocab", default="pos,top-100,top-1000")
    p.add_argument("--dissim-min-posts", type=int, default=cm.DISSIM_MIN_POSTS)
    p.add_argument("--dump-lm", action="append", metavar="COMMUNITY:YYYY-MM:VOCAB")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("labels", help="departing/staying status and activity quartiles")
    common(p, threads=False)
    p.add_argument("--sof", default=str(DEFAULT_SOF), help="start-of-future (ISO-8601 or epoch)")
    p.add_argument("--halves", choices=("calendar", "days91"), default="calendar")
    p.add_argument("--prefix-len", type=int, default=50)
    p.add_argument("--min-posts", type=int, default=50)
    p.add_argument("--quartile-scope", choices=("all", "classified"), default="all")
    p.set_defaults(func=cmd_labels)

    p = sub.add_parser("features", help="prediction feature matrices")
    common(p)
    p.add_argument("--window-size", type=int, default=10)
    p.add_argument("--prefix-len", type=int, default=50)
    p.add_argument("--xs", default="10,20,30,40,50")
    p.add_argument("--ranges", default="first,last")
    p.add_argument("--families", default=",".join(pred.ALL_FAMILIES))
    p.add_argument("--vocabs", default=",".join(pred.DEFAULT_VOCAB_KINDS))
    p.add_argument("--min-posts", type=int, default=50)
    p.add_argument("--no-argminmax", action="store_true")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("predict", help="departure and activity prediction trials")
    common(p, threads=False)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--window-size", type=int, default=10)
    p.add_argument("--prefix-len", type=int, default=50)
    p.add_argument("--train", type=int)
    p.add_argument("--test", type=int)
    p.add_argument("--val", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--predict-xs", dest="predict_xs")
    p.add_argument("--predict-ranges", dest="predict_ranges")
    p.add_argument("--tasks")
    p.add_argument("--feature-sets", dest="feature_sets")
    p.add_argument("--sweep-sets", dest="sweep_sets")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("style", help="community-origin style classification")
    common(p, threads=False)
    p.add_argument("--vocab", default="pos,top-100,top-500")
    p.add_argument("--train", type=int, default=1500)
    p.add_argument("--test", type=int, default=500)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--posts-per-side", type=int, default=25)
    p.add_argument("--max-pairs", type=int, default=None)
    p.add_argument("--min-posts", type=int, default=50)
    p.add_argument("--null-mode", action="store_true",
                   help="same-community control triples instead of cross-community pairs")
    p.add_argument("--exclude-own-posts", action="store_true",
                   help="drop the user's own posts from each community-month corpus")
    p.set_defaults(func=cmd_style)

    p = sub.add_parser("singlemulti", help="single- vs multi-post community analysis")
    common(p, threads=False)
    p.add_argument("--min-posts", type=int, default=50)
    p.set_defaults(func=cmd_singlemulti)

    p = sub.add_parser("report", help="population curves and optional target checks")
    common(p, threads=False)
    p.add_argument("--check-full-data-targets", action="store_true")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (WorkspaceError, IngestError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
