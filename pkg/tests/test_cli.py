import hashlib
import json
from pathlib import Path

from commtraj.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def _chain(ws, users=40, seed=9, threads=1):
    assert run("synth", "--workspace", ws, "--preset", "two-archetype",
               "--users", users, "--seed", seed) == 0
    assert run("ingest", "--workspace", ws, "--strict") == 0
    assert run("metrics", "--workspace", ws, "--vocab", "top-100",
               "--threads", threads) == 0
    assert run("labels", "--workspace", ws) == 0
    assert run("features", "--workspace", ws, "--xs", "50",
               "--vocabs", "top-100", "--threads", threads) == 0
    assert run("report", "--workspace", ws) == 0


def _csv_digests(ws: Path) -> dict[str, str]:
    out = {}
    for path in sorted(ws.rglob("*.csv")):
        out[str(path.relative_to(ws))] = hashlib.sha256(path.read_bytes()).hexdigest()
    return out


def test_missing_upstream_artifact_names_prior_command(tmp_path, capsys):
    assert run("metrics", "--workspace", tmp_path / "empty") == 2
    err = capsys.readouterr().err
    assert "run `commtraj ingest` first" in err


def test_ingest_requires_input_or_synth_stage(tmp_path, capsys):
    assert run("ingest", "--workspace", tmp_path / "empty") == 2
    assert "commtraj synth" in capsys.readouterr().err


def test_full_chain_and_idempotence(tmp_path, capsys):
    ws = tmp_path / "ws"
    _chain(ws)
    capsys.readouterr()
    # identical config and inputs: every stage is a no-op
    _chain(ws)
    out = capsys.readouterr().out
    for stage in ("synth", "ingest", "metrics", "labels", "features", "report"):
        assert f"{stage}: up to date" in out


def test_rerun_after_config_change_recomputes(tmp_path, capsys):
    ws = tmp_path / "ws"
    _chain(ws)
    capsys.readouterr()
    assert run("metrics", "--workspace", ws, "--vocab", "top-100",
               "--window-size", "5") == 0
    out = capsys.readouterr().out
    assert "up to date" not in out


def test_same_seed_chains_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    _chain(a)
    _chain(b)
    assert _csv_digests(a) == _csv_digests(b)


def test_thread_count_does_not_change_outputs(tmp_path):
    a, b = tmp_path / "t1", tmp_path / "t4"
    _chain(a, threads=1)
    _chain(b, threads=4)
    digests_a, digests_b = _csv_digests(a), _csv_digests(b)
    assert digests_a and digests_a == digests_b


def test_window_size_flag_flows_through(tmp_path):
    ws = tmp_path / "ws"
    assert run("synth", "--workspace", ws, "--preset", "two-archetype",
               "--users", 20, "--seed", 1) == 0
    assert run("ingest", "--workspace", ws) == 0
    assert run("metrics", "--workspace", ws, "--window-size", "5", "--vocab", "top-100") == 0
    series = (ws / "metrics" / "series_window.csv").read_text().splitlines()
    xs = {int(line.split(",")[2]) for line in series[1:] if line.split(",")[3] == "uniq"}
    assert max(xs) == 10  # 50-post prefix at w=5 gives 10 windows


def test_report_emits_archetype_curves_for_synth_data(tmp_path):
    ws = tmp_path / "ws"
    _chain(ws, users=30)
    rows = (ws / "report" / "population_window.csv").read_text().splitlines()[1:]
    groups = {line.split(",")[0] for line in rows}
    assert "archetype:leaver" in groups and "archetype:stayer" in groups
    assert "all" in groups and "status:departing" in groups


def test_strict_ingest_rejects_bad_line(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"user":"u1","ts":1,"community":"a"}\nnot json\n')
    assert run("ingest", "--workspace", tmp_path / "ws", "--input", bad, "--strict") == 2
    assert "line 2" in capsys.readouterr().err


def test_lenient_ingest_skips_bad_line(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"user":"u1","ts":1,"community":"a"}\nnot json\n')
    assert run("ingest", "--workspace", tmp_path / "ws", "--input", bad) == 0
    summary = json.loads((tmp_path / "ws" / "ingest" / "summary.json").read_text())
    assert summary["events"] == 1 and summary["skipped_lines"] == 1


def test_cutoff_flag_drops_tail(tmp_path):
    src = tmp_path / "events.jsonl"
    src.write_text(
        '{"user":"u1","ts":100,"community":"a"}\n'
        '{"user":"u1","ts":200,"community":"a"}\n'
    )
    assert run("ingest", "--workspace", tmp_path / "ws", "--input", src,
               "--cutoff", "150") == 0
    summary = json.loads((tmp_path / "ws" / "ingest" / "summary.json").read_text())
    assert summary["events"] == 1


def test_predict_config_file_round_trip(tmp_path):
    ws = tmp_path / "ws"
    _chain(ws, users=60)
    cfg = tmp_path / "predict.cfg"
    cfg.write_text(
        "train=30\ntest=15\nval=10\ntrials=2\nseed=4\nxs=50\nranges=first\n"
        "feature_sets=all,timegap\nsweep_sets=\ntasks=departure\n"
    )
    assert run("predict", "--workspace", ws, "--config", cfg) == 0
    rows = (ws / "predict" / "results.csv").read_text().splitlines()
    assert len(rows) > 2
    header = rows[0].split(",")
    assert header == ["trial", "task", "feature_set", "range", "x", "metric", "value"]


def test_style_null_and_exclusion_flags(tmp_path):
    ws = tmp_path / "ws"
    assert run("synth", "--workspace", ws, "--preset", "null",
               "--users", 60, "--seed", 2) == 0
    assert run("ingest", "--workspace", ws) == 0
    assert run("style", "--workspace", ws, "--vocab", "top-100", "--null-mode",
               "--train", 20, "--test", 10, "--trials", 2,
               "--exclude-own-posts") == 0
    rows = (ws / "style" / "accuracy.csv").read_text().splitlines()
    assert rows[0] == "vocabulary,trial,accuracy"
    assert len(rows) == 3
    summary = (ws / "style" / "style_summary.csv").read_text().splitlines()[1]
    dropped = int(summary.split(",")[-1])
    assert dropped > 0  # sole posters' corpora empty out under exclusion


def test_report_full_data_target_check_fails_on_desk_data(tmp_path, capsys):
    ws = tmp_path / "ws"
    _chain(ws, users=30)
    capsys.readouterr()
    assert run("report", "--workspace", ws, "--force",
               "--check-full-data-targets") == 2
    captured = capsys.readouterr()
    assert "full-data reproduction targets failed" in captured.err
    assert "target mean_posts" in captured.out


def test_dump_lm_writes_model_csv(tmp_path):
    ws = tmp_path / "ws"
    assert run("synth", "--workspace", ws, "--preset", "two-archetype",
               "--users", 20, "--seed", 1) == 0
    assert run("ingest", "--workspace", ws) == 0
    assert run("metrics", "--workspace", ws, "--vocab", "top-100",
               "--dump-lm", "c000:2010-06:top-100") == 0
    dumps = list((ws / "metrics").glob("lm_c000_*.csv"))
    assert dumps and dumps[0].read_text().startswith("token,probability")
