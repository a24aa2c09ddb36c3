"""
Tests for the nmfbench command-line interface.
"""

import pytest

from nmfbench import database, models
from nmfbench.cli import EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, build_parser, build_spec, main, merge_options
from nmfbench.output import CSV_HEADER, read_csv_records

SYNTH = "synth:12,10,2,1,0"


def _run(tmp_path, *extra, out="out.csv"):
    return main(["run", "--data", SYNTH, "--rank", "2", "--max-iter", "10",
                 "--seeds", "2", "--out", str(tmp_path / out), *extra])

# ===== RUN =====

def test_run_writes_csv(tmp_path):
    assert _run(tmp_path, "--init", "random,nndsvd") == EXIT_OK
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    records = read_csv_records(tmp_path / "out.csv")
    assert {r.init for r in records} == {"nndsvd", "random"}
    assert len({r.seed for r in records if r.init == "random"}) == 2


def test_rerun_is_byte_identical(tmp_path):
    assert _run(tmp_path, "--init", "random", out="a.csv") == EXIT_OK
    assert _run(tmp_path, "--init", "random", out="b.csv") == EXIT_OK
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_run_writes_plot_and_summary(tmp_path):
    code = _run(tmp_path, "--init", "random", "--init", "svd-abs",
                "--plot", str(tmp_path / "curves.svg"), "--summary", str(tmp_path / "mean.csv"))
    assert code == EXIT_OK
    assert "<svg" in (tmp_path / "curves.svg").read_text()
    summary = read_csv_records(tmp_path / "mean.csv")
    assert {r.seed for r in summary} == {"mean"}
    assert [r.iteration for r in summary if r.init == "svd-abs"][0] == 0


def test_partial_failure_exit_code(tmp_path, capsys):
    assert _run(tmp_path, "--init", "gabor,random") == EXIT_PARTIAL
    assert "failed cell gabor/" in capsys.readouterr().err
    assert {r.init for r in read_csv_records(tmp_path / "out.csv")} == {"random"}


def test_run_params_reach_initializers(tmp_path):
    assert _run(tmp_path, "--init", "random-acol", "--param", "q=1") == EXIT_OK
    assert _run(tmp_path, "--init", "random-acol", "--param", "q=50") == EXIT_PARTIAL
    assert _run(tmp_path, "--init", "random", "--param", "novalue") == EXIT_USAGE

# ===== USAGE ERRORS =====

def test_missing_required_options(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
    assert "--data is required" in capsys.readouterr().err
    assert main(["run", "--data", SYNTH]) == EXIT_USAGE


def test_bad_values_are_usage_errors(tmp_path):
    assert _run(tmp_path, "--init", "nope") == EXIT_USAGE
    assert _run(tmp_path, "--rank", "0") == EXIT_USAGE
    assert main(["run", "--data", "csv:" + str(tmp_path / "missing.csv"),
                 "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
    assert not (tmp_path / "x.csv").exists()


def test_parser_errors_exit_with_usage_code():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--solver", "gradient"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == EXIT_USAGE

# ===== CONFIGURATION =====

def test_run_file_with_option_override(tmp_path):
    run_file = tmp_path / "grid.env"
    run_file.write_text(
        f"data={SYNTH}\n"
        "rank=2\n"
        "init=random,nndsvd\n"
        "seeds=3\n"
        "MAX_ITER=5\n"
        f"out={tmp_path / 'from_file.csv'}\n"
    )
    assert main(["run", "--config", str(run_file), "--seeds", "1"]) == EXIT_OK
    records = read_csv_records(tmp_path / "from_file.csv")
    assert len({r.seed for r in records if r.init == "random"}) == 1
    assert max(r.iteration for r in records) <= 5


def test_run_file_unknown_key(tmp_path):
    run_file = tmp_path / "grid.env"
    run_file.write_text("colour=blue\n")
    assert main(["run", "--config", str(run_file)]) == EXIT_USAGE


def test_jobs_default_from_environment(monkeypatch):
    monkeypatch.setenv("NMFBENCH_JOBS", "3")
    args = build_parser().parse_args(["run", "--data", SYNTH, "--out", "x.csv"])
    assert build_spec(merge_options(args)).jobs == 3
    args = build_parser().parse_args(["run", "--data", SYNTH, "--out", "x.csv", "--jobs", "2"])
    assert build_spec(merge_options(args)).jobs == 2


def test_invalid_environment_setting(monkeypatch):
    monkeypatch.setenv("NMFBENCH_JOBS", "0")
    assert main(["list-inits"]) == EXIT_USAGE

# ===== OTHER COMMANDS =====

def test_list_inits(capsys):
    assert main(["list-inits"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    names = [line.split()[0] for line in lines]
    assert names == sorted(names)
    assert {"random", "nndsvd", "nnsvd-lrc", "kmeans-a", "pba", "nica"} <= set(names)
    assert any(line.split()[:3] == ["cro", "clustering", "deterministic"] for line in lines)


def test_store_saves_run(tmp_path):
    assert _run(tmp_path, "--init", "nndsvd", "--store") == EXIT_OK
    db = database.SessionLocal()
    try:
        run = db.query(models.BenchmarkRun).order_by(models.BenchmarkRun.id.desc()).first()
        assert run.data_ref == SYNTH
        assert run.inits == "nndsvd"
        assert run.record_count == len(run.records) > 0
    finally:
        db.close()
