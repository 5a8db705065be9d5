import json
import shutil
import subprocess
import sys

import pytest

from ethio_prep.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, OUT_ENV, main
from ethio_prep.pipeline import PipelineConfig, run

from conftest import DATA, SYNTHETIC


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def read(path):
    return path.read_text(encoding="utf-8")


def error_line(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


def test_normalize_default_table(tmp_path):
    src = write(tmp_path / "in.am", "ፀሐይ\n")
    assert main(["-q", "normalize", "--in", str(src), "--out", str(tmp_path / "out.am"),
                 "--table", "default"]) == EXIT_OK
    assert read(tmp_path / "out.am") == "ጸሀይ\n"


def test_normalize_learn_writes_report_and_table(tmp_path):
    src = write(tmp_path / "in.am", "ሠላም ሠላም ሰላም\n")
    assert main(["-q", "normalize", "--in", str(src), "--out", str(tmp_path / "o"), "--learn",
                 "--report", str(tmp_path / "r.tsv"), "--save-table", str(tmp_path / "t.tsv")]) == 0
    assert read(tmp_path / "o") == "ሠላም ሠላም ሠላም\n"
    assert "# mode=learned" in read(tmp_path / "t.tsv")
    assert read(tmp_path / "r.tsv").startswith("family\t")


def test_bleu_identical(tmp_path, capsys):
    ref = write(tmp_path / "r", "the cat sat on the mat\nhello there friend now\n")
    assert main(["bleu", "--hyp", str(ref), "--ref", str(ref)]) == EXIT_OK
    assert capsys.readouterr().out.startswith("BLEU = 100.00")


def test_bleu_comparison(tmp_path, capsys):
    ref = write(tmp_path / "r", "a b c d e\n")
    h1 = write(tmp_path / "h1", "a b c x e\n")
    h2 = write(tmp_path / "h2", "a b c d e\n")
    assert main(["bleu", "--hyp", str(h1), str(h2), "--ref", str(ref),
                 "--tsv", str(tmp_path / "cmp.tsv")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "delta" in out and "+100.00 BLEU (normalized - regular)" in out
    assert read(tmp_path / "cmp.tsv").splitlines()[-1] == "delta\t+100.00"


def test_bleu_length_mismatch_is_data_error(tmp_path, capsys):
    ref = write(tmp_path / "r", "a\nb\n")
    hyp = write(tmp_path / "h", "a\n")
    assert main(["bleu", "--hyp", str(hyp), "--ref", str(ref)]) == EXIT_DATA
    assert error_line(capsys)["error"] == "CorpusError"


def test_split_is_reproducible(tmp_path):
    shutil.copy(SYNTHETIC / "synthetic.am", tmp_path / "c.am")
    shutil.copy(SYNTHETIC / "synthetic.en", tmp_path / "c.en")
    for name in ("a", "b"):
        assert main(["-q", "split", "--in", str(tmp_path / "c"), "--out-dir", str(tmp_path / name),
                     "--seed", "7"]) == EXIT_OK
    for f in ("train.am", "train.en", "valid.am", "valid.en", "test.am", "test.en"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert len(read(tmp_path / "a" / "train.am").splitlines()) == 800


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert error_line(capsys)["error"] == "usage"
    assert main(["split", "--seed", "1"]) == EXIT_USAGE
    assert "--in" in error_line(capsys)["message"]
    assert main(["frobnicate"]) == EXIT_USAGE


def test_missing_file_is_data_error(tmp_path, capsys):
    assert main(["dedup", "--in", str(tmp_path / "nope"), "--out", str(tmp_path / "x")]) == EXIT_DATA
    assert error_line(capsys)["error"] == "FileNotFoundError"


def test_bad_config_is_usage_error(tmp_path, capsys):
    cfg = write(tmp_path / "c.ini", "[pipeline]\nmanifest = m.tsv\nstages = split, clean\n")
    assert main(["run", "--config", str(cfg)]) == EXIT_USAGE


def test_alignment_error_in_run(tmp_path, capsys):
    write(tmp_path / "x.am", "a\nb\n")
    write(tmp_path / "x.en", "a\n")
    write(tmp_path / "m.tsv", "x\ttwo-file-aligned\tx.am\tx.en\n")
    cfg = write(tmp_path / "c.ini", "[pipeline]\nmanifest = m.tsv\noutput_dir = out\n")
    assert main(["-q", "run", "--config", str(cfg)]) == EXIT_DATA
    err = error_line(capsys)
    assert err["error"] == "AlignmentError" and err["stage"] == "ingest"


def test_run_uses_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "envout"))
    text = read(SYNTHETIC / "pipeline.ini").replace("manifest.tsv", str(SYNTHETIC / "manifest.tsv"))
    cfg = write(tmp_path / "c.ini", "\n".join(
        line for line in text.splitlines() if not line.startswith("output_dir")))
    assert main(["-q", "run", "--config", str(cfg)]) == EXIT_OK
    assert (tmp_path / "envout" / "run_record.json").exists()


def test_stats_declared(capsys):
    assert main(["stats", "--manifest", str(DATA / "sources_manifest.tsv"), "--declared"]) == 0
    assert "total\t1140130" in capsys.readouterr().out


def test_bpe_roundtrip(tmp_path):
    text = write(tmp_path / "t", "ሰላም ነው ሰላም\nhello hello world\n")
    assert main(["-q", "bpe-learn", "--in", str(text), "--out", str(tmp_path / "m"),
                 "--merges", "10"]) == EXIT_OK
    assert main(["-q", "bpe-apply", "--model", str(tmp_path / "m"), "--in", str(text),
                 "--out", str(tmp_path / "seg")]) == EXIT_OK
    segmented = read(tmp_path / "seg").splitlines()
    assert "".join(segmented[0].split()).replace("</w>", " ").strip() == "ሰላም ነው ሰላም"


def test_stepwise_commands_match_run(tmp_path):
    stages = ["clean", "expand", "normalize", "dedup", "split"]
    cfg = PipelineConfig(SYNTHETIC / "manifest.tsv", tmp_path / "run", stages=tuple(stages))
    cfg.split = type(cfg.split)(seed=7)
    run(cfg)

    w = tmp_path / "steps"
    w.mkdir()
    steps = [
        ["ingest", "--manifest", str(SYNTHETIC / "manifest.tsv"), "--out", str(w / "raw")],
        ["clean", "--in", str(w / "raw"), "--out", str(w / "clean")],
        ["normalize", "--in", str(w / "clean.am"), "--out", str(w / "norm.am")],
        ["dedup", "--in", str(w / "norm"), "--out", str(w / "dedup")],
        ["split", "--in", str(w / "dedup"), "--out-dir", str(w), "--seed", "7"],
    ]
    for step in steps:
        if step[0] == "dedup":
            shutil.copy(w / "clean.en", w / "norm.en")
        assert main(["-q", *step]) == EXIT_OK, step
    for name in ("train", "valid", "test"):
        for side in ("am", "en"):
            f = f"{name}.{side}"
            assert (w / f).read_bytes() == (tmp_path / "run" / f).read_bytes(), f


def test_console_script_version():
    proc = subprocess.run([sys.executable, "-m", "ethio_prep.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "0.1.0"


@pytest.mark.parametrize("argv", [["clean", "--help"], ["--help"]])
def test_help_exits_cleanly(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 0
