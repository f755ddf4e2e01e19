import filecmp
import json
import subprocess
import sys

import pytest

from lrperc.cli import COMMANDS, main, resolve_config
from lrperc.output import read_csv, read_json, sha256

# tiny settings per subcommand so every one of them runs in a fraction of a second
SMALL = {
    "sample": ["n=8"],
    "distance": ["n=8", "replicates=20"],
    "lambda": ["n=4,8", "replicates=20"],
    "theta": ["beta=0", "n=4,8,16,32", "replicates=4"],
    "submult": ["m=2", "n=3", "replicates=50"],
    "theta-vs-beta": ["beta=1,2", "n=4,8,16,32", "replicates=200"],
    "tail": ["n=8", "replicates=1000", "fit_replicates=100", "theta=0.5"],
    "quantiles": ["n=4", "replicates=1000"],
    "diameter": ["beta=0", "n=2,4,8,16", "replicates=3"],
    "compare-kernels": ["beta=1", "n=8", "replicates=20", "kmax=3"],
    "coupling-check": ["n_fine=8", "n_coarse=4", "clouds=5"],
    "consets": ["n=7", "k_max=3", "replicates=10"],
    "cutpoints": ["m=8", "replicates=200"],
    "sphere": ["k=2,3", "replicates=200"],
    "oracle": ["n=3"],
    "verify": ["criteria=1", "scale=0.05"],
}


def _run(out, command, sets=(), *extra):
    argv = [command, "--out", str(out), "--seed", "7", *extra]
    for s in sets:
        argv += ["--set", s]
    return main(argv)


def _data_files(root):
    return sorted(p.relative_to(root) for p in root.rglob("*") if p.is_file() and p.name != "manifest.json")


def test_every_subcommand_has_small_settings():
    assert set(SMALL) == set(COMMANDS) and len(COMMANDS) == 16


@pytest.mark.parametrize("command", sorted(SMALL))
def test_subcommand_runs_and_writes_a_manifest(out_dir, command):
    assert _run(out_dir, command, SMALL[command]) == 0
    head, man = read_json(out_dir / command / "manifest.json")
    assert head == {"format": "lrperc-manifest", "version": 1}
    assert man["status"] == "complete" and man["exit_code"] == 0 and man["error"] is None
    assert len(man["outputs"]) >= 2
    for entry in man["outputs"]:
        assert sha256(out_dir / command / entry["path"]) == entry["sha256"]


def test_lambda_at_beta_zero(out_dir):
    assert _run(out_dir, "lambda", ["beta=0", "n=32"]) == 0
    head, rows = read_csv(out_dir / "lambda" / "lambda.csv")
    assert head.startswith("# lrperc ")
    assert len(rows) == 1 and rows[0]["statistic"] == "max corner mean distance"
    assert float(rows[0]["mean"]) == 31.0 and float(rows[0]["stderr"]) == 0.0
    assert float(rows[0]["lambda_hat"]) == 32.0


def test_oracle_json_law(out_dir):
    assert _run(out_dir, "oracle", ["n=3"], "--format", "json") == 0
    head, payload = read_json(out_dir / "oracle" / "oracle.json")
    assert head == {"format": "lrperc-oracle", "version": 1}
    assert payload["law"] == {"1": 0.25, "2": 0.75} and payload["expectation"] == 1.75


def test_config_file_and_resolved_snapshot(out_dir, tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[experiment]\nname = lambda\nn = 4\nbeta = 0.0\nreplicates = 5\n\n[caps]\nenumeration = 10\n")
    assert main(["lambda", "--config", str(ini), "--out", str(out_dir)]) == 0
    text = (out_dir / "lambda" / "resolved.ini").read_text()
    assert text.startswith("# lrperc resolved-config v1\n")
    assert "n = 4\n" in text and "enumeration = 10\n" in text and "seed = 1\n" in text
    assert "workers" not in text and "out" not in text.split("[caps]")[0].replace("name", "")


def test_command_line_overrides_the_config_file(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[experiment]\nname = lambda  ; must match\nn = 4\nseed = 3  # inline comment\n")
    cfg = resolve_config("lambda", str(ini), ["n=5,6"], "9", None, None, str(tmp_path))
    assert cfg["n"] == (5, 6) and cfg.seed == 9


@pytest.mark.parametrize("text,flag", [
    ("[experiment]\nbogus = 1\n", None),
    ("[experiment]\nname = theta\n", None),
    ("[elsewhere]\nn = 1\n", None),
    ("[experiment]\nbeta = -1\n", None),
    ("[experiment]\n", "d=4"),
])
def test_invalid_configs_exit_2_with_a_record(out_dir, tmp_path, capsys, text, flag):
    ini = tmp_path / "bad.ini"
    ini.write_text(text)
    argv = ["lambda", "--config", str(ini), "--out", str(out_dir)] + (["--set", flag] if flag else [])
    assert main(argv) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"]["kind"] == "config"


def test_guard_failures_are_recorded(out_dir):
    assert _run(out_dir, "diameter", ["d=2", "n=400", "replicates=1"]) == 2
    head, err = read_json(out_dir / "diameter" / "error.json")
    assert err["kind"] == "guard"
    man = read_json(out_dir / "diameter" / "manifest.json")[1]
    assert man["status"] == "error" and man["error"]["kind"] == "guard"
    # a later successful run clears the stale error record
    assert _run(out_dir, "diameter", ["beta=0", "n=2,4,8,16", "replicates=2"]) == 0
    assert not (out_dir / "diameter" / "error.json").exists()


def test_environment_variable_sets_the_default_output_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("LRPERC_OUT", str(tmp_path / "env"))
    assert main(["oracle", "--set", "n=3"]) == 0
    assert (tmp_path / "env" / "oracle" / "manifest.json").exists()


@pytest.mark.parametrize("command", ["lambda", "compare-kernels", "consets", "cutpoints"])
def test_reruns_and_worker_counts_give_identical_bytes(tmp_path, monkeypatch, command):
    monkeypatch.delenv("LRPERC_OUT", raising=False)
    sets = SMALL[command]
    roots = [tmp_path / "a", tmp_path / "b", tmp_path / "c"]
    for root, workers in zip(roots, ("1", "1", "3")):
        assert _run(root, command, sets, "--workers", workers) == 0
    files = _data_files(roots[0])
    assert files and all(_data_files(r) == files for r in roots[1:])
    for f in files:
        assert filecmp.cmp(roots[0] / f, roots[1] / f, shallow=False)
        assert filecmp.cmp(roots[0] / f, roots[2] / f, shallow=False)


def test_verify_reports_failures_through_the_exit_status(out_dir, capsys):
    assert _run(out_dir, "verify", ["criteria=14", "scale=0.02"]) in (0, 1)
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split()[1] == "14" and "criteria passed" in lines[-1]
    head, rows = read_csv(out_dir / "verify" / "summary.csv")
    assert rows[0]["criterion"] == "14" and rows[0]["status"] in ("pass", "fail")


def test_module_entry_point(out_dir):
    res = subprocess.run([sys.executable, "-m", "lrperc", "oracle", "--out", str(out_dir), "--set", "n=3"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (out_dir / "oracle" / "manifest.json").exists()


@pytest.mark.parametrize("argv", [["--help"], ["quantiles", "--help"], ["--version"]])
def test_help_and_version(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 0
    assert "lrperc" in capsys.readouterr().out
