import json
import subprocess
import sys

import pytest

from quatrep.cli import build_parser, load_config, main
from quatrep.experiments import EXPERIMENTS, ConfigError, config_keys

SMALL_HULL = "sets: 2\npoints_per_set: 5\ngrid: 3\n"


def test_parser_has_every_experiment():
    parser = build_parser()
    for name in list(EXPERIMENTS) + ["all"]:
        args = parser.parse_args([name])
        assert args.command == name and args.out == "reports"


def test_config_sections(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("seed: 3\ntol: 0.5\nhull:\n  sets: 2\npsh:\n  lines: 1\nout: ignored\n")
    assert load_config(str(path), "hull") == {"seed": 3, "tol": 0.5, "sets": 2}
    jpath = tmp_path / "c.json"
    jpath.write_text(json.dumps({"jacobi": {"pairs": 5}}))
    assert load_config(str(jpath), "jacobi") == {"pairs": 5}
    assert load_config(None, "hull") == {}


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("a: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(str(bad), "hull")
    lst = tmp_path / "list.yaml"
    lst.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(str(lst), "hull")


def test_usage_errors(tmp_path, capsys):
    assert main(["no-such-command"]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("hull:\n  bogus: 1\n")
    assert main(["hull", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "bogus" in capsys.readouterr().err
    assert main(["psh", "--nodes", "5", "--out", str(tmp_path)]) == 2
    assert main(["hull", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path)]) == 2


def test_config_keys_are_declared():
    for name in EXPERIMENTS:
        assert "seed" in config_keys(name)
    assert "nodes" in config_keys("kernel-norm")


def test_passing_run_writes_reports(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(SMALL_HULL)
    assert main(["hull", "--config", str(cfg), "--out", str(tmp_path / "r"), "--seed", "4"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("PASS [hull]")
    report = json.loads((tmp_path / "r" / "hull.json").read_text())
    assert report["config"]["seed"] == 4 and report["passed"] is True
    assert all("ref" in c for c in report["checks"])


def test_failing_check_exit_code(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("pairs: 3\ntol: 0.0\n")
    assert main(["jacobi", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_byte_identical_reports(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(SMALL_HULL)
    outs = []
    for run in ("a", "b"):
        main(["hull", "--config", str(cfg), "--out", str(tmp_path / run)])
        outs.append(sorted((p.name, p.read_bytes()) for p in (tmp_path / run).iterdir()))
    assert outs[0] == outs[1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "quatrep", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
