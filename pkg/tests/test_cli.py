import csv
import json
import subprocess
import sys

import pytest

from fractime import __version__
from fractime.cli import SUITE, main, run, validate
from fractime._errors import SchemaError
from fractime.reports import config_hash

STRICHARTZ = {"kind": "strichartz",
              "exponents": {"d": 1, "gamma": 2, "alpha": "1/2", "q": 4, "r": 4, "s": "-1/4"},
              "j_range": [3, 4, 5, 6], "trials": 4}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def test_dim_cantor_exit_zero(tmp_path):
    cfg = {"kind": "dim", "set": {"kind": "cantor", "alpha": 0.5, "depth": 10},
           "assouad": {"alpha": 0.5, "window_exps": [0, 2, 4, 6, 8]}, "thresholds": {"max_sup": 16}}
    out = tmp_path / "out"
    assert main(["--out", str(out), "dim", str(write(tmp_path, cfg))]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["status"] == "pass" and rep["result"]["assouad"]["sup_value"] <= 16
    assert rep["config_hash"] == config_hash(cfg) and rep["version"] == __version__
    assert rep["seed"] == 0


def test_expected_failure_confirmed(tmp_path):
    cfg = dict(STRICHARTZ, fail_expected=True)
    assert run("strichartz", write(tmp_path, cfg), tmp_path / "o") == 0


def test_assertion_failure_exit_one(tmp_path):
    assert run("strichartz", write(tmp_path, STRICHARTZ), tmp_path / "o") == 1
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["status"] == "fail" and rep["checks"][0]["ok"] is False


def test_schema_violation_exit_two_with_pointer(tmp_path, capsys):
    bad = dict(STRICHARTZ, exponents=dict(STRICHARTZ["exponents"], r="x4"))
    assert run("strichartz", write(tmp_path, bad), tmp_path / "o") == 2
    rec = json.loads((tmp_path / "o" / "error.json").read_text())
    assert rec["status"] == 2 and rec["error"] == "SchemaError" and rec["pointer"] == "/exponents/r"
    assert json.loads(capsys.readouterr().err) == rec


@pytest.mark.parametrize("doc,pointer", [
    ({"kind": "dim"}, "/"),
    ({"kind": "dim", "set": {"kind": "cantor", "alpha": 0.5, "depth": 4}, "bogus": 1}, "/"),
    ({"kind": "set", "set": {"kind": "cantor", "alpha": "half", "depth": 4}}, "/set/alpha"),
    ({"kind": "inhom", "exponents": {"d": 1}, "j_range": [4]}, "/exponents"),
])
def test_schema_pointers(doc, pointer):
    with pytest.raises(SchemaError) as exc:
        validate(doc, doc["kind"])
    assert exc.value.pointer == pointer


def test_malformed_json_exit_two(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text("{not json")
    assert run("dim", p, tmp_path / "o") == 2


def test_resolution_guard_exit_three(tmp_path):
    cfg = {"kind": "set", "set": {"kind": "cantor", "alpha": 0.5, "depth": 30}}
    assert run("set", write(tmp_path, cfg), tmp_path / "o") == 3
    rec = json.loads((tmp_path / "o" / "error.json").read_text())
    assert rec["error"] == "ResolutionError" and rec["status"] == 3


def test_config_error_exit_one(tmp_path):
    cfg = {"kind": "inhom", "exponents": {"d": 1, "gamma": 2, "alpha": "1/2", "rt": 4, "r": 4, "qt": 4, "q": 4},
           "j_range": [4, 5, 6, 7]}
    assert run("inhom", write(tmp_path, cfg), tmp_path / "o") == 1
    rec = json.loads((tmp_path / "o" / "error.json").read_text())
    assert rec["error"] == "ConfigError" and "alpha < d/gamma" in rec["message"]


def test_kind_must_match_subcommand(tmp_path):
    assert run("strichartz", write(tmp_path, {"kind": "dim", "set": {"kind": "explicit", "points": [0]}}),
               tmp_path / "o") == 2


def test_set_export(tmp_path):
    cfg = {"kind": "set", "set": {"kind": "cantor", "alpha": 0.5, "depth": 3},
           "measure": {"kind": "cantor", "alpha": 0.5, "depth": 3}}
    assert run("set", write(tmp_path, cfg), tmp_path / "o") == 0
    lines = (tmp_path / "o" / "points.csv").read_bytes().split(b"\r\n")
    assert len([x for x in lines if x]) == 8
    rows = list(csv.reader(open(tmp_path / "o" / "measure.csv", newline="")))
    assert rows[0] == ["position", "weight"] and len(rows) == 9


def test_plot_files_two_columns(tmp_path):
    cfg = dict(STRICHARTZ, fail_expected=True)
    run("strichartz", write(tmp_path, cfg), tmp_path / "o")
    rows = list(csv.reader(open(tmp_path / "o" / "ratios.plot.csv", newline="")))
    assert rows[0] == ["x", "y"] and all(len(r) == 2 for r in rows) and len(rows) == 5


def test_seed_override_and_flag_positions(tmp_path):
    cfg = write(tmp_path, dict(STRICHARTZ, fail_expected=True, seed=3))
    main(["--out", str(tmp_path / "a"), "strichartz", str(cfg)])
    main(["strichartz", str(cfg), "--seed", "5", "--out", str(tmp_path / "b"), "--threads", "2"])
    a = json.loads((tmp_path / "a" / "report.json").read_text())
    b = json.loads((tmp_path / "b" / "report.json").read_text())
    assert a["seed"] == 3 and b["seed"] == 5


def test_kernel_subcommands(tmp_path):
    young = {"kind": "kernel", "check": "young", "set": {"kind": "cantor", "alpha": 0.5, "depth": 6},
             "j": 5, "p": 2, "q": 2}
    assert run("kernel", write(tmp_path, young), tmp_path / "y") == 0
    norm = {"kind": "kernel", "check": "norm", "set": {"kind": "cantor", "alpha": 0.5, "depth": 8},
            "r": 4, "s_exp": 4, "j_range": [4, 5, 6, 7]}
    assert run("kernel", write(tmp_path, norm), tmp_path / "n") == 0


def test_suite_entries_validate():
    for _, name, doc in SUITE:
        validate(dict(doc, kind=name), name)


def test_all_subset_deterministic(tmp_path):
    cfg = write(tmp_path, {"kind": "all", "only": ["dim_cantor", "sharpness_tube", "inhom_sigma_half"]})
    for out in ("a", "b"):
        assert main(["--seed", "7", "--out", str(tmp_path / out), "all", str(cfg)]) == 0
    for sub in ("report.json", "dim_cantor/report.json", "sharpness_tube/tube.csv",
                "inhom_sigma_half/ratios.plot.csv"):
        assert (tmp_path / "a" / sub).read_bytes() == (tmp_path / "b" / sub).read_bytes()


def test_module_entry_point(tmp_path):
    p = write(tmp_path, {"kind": "set", "set": {"kind": "explicit", "points": [0.0, 0.5]}})
    res = subprocess.run([sys.executable, "-m", "fractime", "--out", str(tmp_path / "o"), "set", str(p)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "pass" in res.stdout


def test_success_clears_stale_error_record(tmp_path):
    out = tmp_path / "o"
    assert run("strichartz", write(tmp_path, {"kind": "strichartz"}), out) == 2
    assert (out / "error.json").exists()
    good = dict(STRICHARTZ, exponents=dict(STRICHARTZ["exponents"], s=0))
    assert run("strichartz", write(tmp_path, good), out) == 0
    assert not (out / "error.json").exists()
