import csv
import json
import subprocess
import sys

import pytest

from mgoe.cli import main
from mgoe.config import dump_config, parse_config, parse_mu_grid, plan_to_dict
from mgoe.exceptions import ConfigurationError, OutputError
from mgoe.experiment import ExperimentPlan, run_sweep
from mgoe.io import SWEEP_HEADER, ResultBundle, write_results

SMALL = ["--n", "40", "--m", "5", "--seed", "3", "--bootstrap", "50"]


def _files(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


# --- config ---------------------------------------------------------------


def test_example_config():
    plan = parse_config('{"N": 1000, "M": 10, "mu": 0.8, "seed": 1}')
    assert (plan.N, plan.M, plan.mu_grid, plan.seed) == (1000, 10, (0.8,), 1)


def test_missing_n():
    with pytest.raises(ConfigurationError, match="'N'"):
        parse_config("{}")


def test_unknown_keys_named():
    with pytest.raises(ConfigurationError, match="'Mu'"):
        parse_config('{"N": 10, "Mu": 0.5}')
    with pytest.raises(ConfigurationError, match="bootstrap.'reps'"):
        parse_config('{"N": 10, "bootstrap": {"reps": 5}}')


def test_malformed_json_reports_line():
    with pytest.raises(ConfigurationError, match="line 3"):
        parse_config('{\n "N": 10,\n "M": ,\n}')


def test_invalid_values():
    with pytest.raises(ConfigurationError):
        parse_config('{"N": 10, "mu": 1.5}')
    with pytest.raises(ConfigurationError):
        parse_config('{"N": 10, "mu": 0.5, "mu_grid": [0.5]}')


def test_mu_grid_strings():
    assert parse_mu_grid("0.5:1.0:0.1") == (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    assert parse_mu_grid("1:1:0.1") == (1.0,)
    for bad in ("0.5:1.0", "a:b:c", "1:0.5:0.1", "0.5:1:0"):
        with pytest.raises(ConfigurationError):
            parse_mu_grid(bad)


def test_config_round_trip():
    plan = ExperimentPlan(N=77, M=9, sigma=0.3, seed=2**63, mu_grid=(0.1, 0.7), fence_k=None,
                          density_range=(-2.5, 2.5), degrees=(3, 5), gap_density_pooled=True,
                          gap_zero_convention="drop", extension="cyclic", level=0.9)
    assert parse_config(dump_config(plan)) == plan
    assert parse_config(json.dumps(plan_to_dict(ExperimentPlan(N=5)))) == ExperimentPlan(N=5)


# --- io -------------------------------------------------------------------


def test_empty_bundle_writes_only_config(tmp_path):
    written = write_results(ResultBundle(plan=ExperimentPlan(N=10), command="sweep"), "both", tmp_path)
    assert [p.name for p in written] == ["config.json"]
    echo = json.loads((tmp_path / "config.json").read_text())
    assert echo["config"]["N"] == 10 and echo["command"] == "sweep"


def test_one_point_sweep_csv(tmp_path):
    plan = ExperimentPlan(N=30, M=4, seed=1, mu_grid=(0.9,), n_resamples=30)
    sweep = run_sweep(plan)
    write_results(ResultBundle(plan=plan, command="sweep", sweep=sweep), "both", tmp_path)
    rows = list(csv.reader(open(tmp_path / "sweep.csv")))
    assert tuple(rows[0]) == SWEEP_HEADER
    assert len(rows) == 2
    assert float(rows[1][0]) == 0.9
    # 17 significant digits round-trip the double exactly
    assert float(rows[1][1]) == sweep.mean_r[0]
    doc = json.loads((tmp_path / "results.json").read_text())
    assert doc["results"]["sweep"]["mean_r"] == sweep.mean_r
    assert doc["results"]["sweep"]["slope"] is None


def test_invalid_format(tmp_path):
    with pytest.raises(ConfigurationError):
        write_results(ResultBundle(plan=ExperimentPlan(N=10)), "xml", tmp_path)


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputError):
        write_results(ResultBundle(plan=ExperimentPlan(N=10)), "csv", blocker / "sub")


# --- cli ------------------------------------------------------------------


def test_help_and_version(capsys):
    for argv in (["--help"], ["sweep", "--help"], ["--version"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 0


def test_usage_errors(capsys):
    for argv in (["density", "--bogus"], [], ["nosuch"], ["density", "--n", "ten"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2
        assert _error(capsys)["error"] == "usage"


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["density", "--out", str(tmp_path)]) == 3
    assert _error(capsys) == {"error": "config", "message": "required key 'N' is missing (use --n or a config file)"}
    assert main(["density", "--n", "10", "--mu", "2", "--out", str(tmp_path)]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text('{"N": 10,\n "M": }')
    assert main(["density", "--config", str(bad), "--out", str(tmp_path)]) == 3
    assert "line 2" in _error(capsys)["message"]


def test_numerical_error_exit_code(tmp_path, capsys):
    # members of one or two levels cannot support any unfolding polynomial
    rc = main(["nnsd", "--n", "20", "--m", "3", "--mu", "0.01", "--out", str(tmp_path)])
    assert rc == 5 and _error(capsys)["error"] == "numerical"


def test_output_error_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    rc = main(["baseline", *SMALL, "--out", str(blocker / "sub")])
    assert rc == 6 and _error(capsys)["error"] == "io"


def test_config_file_with_overrides(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"N": 30, "M": 3, "mu": 0.9, "seed": 4}))
    assert main(["gapratio", "--config", str(cfg), "--m", "4", "--out", str(tmp_path / "o")]) == 0
    echo = json.loads((tmp_path / "o" / "config.json").read_text())["config"]
    assert (echo["N"], echo["M"], echo["mu_grid"], echo["analyses"]) == (30, 4, [0.9], ["gap_ratio"])


def test_subcommand_outputs(tmp_path):
    expected = {
        "sample": {"config.json", "sizes.csv", "spectra.csv", "results.json"},
        "density": {"config.json", "density.csv", "bimodality.csv", "results.json"},
        "nnsd": {"config.json", "nnsd.csv", "unfolding.csv", "results.json"},
        "gapratio": {"config.json", "gapratio.csv", "gapratio_summary.csv",
                     "gapratio_density.csv", "results.json"},
        "baseline": {"config.json", "baseline.csv", "results.json"},
    }
    for cmd, names in expected.items():
        out = tmp_path / cmd
        extra = ["--dump-spectra"] if cmd == "sample" else []
        assert main([cmd, *SMALL, *extra, "--out", str(out)]) == 0
        assert set(_files(out)) == names
    out = tmp_path / "sweep"
    assert main(["sweep", *SMALL, "--mu-grid", "0.8:1.0:0.1", "--out", str(out)]) == 0
    assert len(list(csv.reader(open(out / "sweep.csv")))) == 4


def test_gapratio_csv_header(tmp_path):
    assert main(["gapratio", *SMALL, "--format", "csv", "--out", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / "gapratio.csv")))
    assert rows[0] == ["mu", "member_index", "r"] and len(rows) == 6
    assert not (tmp_path / "results.json").exists()


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("MGOE_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["baseline", *SMALL]) == 0
    assert (tmp_path / "env" / "baseline.csv").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "mgoe", "baseline", *SMALL, "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert str(tmp_path / "baseline.csv") in proc.stdout
