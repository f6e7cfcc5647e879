import csv
import io
import json

import pytest

from bellsim.cli import EXPERIMENTS, main
from bellsim.detection import CountTable
from bellsim.experiments import BsaResult

FLAGS = (
    "--input --exact --shots --seed --config --format --out --v --epsilon --dephasing --chi --order".split()
)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_bsa_exact_json(capsys):
    code, out, _ = run(capsys, "bsa", "--input", "phi+", "--exact", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["settings"] == ["++", "-+", "+-", "--"]
    assert data["probabilities"][0] == pytest.approx([1 / 16, 0, 0, 0], abs=1e-12)


def test_bsa_sampled_is_byte_identical(capsys):
    first = run(capsys, "bsa", "--input", "psi-", "--shots", "450", "--seed", "7")
    second = run(capsys, "bsa", "--input", "psi-", "--shots", "450", "--seed", "7")
    assert first[0] == 0 and first == second
    data = json.loads(first[1])
    assert data["counts"]["seed"] == 7


def test_bsa_sampled_csv_reparses(capsys):
    code, out, _ = run(capsys, "bsa", "--shots", "450", "--seed", "3", "--format", "csv")
    assert code == 0
    table = CountTable.from_csv(out)
    assert table.inputs == ("phi+", "phi-", "psi+", "psi-")
    assert table.to_csv() == out


def test_bsa_json_round_trip(capsys):
    _, out, _ = run(capsys, "bsa", "--shots", "450", "--seed", "5", "--v", "0.9")
    res = BsaResult.from_json(json.loads(out))
    assert json.loads(json.dumps(res.to_json(), indent=2)) == json.loads(out)


def test_theta_scan_csv(tmp_path, capsys):
    path = tmp_path / "scan.csv"
    code, out, _ = run(capsys, "theta-scan", "--order", "2", "--out", str(path), "--format", "csv")
    assert code == 0 and out == ""
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert list(rows[0]) == ["theta_deg", "spurious_prob", "cos2_fit_residual"]
    assert all(float(r["cos2_fit_residual"]) < 1e-9 for r in rows)
    at45 = [r for r in rows if float(r["theta_deg"]) == 45.0][0]
    assert float(at45["spurious_prob"]) < 1e-12


def test_theta_scan_needs_second_order(capsys):
    code, _, err = run(capsys, "theta-scan", "--order", "1")
    assert code == 2 and "order" in err


def test_help_lists_everything(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0
    for name in EXPERIMENTS:
        assert name in out
    code, out, _ = run(capsys, "bsa", "--help")
    assert code == 0
    for flag in FLAGS:
        assert flag in out


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"shotz": 10}))
    code, _, err = run(capsys, "bsa", "--config", str(cfg))
    assert code == 2 and "shotz" in err


def test_wrong_type_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"v": "high"}))
    code, _, err = run(capsys, "bsa", "--config", str(cfg))
    assert code == 2 and "'v'" in err


def test_out_of_range_value_names_key(capsys):
    code, _, err = run(capsys, "bsa", "--v", "1.5")
    assert code == 2 and "'v'" in err


def test_bad_flag_exits_two(capsys):
    assert run(capsys, "bsa", "--order", "3")[0] == 2
    assert run(capsys, "nope")[0] == 2


def test_config_file_values_used(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"input": "phi-", "format": "csv"}))
    code, out, _ = run(capsys, "bsa", "--config", str(cfg))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["input"] for r in rows] == ["phi-"] * 4
    assert float(rows[1]["probability"]) == pytest.approx(1 / 16)


def test_env_seed_used_when_flag_absent(monkeypatch, capsys):
    monkeypatch.setenv("BSA_SEED", "7")
    from_env = run(capsys, "bsa", "--input", "psi-", "--shots", "450")
    monkeypatch.delenv("BSA_SEED")
    from_flag = run(capsys, "bsa", "--input", "psi-", "--shots", "450", "--seed", "7")
    assert from_env == from_flag
    monkeypatch.setenv("BSA_SEED", "99")
    assert run(capsys, "bsa", "--input", "psi-", "--shots", "450", "--seed", "7") == from_flag


def test_other_subcommands_run(capsys):
    code, out, _ = run(capsys, "encoding", "--alpha", "0.6", "--beta", "0.8j")
    assert code == 0 and json.loads(out)["fidelity"] == pytest.approx(1, abs=1e-9)
    code, out, _ = run(capsys, "superposition", "--format", "csv")
    assert code == 0
    probs = [float(r["probability"]) for r in csv.DictReader(io.StringIO(out))]
    assert probs == pytest.approx([1 / 32, 1 / 32, 0, 0], abs=1e-12)
    code, out, _ = run(capsys, "overlap-scan", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 21
    assert all(abs(float(r["vis_ab"]) - float(r["closed_form"])) < 1e-9 for r in rows)
    code, out, _ = run(capsys, "calibrate", "--format", "csv")
    assert code == 0
    params = {r["parameter"]: float(r["value"]) for r in csv.DictReader(io.StringIO(out))}
    assert 0.70 <= params["average_fidelity"] <= 0.90
