"""Command-line surface."""
import csv
import io

import pytest

from psg_pdos.cli import SIMULATE_COLUMNS, SOLVE_COLUMNS, fmt, main
from psg_pdos.equilibrium import Region, threshold_td
from psg_pdos.fixtures import region_fixture, regime_pdos
from psg_pdos.mechanism_lab import SweepRow
from psg_pdos.model import modify_pdos
from psg_pdos.scenario_io import dumps, save_scenario


@pytest.fixture
def files(tmp_path):
    out = {}
    assert main(["canonical", "--out", str(tmp_path / "canonical.yaml")]) == 0
    out["canonical"] = tmp_path / "canonical.yaml"
    for r in (Region.ACTIVE_DETERRENCE, Region.VULNERABLE_ATTACKER, Region.STATUS_QUO):
        out[r.value] = tmp_path / f"{r.value}.yaml"
        save_scenario(region_fixture(r), out[r.value])
    return out


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_fmt():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(7) == "7" and fmt(True) == "true" and fmt(float("nan")) == "nan"


def test_classify_canonical(files, capsys):
    assert main(["classify", str(files["canonical"])]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "active_deterrence"
    assert "bp_tgg\t0.325" in out and "v_lockdown\tfails" in out


def test_classify_invalid(tmp_path, capsys):
    text = dumps(region_fixture(Region.ACTIVE_DETERRENCE)).replace(
        "o: {b_given_l_p: 0.1, b_given_d_p: 0.9}", "o: {b_given_l_p: 0.1, b_given_d_p: 0.6, n_given_d_p: 0.6}")
    path = tmp_path / "bad.yaml"
    path.write_text(text)
    assert main(["classify", str(path)]) == 2
    assert "sums to 1.2" in capsys.readouterr().err


def test_classify_parse_error(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("lambda: 1\nwhat: 2\n")
    assert main(["classify", str(path)]) == 2
    assert "what" in capsys.readouterr().err


def test_classify_boundary(tmp_path, capsys):
    base = regime_pdos()
    path = tmp_path / "b.yaml"
    save_scenario(modify_pdos(base, q_d=threshold_td(base)), path)
    assert main(["classify", str(path)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("boundary")


def test_solve_writes_csv(files, tmp_path):
    out = tmp_path / "solve.csv"
    assert main(["solve", str(files["active_deterrence"]), "--out", str(out)]) == 0
    (row,) = rows(out.read_text())
    assert tuple(row) == SOLVE_COLUMNS
    assert row["region"] == "active_deterrence"
    assert float(row["max_deviation_gain"]) <= 1e-9
    assert row["sigma_dS_p"] == "0.518518518519"


def test_solve_exit_codes(files, capsys):
    assert main(["solve", str(files["canonical"])]) == 3
    assert main(["solve", str(files["canonical"]), "--allow-outside-regime"]) == 1
    assert "verification failed" in capsys.readouterr().err
    assert main(["solve", str(files["vulnerable_attacker"]), "--verify-tolerance", "1e-20"]) == 1


def test_sweep_csv(files, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", str(files["vulnerable_attacker"]), "--knob", "legal", "--from", "0.5",
                 "--to", "0.05", "--steps", "5", "--out", str(out)]) == 0
    table = rows(out.read_text())
    assert len(table) == 5 and tuple(table[0]) == SweepRow.columns()
    assert len({r["sigma_dS_p"] for r in table}) == 1


def test_simulate_csv_deterministic(files, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["simulate", str(files["status_quo"]), "--replications", "3000", "--seed", "5",
                     "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    table = rows(a.read_text())
    assert tuple(table[0]) == SIMULATE_COLUMNS
    assert [r["sender_type"] for r in table] == ["l", "d"]


def test_missing_file(capsys, tmp_path):
    assert main(["solve", str(tmp_path / "nope.yaml")]) == 2
