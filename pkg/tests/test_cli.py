import csv

import numpy as np

from evla import cli, validate
from evla.validate import CriterionResult


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_registry_dump(tmp_path):
    out = tmp_path / "reg.csv"
    assert cli.main(["registry", "--out", str(out)]) == 0
    header, rows = _read_csv(str(out))
    assert header == ["material", "wavelength_nm", "key", "value", "unit",
                      "provenance"]
    mats = {r[0] for r in rows}
    assert {"blood", "wall", "pad", "skin"} <= mats
    # thermal rows carry no wavelength, optical rows do
    assert any(r[1] == "" and r[2] == "k" for r in rows)
    assert any(r[1] == "810" and r[2] == "mu_a" for r in rows)
    assert all(r[5] for r in rows)
    assert any(r[2] == "R_gas" for r in rows)


def test_fluence_csv_shape_and_causality(tmp_path):
    out = tmp_path / "flu.csv"
    rc = cli.main(["fluence", "--times", "0,5", "--grid", "12,14",
                   "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(str(out))
    assert header == ["r_mm", "z_mm", "t_s", "region", "phi_W_per_mm2"]
    z = np.linspace(-10.0, 10.0, 14)
    expect = 12 * (np.count_nonzero(z >= -1e-12)
                   + np.count_nonzero(z >= -5.0 - 1e-12))
    assert len(rows) == expect
    regions = {"fiber_column", "blood_annulus", "wall", "pad", "skin"}
    for r_mm, z_mm, t_s, region, phi in rows:
        assert region in regions
        assert float(z_mm) >= -float(t_s) - 1e-9   # v = 1 mm/s
        float(phi)  # parses
    # values are stable under a 9-significant-digit round trip
    assert all(row[4] == "%.9g" % float(row[4]) for row in rows)


def test_fluence_writes_stdout_by_default(capsys):
    assert cli.main(["fluence", "--times", "0", "--grid", "4,5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "r_mm,z_mm,t_s,region,phi_W_per_mm2"
    assert len(lines) > 1


def test_temperature_csv_and_case2_warning(tmp_path, capsys):
    cfg = tmp_path / "case2.ini"
    cfg.write_text("[protocol]\nu = 70\n")
    out = tmp_path / "tmp.csv"
    rc = cli.main(["temperature", "--config", str(cfg), "--times", "0",
                   "--grid", "6,7", "--modes", "6", "--out", str(out)])
    assert rc == 0
    assert "u = 70" in capsys.readouterr().err
    header, rows = _read_csv(str(out))
    assert header == ["r_mm", "z_mm", "t_s", "region", "T_C"]
    assert len(rows) == 6 * 4      # z >= 0 only at t = 0
    # uniform start, up to the truncated 6-mode projection residual
    assert all(abs(float(r[4]) - 38.0) < 0.6 for r in rows)


def test_damage_table_matches_direct_call(tmp_path):
    out = tmp_path / "t3.csv"
    assert cli.main(["damage", "--table3", "--out", str(out)]) == 0
    header, rows = _read_csv(str(out))
    assert header == ["temp_C", "material", "t_crit_s"]
    assert len(rows) == 6 * 4
    got = {(r[0], r[1]): r[2] for r in rows}
    assert got[("50", "blood")] == "344711.889"
    assert got[("100", "skin")] == "2.63699715e-11"
    for temp in ("50", "60", "70", "80", "90", "100"):
        assert got[(temp, "wall")] == got[(temp, "pad")]


def test_damage_map_csv(tmp_path):
    out = tmp_path / "map.csv"
    rc = cli.main(["damage", "--map", "--grid", "3,4", "--out", str(out)])
    assert rc == 0
    header, rows = _read_csv(str(out))
    assert header == ["r_mm", "z_mm", "omega", "t_crit_s"]
    assert len(rows) == 12
    for _, _, omega, t_crit in rows:
        assert float(omega) >= 0.0
        assert t_crit == "inf" or float(t_crit) > 0.0
    # somewhere behind the tip the dose diverges and the time is finite
    assert any(t == "inf" for *_, t in rows)


def test_validate_subset_and_exit_zero(tmp_path):
    out = tmp_path / "val.txt"
    assert cli.main(["validate", "--only", "a3,a9", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("A3") and "PASS" in lines[0]
    assert lines[1].startswith("A9") and "PASS" in lines[1]
    assert lines[2] == "2 of 2 criteria passed"


def test_validate_reports_failure_with_exit_one(tmp_path, monkeypatch):
    def broken(ctx):
        return CriterionResult("A3", "radial branch table", False,
                               "forced failure", "exact", 0.0)
    monkeypatch.setitem(validate.CRITERIA, "a3", broken)
    out = tmp_path / "val.txt"
    assert cli.main(["validate", "--only", "a3", "--out", str(out)]) == 1
    text = out.read_text()
    assert "FAIL" in text and "0 of 1" in text


def test_config_errors_exit_two(tmp_path, capsys):
    assert cli.main(["fluence", "--config", "/does/not/exist.ini"]) == 2
    assert cli.main(["fluence", "--times", "1,oops"]) == 2
    assert cli.main(["fluence", "--grid", "80"]) == 2
    assert cli.main(["fluence", "--grid", "1,9"]) == 2
    assert cli.main(["validate", "--only", "a99"]) == 2
    err = capsys.readouterr().err
    assert err.count("error:") == 5

    bad = tmp_path / "bad.ini"
    bad.write_text("[protocol]\nnonsense = 3\n")
    assert cli.main(["fluence", "--config", str(bad)]) == 2


def test_env_config_is_picked_up(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "short.ini"
    cfg.write_text("[protocol]\nt_end = 4\n")
    monkeypatch.setenv("EVLA_CONFIG", str(cfg))
    # t = 5 now falls outside the heating window
    assert cli.main(["fluence", "--times", "5", "--grid", "4,5"]) == 2
    assert "error:" in capsys.readouterr().err
    monkeypatch.delenv("EVLA_CONFIG")
    assert cli.main(["fluence", "--times", "5", "--grid", "4,5"]) == 0


def test_preset_changes_the_numbers(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    args = ["fluence", "--times", "0", "--grid", "5,6"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--preset", "980-10w", "--out", str(b)]) == 0
    _, rows_a = _read_csv(str(a))
    _, rows_b = _read_csv(str(b))
    phi_a = [float(r[4]) for r in rows_a]
    phi_b = [float(r[4]) for r in rows_b]
    assert phi_a != phi_b
