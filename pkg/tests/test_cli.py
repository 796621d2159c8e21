import csv
import dataclasses
import io
import json
import math
from importlib import resources

import numpy as np
import pytest

from disclination_qm import cli

WORKED_FLAGS = ["--potential", "anharmonic", "--a", "1", "--b", "1", "--alpha", "0.75", "--B", "1",
                "--phi", "0.75", "--ell", "1"]


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_body(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write_config(tmp_path, doc):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(doc))
    return str(path)


# --- point commands -----------------------------------------------------------------------


def test_flat_oscillator_energy(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "--potential", "harmonic", "--omega", "1")
    assert code == 0
    assert json.loads(out) == {"energy": 1.0}


def test_worked_energy_with_oracle(capsys):
    code, out, _ = run_cli(capsys, "spectrum", *WORKED_FLAGS, "--oracle")
    record = json.loads(out)
    assert code == 0
    assert record["energy"] == pytest.approx(4.0573661755, abs=1e-9)
    assert record["numerov"] == pytest.approx(record["energy"], abs=1e-6)


def test_thermo_point(capsys):
    code, out, _ = run_cli(capsys, "thermo", "--potential", "harmonic", "--omega", "1", "--beta", "1")
    record = json.loads(out)
    assert code == 0
    assert record["heat_capacity"] == pytest.approx(1 / math.sinh(1) ** 2, rel=1e-11)
    assert record["temperature"] == 1.0


def test_thermo_requires_beta(capsys):
    code, _, err = run_cli(capsys, "thermo", "--potential", "harmonic", "--omega", "1")
    assert code == 2 and "beta" in err


def test_magnetics_point_and_current_switch(capsys):
    flags = [*WORKED_FLAGS[:-2], "--ell", "0"]
    _, literal, _ = run_cli(capsys, "magnetics", *flags)
    _, exact, _ = run_cli(capsys, "magnetics", *flags, "--exact-current")
    assert json.loads(literal)["persistent_current"] == pytest.approx(
        -json.loads(exact)["persistent_current"], rel=1e-12)
    assert json.loads(literal)["temperature"] == "zero"


def test_magnetics_kink_is_a_config_error(capsys):
    code, _, err = run_cli(capsys, "magnetics", "--potential", "harmonic", "--omega", "1", "--phi", "1",
                           "--ell", "1")
    assert code == 2 and "configuration error" in err


def test_entropy_point(capsys):
    code, out, _ = run_cli(capsys, "entropy", "--potential", "harmonic", "--omega", "1", "--alpha", "0.75",
                           "--B", "1", "--phi", "0.75", "--convention",
                           "plain_dr+ft_of_density_modulus_unnormalized@Bx2")
    record = json.loads(out)
    assert code == 0
    assert record["S_r"] == pytest.approx(0.39417, abs=5e-3)
    assert record["S_p"] == pytest.approx(2.18524, abs=5e-3)


def test_unknown_convention(capsys):
    code, _, _ = run_cli(capsys, "entropy", "--potential", "harmonic", "--omega", "1", "--convention", "bogus")
    assert code == 2


# --- sweeps and formats ------------------------------------------------------------------------


def test_sweep_csv_has_header_and_rows(capsys):
    code, out, _ = run_cli(capsys, "spectrum", *WORKED_FLAGS, "--sweep", "alpha:0.25:1:4")
    assert code == 0
    first = out.splitlines()[0]
    assert first.startswith("# command=spectrum; units: hbar=1, kappa=1, M=1, |e|=1, charge_sign=+1")
    rows = csv_body(out)
    assert [float(r["alpha"]) for r in rows] == [0.25, 0.5, 0.75, 1.0]
    assert float(rows[2]["energy"]) == pytest.approx(4.0573661755, abs=1e-9)


def test_sweep_json_layout(capsys):
    code, out, _ = run_cli(capsys, "thermo", "--potential", "harmonic", "--omega", "1", "--sweep",
                           "beta:0.5:2:4", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert set(doc) == {"assumptions", "sweep", "rows"}
    assert doc["sweep"] == {"variable": "beta", "min": 0.5, "max": 2.0, "steps": 4}
    assert [r["beta"] for r in doc["rows"]] == [0.5, 1.0, 1.5, 2.0]


def test_integer_sweep(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "--potential", "harmonic", "--omega", "1", "--sweep", "n:0:3:4")
    rows = csv_body(out)
    assert code == 0
    assert [r["n"] for r in rows] == ["0", "1", "2", "3"]
    assert [float(r["energy"]) for r in rows] == [1.0, 3.0, 5.0, 7.0]


def test_integer_sweep_must_land_on_integers(capsys):
    code, _, err = run_cli(capsys, "spectrum", "--potential", "harmonic", "--omega", "1", "--sweep", "n:0:3:3")
    assert code == 2 and "integers" in err


@pytest.mark.parametrize("sweep", ["gamma:0:1:3", "alpha:0:1", "alpha:a:1:3", "alpha:0:1:0"])
def test_bad_sweeps(capsys, sweep):
    code, _, _ = run_cli(capsys, "spectrum", "--potential", "harmonic", "--omega", "1", "--sweep", sweep)
    assert code == 2


def test_sweep_is_order_preserving_under_threads(capsys, monkeypatch):
    argv = ["spectrum", *WORKED_FLAGS, "--sweep", "B:0:4:9"]
    monkeypatch.setenv("DISCLINATION_QM_THREADS", "1")
    _, serial, _ = run_cli(capsys, *argv)
    monkeypatch.setenv("DISCLINATION_QM_THREADS", "4")
    _, parallel, _ = run_cli(capsys, *argv)
    assert serial == parallel


def test_output_file(capsys, tmp_path):
    target = tmp_path / "e.json"
    code, out, _ = run_cli(capsys, "spectrum", "--potential", "harmonic", "--omega", "2", "--output", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text()) == {"energy": 2.0}


# --- profile commands ---------------------------------------------------------------------------


def test_wavefunction_profile(capsys):
    code, out, _ = run_cli(capsys, "wavefunction", "--potential", "harmonic", "--omega", "1", "--points", "400")
    rows = csv_body(out)
    assert code == 0 and len(rows) == 400
    assert list(rows[0]) == ["r", "s", "psi", "density"]
    r = np.array([float(row["r"]) for row in rows])
    rho = np.array([float(row["density"]) for row in rows])
    # |psi|^2 alpha r dr integrates to one (alpha = 1)
    assert np.trapezoid(rho * r, r) == pytest.approx(1.0, abs=1e-4)


def test_effective_potential_profile(capsys):
    code, out, _ = run_cli(capsys, "effective-potential", *WORKED_FLAGS, "--points", "20", "--flux-term",
                           "absolute")
    rows = csv_body(out)
    assert code == 0 and len(rows) == 20
    assert float(rows[0]["r"]) > 0


def test_effective_potential_rejects_origin(capsys):
    code, _, _ = run_cli(capsys, "effective-potential", *WORKED_FLAGS, "--r-min", "0", "--r-max", "2")
    assert code == 2


# --- configuration files ---------------------------------------------------------------------------


def test_config_file_and_flag_override(capsys, tmp_path):
    path = write_config(tmp_path, {"command": "spectrum",
                                   "parameters": {"potential": "harmonic", "omega": 1.0, "n": 1}})
    _, out, _ = run_cli(capsys, "spectrum", "--config", path)
    assert json.loads(out) == {"energy": 3.0}
    _, out, _ = run_cli(capsys, "spectrum", "--config", path, "--n", "2")
    assert json.loads(out) == {"energy": 5.0}


@pytest.mark.parametrize("doc", [
    {"command": "spectrum", "parameters": {"potential": "harmonic", "omega": 1.0, "frequency": 2}},
    {"command": "spectrum", "extras": {}},
    {"command": "spectrum", "options": {"colour": "red"}},
    {"command": "spectrum", "parameters": {"potential": "harmonic", "omega": "one"}},
    {"command": "spectrum", "parameters": {"potential": "harmonic", "omega": 1.0, "n": 0.5}},
    {"command": "wavefunction", "sweep": {"variable": "alpha", "min": 0.1, "max": 1, "steps": 3}},
    {"command": "thermo", "parameters": {"potential": "harmonic", "omega": 1.0}},
    ["spectrum"],
])
def test_strict_config_rejection(capsys, tmp_path, doc):
    code, _, err = run_cli(capsys, "spectrum", "--config", write_config(tmp_path, doc))
    assert code == 2
    assert "configuration error" in err


def test_unreadable_and_malformed_config(capsys, tmp_path):
    assert run_cli(capsys, "spectrum", "--config", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(capsys, "spectrum", "--config", str(bad))[0] == 2


@pytest.mark.parametrize("argv", [
    ["spectrum", "--omega", "1"],
    ["spectrum", "--potential", "morse"],
    ["spectrum", "--potential", "harmonic", "--omega", "1", "--alpha", "1.5"],
    ["spectrum", "--potential", "anharmonic", "--a", "0", "--b", "1"],
    ["frobnicate"],
])
def test_invalid_invocations(capsys, argv):
    assert run_cli(capsys, *argv)[0] == 2


def test_schema_mirrors_dataclasses():
    schema = json.loads(resources.files("disclination_qm").joinpath("data/run_config.schema.json").read_text())
    props = schema["properties"]
    assert set(props) == {"command", "parameters", "sweep", "output", "tolerances", "options"}
    assert set(props["command"]["enum"]) == set(cli.COMMANDS)
    for name, cls in (("parameters", cli.Parameters), ("sweep", cli.Sweep), ("output", cli.Output),
                      ("tolerances", cli.Tolerances), ("options", cli.Options)):
        section = props[name]
        if "anyOf" in section or "oneOf" in section:
            section = next(s for s in section.get("anyOf", section.get("oneOf")) if s.get("type") == "object")
        assert set(section["properties"]) == {f.name for f in dataclasses.fields(cls)}, name
        assert section["additionalProperties"] is False


def test_config_from_dict_round_trip():
    cfg = cli.config_from_dict({"command": "thermo", "parameters": {"potential": "harmonic", "omega": 2,
                                                                      "beta": 1},
                                "sweep": {"variable": "beta", "min": 0.1, "max": 1, "steps": 2}})
    assert cfg.parameters.omega == 2.0 and isinstance(cfg.parameters.omega, float)
    assert cfg.sweep.values() == [0.1, 1.0]


# --- tables and validation -----------------------------------------------------------------------------


def test_tables_csv(capsys):
    code, out, err = run_cli(capsys, "tables", "--which", "1")
    assert code == 0
    assert out.startswith("# convention=plain_dr+ft_of_density_modulus_unnormalized@Bx2")
    rows = csv_body(out)
    assert len(rows) == 36
    anchor = rows[0]
    assert anchor["paper_S_r"] == "0.39417"
    assert float(anchor["S_r"]) == pytest.approx(0.39417, abs=5e-3)
    assert "cells within 5e-3" in err


def test_tables_json_with_explicit_convention(capsys):
    code, out, _ = run_cli(capsys, "tables", "--which", "3", "--convention", "standard", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["convention"] == "conical_alpha_r_dr+ft_of_wavefunction@Bx1"
    assert len(doc["rows"]) == 36
    assert all(t["passed"] for t in doc["trends"])


def test_outputs_are_deterministic(capsys):
    argv = ["entropy", "--potential", "harmonic", "--omega", "1", "--sweep", "B:0:2:3"]
    first = run_cli(capsys, *argv)[1]
    second = run_cli(capsys, *argv)[1]
    assert first == second
    assert io.StringIO(first).readline().startswith("# command=entropy")
