import csv
import io
import json

import pytest

from pcmass import cli
from pcmass.config import ConfigError, RunConfig, SweepSpec, load_config
from pcmass.dispersion import MetamaterialEffective, Tabulated

QUICK = {"n_rho": 4, "n_z": 4, "refinement": 1}


def _write(tmp_path, cfg, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


@pytest.fixture
def n3_config(tmp_path):
    return _write(tmp_path, {"_comment": "quick n=3 stack",
                             "stack": {"d_h": 50, "d_l": 50, "host": {"type": "constant", "n": 3}},
                             "quadrature": QUICK, "atoms": ["H", "Cs"],
                             "bands": {"k_rho": [0.0, 0.01], "k_z_points": 3}})


# --- configuration -------------------------------------------------------

def test_round_trip(tmp_path):
    raw = {"stack": {"d_h": 40, "d_l": 60, "host": {"type": "metamaterial", "a": 30, "g": 0.7,
                                                    "dielectric": {"type": "hfo2_like"}}},
           "quadrature": {"n_rho": 5}, "regularization": {"omega_max": 9.0, "scheme": "freq"},
           "atoms": ["Li"], "sweep": {"n_h": {"start": 2, "stop": 4, "step": 1}}}
    cfg = RunConfig.from_dict(raw)
    again = RunConfig.from_dict(json.loads(cfg.dumps()))
    assert again.dumps() == cfg.dumps()
    assert again.sweep_spec().n_values == (2.0, 3.0, 4.0)
    assert isinstance(cfg.layer_stack().model_h, MetamaterialEffective)
    assert cfg.regularization_config().matching == "freq"


def test_defaults_and_comments():
    cfg = RunConfig.from_dict({"_note": 1, "stack": {"host": {"type": "constant", "n": 2, "_why": "x"}}})
    assert (cfg.stack["d_h"], cfg.stack["d_l"]) == (50.0, 50.0)
    assert cfg.atoms == ["H", "Li", "Na", "K", "Rb", "Cs", "Fr"]


def test_table_host_relative_path(tmp_path):
    (tmp_path / "n.csv").write_text("omega_eV,n\n1,2.0\n5,2.5\n10,2.2\n")
    cfg = load_config(_write(tmp_path, {"stack": {"host": {"type": "table", "path": "n.csv"}}}))
    assert isinstance(cfg.layer_stack().model_h, Tabulated)


@pytest.mark.parametrize("raw", [
    {"stack": {"host": {"type": "glass"}}},
    {"stack": {"d_h": -1, "host": {"type": "constant", "n": 2}}},
    {"stack": {"host": {"type": "constant", "n": "two"}}},
    {"quadrature": {"bogus": 1}},
    {"regularization": {"scheme": "sphere"}},
    {"stack": {"host": {"type": "table", "path": "missing.csv"}}},
    {"atoms": "H"},
    {"extra": {}},
    [],
])
def test_invalid_configs(raw):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(raw)


def test_sweep_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec()
    with pytest.raises(ConfigError):
        SweepSpec.from_dict({"n_h": {"start": 2, "stop": 4, "step": 0}})
    assert SweepSpec.from_dict({"n_h": [2, 3]}).to_dict() == {"d_h_fraction": 0.5, "n_h": [2.0, 3.0]}


# --- commands ------------------------------------------------------------

def test_missing_and_malformed_config(tmp_path, capsys):
    assert cli.main(["mass", "--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["mass", "--config", str(bad)]) == 2
    assert "invalid JSON" in capsys.readouterr().err


def test_unknown_atom_is_config_error(tmp_path):
    path = _write(tmp_path, {"atoms": ["Xx"], "ionize": {"delta_E_ion": -1.0}})
    assert cli.main(["ionize", "--config", path, "--out", str(tmp_path / "t.csv")]) == 2


def test_bands_csv(n3_config, tmp_path):
    out = tmp_path / "b.csv"
    assert cli.main(["bands", "--config", n3_config, "--out", str(out)]) == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["k_rho_invnm", "k_z_invnm", "pol", "band", "omega_eV"]
    assert {r[2] for r in rows[1:]} == {"TE", "TM"}
    assert all(0 < float(r[4]) <= 10.65 for r in rows[1:])


def test_mass_json_and_thread_determinism(n3_config, tmp_path):
    outs = []
    for t in ("1", "4", "16"):
        out = tmp_path / f"m{t}.json"
        assert cli.main(["mass", "--config", n3_config, "--out", str(out), "--threads", t]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    rep = json.loads(outs[0])
    for key in ("A_eV", "B_eV", "tol_achieved", "bands_included", "M", "vacuum_term_eV", "scheme",
                "converged", "delta_E_ion_eV"):
        assert key in rep
    assert rep["converged"] is True
    assert rep["delta_E_ion_eV"] == pytest.approx(2.0 / 3.0 * rep["B_eV"])


def test_mass_nonconvergence_exit_code(tmp_path):
    path = _write(tmp_path, {"stack": {"host": {"type": "constant", "n": 3}},
                             "quadrature": {"n_rho": 3, "n_z": 3, "refinement": 0}})
    out = tmp_path / "m.json"
    assert cli.main(["mass", "--config", path, "--out", str(out)]) == 3
    assert json.loads(out.read_text())["converged"] is False


def test_overrides(n3_config, tmp_path):
    out = tmp_path / "m.json"
    assert cli.main(["mass", "--config", n3_config, "--out", str(out), "--scheme", "freq", "--omega-max", "8"]) == 0
    rep = json.loads(out.read_text())
    assert rep["scheme"] == "freq"
    assert rep["vacuum_term_eV"] == pytest.approx(4 * 7.2973525693e-3 * 8 / (3 * 3.141592653589793))


def test_ionize_with_injected_shift(tmp_path):
    path = _write(tmp_path, {"ionize": {"delta_E_ion": -2.64}})
    out = tmp_path / "t.csv"
    assert cli.main(["ionize", "--config", path, "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert {r["symbol"]: r["I_pc_eV"] for r in rows}["Cs"] == "1.2600"


def test_ionize_empty_atom_list(tmp_path):
    path = _write(tmp_path, {"atoms": [], "ionize": {"delta_E_ion": -1.0}})
    out = tmp_path / "t.csv"
    assert cli.main(["ionize", "--config", path, "--out", str(out)]) == 0
    assert out.read_text() == "symbol,I_vac_eV,delta_eV,I_pc_eV,flag\n"


def test_ionize_computed(n3_config, tmp_path):
    out = tmp_path / "t.csv"
    assert cli.main(["ionize", "--config", n3_config, "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["symbol"] for r in rows] == ["H", "Cs"]
    assert float(rows[0]["delta_eV"]) < 0


def test_sweep_rows_and_error_column(tmp_path):
    path = _write(tmp_path, {"stack": {"host": {"type": "constant", "n": 1}},
                             "quadrature": dict(QUICK, refinement=2), "sweep": {"n_h": [1.5, 2]}})
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", "--config", path, "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["n_h"] for r in rows] == ["1.5", "2.0"]
    assert 0 < float(rows[0]["abs_delta_E_ion_eV"]) < float(rows[1]["abs_delta_E_ion_eV"])
    assert all(r["error"] == "" for r in rows)
    # a point that cannot converge is reported in the error column, not dropped
    path = _write(tmp_path, {"quadrature": {"n_rho": 2, "n_z": 2, "refinement": 0},
                             "sweep": {"n_h": [3]}}, "s2.json")
    assert cli.main(["sweep", "--config", path, "--out", str(out)]) == 3
    row = list(csv.DictReader(io.StringIO(out.read_text())))[0]
    assert row["A_eV"] == "" and "convergence" in row["error"]


def test_check_command(n3_config, capsys):
    assert cli.main(["check", "--config", n3_config]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["ok"] and rep["points"] > 0


def test_bad_threads(n3_config):
    assert cli.main(["mass", "--config", n3_config, "--threads", "-2"]) == 2
