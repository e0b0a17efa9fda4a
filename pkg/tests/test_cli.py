import json

import pytest

from relmono.cli import ExperimentConfig, bundled_config, bundled_configs, main, run
from relmono.errors import ConfigInvalid
from relmono.numerics import Tolerance


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_bundled_configs_round_trip():
    names = bundled_configs()
    assert len(names) >= 10
    for name in names:
        cfg = bundled_config(name)
        again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again == cfg
        assert again.digest() == cfg.digest()


def test_periods_run():
    rep = run(bundled_config("legendre_periods.json"))
    (f,) = rep.results["factors"]
    assert f["oracle_rel_err"] <= 1e-8
    assert f["tau"][1] > 0
    assert rep.version and len(rep.config_hash) == 64


def test_monodromy_cli(tmp_path, capsys):
    out = tmp_path / "mono.json"
    code = main(["monodromy", "--config", "bundled:legendre_monodromy.json", "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    mats = [l["rho"] for l in rep["results"]["loops"]]
    assert len(mats) == 2
    for M in mats:
        assert all((M[i][j] - (i == j)) % 2 == 0 for i in range(2) for j in range(2))
    assert mats[0] != mats[1]


def test_rank_cli_thin(tmp_path):
    seeds = write(tmp_path, "seeds.json", [[2, 4, -2, -4]])
    out = tmp_path / "rank.json"
    code = main(["rank", "--config", "bundled:thinmon_rank.json", "--max-word-len", "2",
                 "--seed-kernel-words", seeds, "--out", str(out)])
    assert code == 0
    res = json.loads(out.read_text())["results"]
    assert res["lattice"]["rank"] == 4
    assert res["coboundary"]["status"] == "not_coboundary"


def test_betti_grid_csv_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for target in (a, b):
        assert main(["betti-grid", "--config", "bundled:legendre_torsion_grid.json", "--out", str(target)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("re,im,beta_1,beta_2,residual\n")


def test_torsion_check_cli(capsys):
    assert main(["torsion-check", "--config", "bundled:legendre_torsion_check.json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["results"]["verdict"]["status"] == "torsion"
    assert rep["results"]["verdict"]["order"] == 2


def test_corrupted_config_exit_1(tmp_path, capsys):
    cfg = bundled_config("legendre_periods.json").to_dict()
    cfg["family"]["base"]["basepoint"] = [0.0, 0.0]  # on the puncture lam = 0
    assert main(["periods", "--config", write(tmp_path, "bad.json", cfg)]) == 1
    assert "config error" in capsys.readouterr().err
    assert main(["periods", "--config", str(tmp_path / "missing.json")]) == 1
    (tmp_path / "junk.json").write_text("{not json")
    assert main(["periods", "--config", str(tmp_path / "junk.json")]) == 1


def test_missing_section_is_config_error():
    cfg = bundled_config("cz_rank.json").to_dict()
    del cfg["section"]
    with pytest.raises(ConfigInvalid):
        ExperimentConfig.from_dict(cfg)


def test_unattainable_round_tol_exit_2(monkeypatch, capsys):
    monkeypatch.setenv("RELMONO_ROUND_TOL", "1e-16")
    assert main(["monodromy", "--config", "bundled:legendre_monodromy.json"]) == 2
    err = capsys.readouterr().err
    assert "RoundingFailure" in err and "relmono.transport" in err


def test_env_override_parsing(monkeypatch):
    from relmono.cli import _with_env
    monkeypatch.setenv("RELMONO_ODE_TOL", "1e-11")
    monkeypatch.setenv("RELMONO_PRECISION", "extended")
    tol = _with_env(Tolerance())
    assert tol.ode_tol == 1e-11 and tol.precision == "extended"
    monkeypatch.setenv("RELMONO_REL_TOL", "abc")
    with pytest.raises(ConfigInvalid):
        _with_env(Tolerance())


def test_unknown_task_rejected():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
    with pytest.raises(ConfigInvalid):
        ExperimentConfig.from_dict({"task": "frobnicate"})
