"""Command-line front end: schema validation, artifacts, exit codes, determinism."""

import json

import pytest

from nlad.cli import (EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_OK, ConfigError,
                      config_digest, load_config, main)

BASE_CONFIG = {
    "model": {
        "D": [1.0, 1.0],
        "gamma": [[0.0, 1.05], [1.05, 0.0]],
        "p": [1.0, 1.0],
        "L": 1.0,
        "kernel": {"kind": "tophat", "alpha": 0.025},
    },
    "grid": {"M": 128},
    "solver": {"t_max": 60.0},
    "ic": {"kind": "perturbed-homogeneous", "amplitude": 0.05, "seed": 42},
}


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_load_config_rejects_unknown_keys(tmp_path):
    bad = dict(BASE_CONFIG, extra={})
    with pytest.raises(ConfigError, match="unknown config section"):
        load_config(write_config(tmp_path, bad))
    bad = json.loads(json.dumps(BASE_CONFIG))
    bad["solver"]["dtmax"] = 1.0
    with pytest.raises(ConfigError, match="unknown key solver.dtmax"):
        load_config(write_config(tmp_path, bad))
    bad = json.loads(json.dumps(BASE_CONFIG))
    bad["model"]["kernel"]["width"] = 0.1
    with pytest.raises(ConfigError, match="unknown key model.kernel.width"):
        load_config(write_config(tmp_path, bad))


def test_load_config_rejects_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(str(path))
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.json"))


def test_config_digest_is_stable_and_order_insensitive():
    a = {"model": {"D": [1.0], "L": 1.0}}
    b = {"model": {"L": 1.0, "D": [1.0]}}
    assert config_digest(a) == config_digest(b)
    assert len(config_digest(a)) == 16
    assert config_digest(a) != config_digest({"model": {"D": [2.0], "L": 1.0}})


def test_simulate_writes_artifacts_and_converges(tmp_path):
    cfg = write_config(tmp_path, BASE_CONFIG)
    out = tmp_path / "out"
    code = main(["simulate", "--config", cfg, "--out", str(out), "--quiet"])
    assert code == EXIT_OK
    assert (out / "trajectory.csv").exists()
    assert (out / "final_state.csv").exists()
    report = json.loads((out / "energy.json").read_text())
    assert {"E", "E_local", "dissipation", "lower_bound",
            "config_digest", "version"} <= set(report)
    # artifacts embed the digest of the config they came from
    digest = config_digest(json.loads(open(cfg).read()))
    assert report["config_digest"] == digest
    assert digest in (out / "trajectory.csv").read_text().splitlines()[0]


def test_simulate_exit_code_on_nonconvergence(tmp_path):
    cfg = json.loads(json.dumps(BASE_CONFIG))
    cfg["solver"]["t_max"] = 0.5
    code = main(["simulate", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path / "o"), "--quiet"])
    assert code == EXIT_NOT_CONVERGED


def test_simulate_byte_identical_reruns(tmp_path):
    cfg = write_config(tmp_path, BASE_CONFIG)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["simulate", "--config", cfg, "--out", str(out),
                     "--quiet"]) == EXIT_OK
        outs.append(out)
    for fname in ("trajectory.csv", "final_state.csv", "energy.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


def test_seed_override_changes_output(tmp_path):
    cfg = write_config(tmp_path, BASE_CONFIG)
    a, b = tmp_path / "s1", tmp_path / "s2"
    main(["simulate", "--config", cfg, "--out", str(a), "--quiet"])
    main(["simulate", "--config", cfg, "--out", str(b), "--seed", "1",
          "--quiet"])
    assert (a / "final_state.csv").read_text() != (b / "final_state.csv").read_text()


def test_bad_config_exit_code(tmp_path):
    bad = dict(BASE_CONFIG, bogus={})
    code = main(["simulate", "--config", write_config(tmp_path, bad),
                 "--out", str(tmp_path), "--quiet"])
    assert code == EXIT_CONFIG


def test_dispersion_subcommand(tmp_path):
    cfg = json.loads(json.dumps(BASE_CONFIG))
    cfg["dispersion"] = {"q_max": 4}
    code = main(["dispersion", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path / "d"), "--quiet"])
    assert code == EXIT_OK
    lines = (tmp_path / "d" / "dispersion.csv").read_text().splitlines()
    assert len(lines) == 7  # comment + header + q = 0..4


def test_classify_subcommand(tmp_path):
    code = main(["classify", "--config", write_config(tmp_path, BASE_CONFIG),
                 "--out", str(tmp_path / "c"), "--quiet"])
    assert code == EXIT_OK
    d = json.loads((tmp_path / "c" / "classification.json").read_text())
    assert d["classes"] == ["S_H", "S_S22"]


def test_solve_n2_subcommand(tmp_path):
    code = main(["solve-n2", "--config", write_config(tmp_path, BASE_CONFIG),
                 "--out", str(tmp_path / "n"), "--quiet"])
    assert code == EXIT_OK
    d = json.loads((tmp_path / "n" / "roots.json").read_text())
    assert any(abs(r[0] - 1 / 1.05) < 1e-9 and abs(r[1] - 1 / 1.05) < 1e-9
               for r in d["roots"])
    assert all(max(res) < 1e-10 for res in d["residuals"])


def test_groebner_subcommand_from_text_polys(tmp_path):
    cfg = {"symbolic": {"polys": ["u1^2 - 1", "u2 - u1"]}}
    code = main(["groebner", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path / "g"), "--quiet"])
    assert code == EXIT_OK
    d = json.loads((tmp_path / "g" / "groebner.json").read_text())
    assert d["zero_dimensional"] is True
    assert d["pure_power_exponents"] == {"u1": 1, "u2": 2}
    from nlad.poly import Polynomial
    assert [Polynomial.from_text(t, 2) for t in d["inputs"]] == \
        [Polynomial.from_text(t, 2) for t in ["u1^2 - 1", "u2 - u1"]]


def test_groebner_subcommand_from_model_chain(tmp_path):
    cfg = {"model": {"D": [1, 1], "gamma": [[0, 2], [2, 0]], "p": [1, 1],
                     "L": 1.0},
           "symbolic": {"var_order": [2, 1]}}
    code = main(["groebner", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path / "g2"), "--quiet"])
    assert code == EXIT_OK
    d = json.loads((tmp_path / "g2" / "groebner.json").read_text())
    assert d["order"] == "lex u2 > u1"
    assert len(d["inputs"]) == 2


def test_sweep_subcommand(tmp_path):
    cfg = json.loads(json.dumps(BASE_CONFIG))
    cfg["model"]["gamma"] = [[0.0, 1.1], [1.1, 0.0]]
    cfg["sweep"] = {"param": "gamma12", "start": 1.1, "stop": 1.0,
                    "step": 0.05}
    code = main(["sweep", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path / "s"), "--quiet"])
    assert code == EXIT_OK
    lines = (tmp_path / "s" / "branch.csv").read_text().splitlines()
    assert lines[1] == "gamma12,amplitude,energy,converged,class_guess"
    assert len(lines) >= 4


def test_regime_map_subcommand(tmp_path):
    cfg = {"regime_map": {"gamma11": [0.2], "gamma12": [1.05, -1.05]}}
    code = main(["regime-map", "--config", write_config(tmp_path, cfg),
                 "--out", str(tmp_path / "r"), "--quiet"])
    assert code == EXIT_OK
    lines = (tmp_path / "r" / "regime_map.csv").read_text().splitlines()
    assert len(lines) == 4
