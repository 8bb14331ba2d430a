"""Command-line interface: exit codes, determinism, schemas, file outputs."""

import json

import numpy as np
import pytest

from lamedn.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_THRESHOLD,
    ConfigError,
    load_config,
    main,
)
from lamedn.fem import load_matrix_json


def _cfg(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestConfig:
    def test_defaults_load(self):
        cfg = load_config()
        assert cfg["mesh"]["N"] == 1
        assert cfg["seed"] == 0

    def test_seed_override(self):
        assert load_config(seed=77)["seed"] == 77

    def test_unknown_key_rejected(self, tmp_path):
        path = _cfg(tmp_path, "bad.json", {"bogus": 1})
        with pytest.raises(ConfigError, match="unknown config keys"):
            load_config(path)

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="JSON"):
            load_config(str(path))

    def test_mesh_divisibility_enforced(self, tmp_path):
        path = _cfg(tmp_path, "mesh.json", {"mesh": {"N": 3, "n": 4}})
        with pytest.raises(ConfigError):
            load_config(path)

    def test_nested_merge_keeps_defaults(self, tmp_path):
        path = _cfg(tmp_path, "m.json", {"tolerances": {"alessandrini": 1e-6}})
        cfg = load_config(path)
        assert cfg["tolerances"]["alessandrini"] == 1e-6
        assert cfg["tolerances"]["frechet_fd"] == 1e-5  # untouched default


class TestExitCodes:
    def test_config_error_exit(self, tmp_path, capsys):
        path = _cfg(tmp_path, "bad.json", {"bogus": 1})
        code = main(["forward", "--config", path, "--out", str(tmp_path / "o.json")])
        assert code == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_parameter_layer_mismatch_is_config_error(self, tmp_path, capsys):
        path = _cfg(tmp_path, "p.json",
                    {"parameters": {"lambdas": [1.0, 1.0], "mus": [1.0, 1.0]}})
        code = main(["forward", "--config", path, "--out", str(tmp_path / "o.json")])
        assert code == EXIT_CONFIG

    def test_threshold_failure_exit(self, tmp_path, capsys):
        path = _cfg(tmp_path, "t.json",
                    {"tolerances": {"alessandrini": 0.0}, "identity": {"num_pairs": 2}})
        code = main(["identity_check", "--config", path,
                     "--out", str(tmp_path / "o.json")])
        assert code == EXIT_THRESHOLD
        assert capsys.readouterr().err.startswith("FAIL alessandrini")
        # the report is still written, with pass = false
        rep = json.loads((tmp_path / "o.json").read_text())
        assert rep["pass"] is False

    def test_success_exit(self, tmp_path):
        code = main(["forward", "--out", str(tmp_path / "dn.json")])
        assert code == EXIT_OK


class TestForward:
    def test_writes_square_symmetric_matrix(self, tmp_path):
        out = tmp_path / "dn.json"
        assert main(["forward", "--out", str(out)]) == EXIT_OK
        m = load_matrix_json(out)
        assert m.shape[0] == m.shape[1]
        assert np.abs(m - m.T).max() < 1e-10

    def test_default_output_name(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["forward"]) == EXIT_OK
        assert (tmp_path / "lamedn_forward.json").exists()


class TestDeterminism:
    def test_identity_report_is_byte_stable(self, tmp_path):
        path = _cfg(tmp_path, "c.json", {"identity": {"num_pairs": 2}})
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["identity_check", "--config", path, "--out", str(a)]) == EXIT_OK
        assert main(["identity_check", "--config", path, "--out", str(b)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_seed_changes_report(self, tmp_path):
        path = _cfg(tmp_path, "c.json", {"identity": {"num_pairs": 2}})
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["identity_check", "--config", path, "--out", str(a), "--seed", "1"])
        main(["identity_check", "--config", path, "--out", str(b), "--seed", "2"])
        ra = json.loads(a.read_text())
        rb = json.loads(b.read_text())
        assert ra["residuals"] != rb["residuals"]

    def test_json_keys_sorted(self, tmp_path):
        path = _cfg(tmp_path, "c.json", {"identity": {"num_pairs": 2}})
        out = tmp_path / "a.json"
        main(["identity_check", "--config", path, "--out", str(out)])
        rep = json.loads(out.read_text())
        assert list(rep) == sorted(rep)


class TestChecksAndReports:
    def test_derivative_check(self, tmp_path):
        path = _cfg(tmp_path, "c.json", {"derivative": {"num_points": 1}})
        out = tmp_path / "d.json"
        assert main(["derivative_check", "--config", path, "--out", str(out)]) == EXIT_OK
        rep = json.loads(out.read_text())
        assert rep["pass"] is True
        assert rep["max_error"] <= rep["tolerance"]
        assert rep["gram"] == "spectral-half"

    def test_q0_report(self, tmp_path):
        path = _cfg(tmp_path, "c.json", {"q0": {"num_samples": 1}})
        out = tmp_path / "q.json"
        assert main(["q0", "--config", path, "--out", str(out)]) == EXIT_OK
        rep = json.loads(out.read_text())
        assert rep["q0"] > 0
        assert {"mesh", "gram", "q0", "ratios", "iterates"} <= set(rep)

    def test_probe_report(self, tmp_path):
        path = _cfg(tmp_path, "c.json", {"probe": {"num_pairs": 3}})
        out = tmp_path / "p.json"
        assert main(["probe", "--config", path, "--out", str(out)]) == EXIT_OK
        rep = json.loads(out.read_text())
        assert len(rep["ratios"]) == 3
        assert rep["max_ratio"] == max(rep["ratios"])
        assert len(rep["gram_hash"]) == 16

    def test_reconstruct_report(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["reconstruct", "--out", str(out)]) == EXIT_OK
        rep = json.loads(out.read_text())
        assert rep["final_error"] <= rep["tolerance"]
        assert rep["iterates"][0]["k"] == 0
        assert {"k", "residual", "L"} <= set(rep["iterates"][0])

    def test_kernels_csv(self, tmp_path):
        out = tmp_path / "k.csv"
        assert main(["kernels", "--out", str(out)]) == EXIT_OK
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "x1,x2,x3,c,g13,g23,g33"
        # 9 x 5 grid minus the one point that coincides with the source
        assert len(lines) == 1 + 44
        vals = [float(v) for v in lines[1].split(",")]
        assert len(vals) == 7

    def test_ucp_report_and_csvs(self, tmp_path):
        path = _cfg(tmp_path, "c.json", {"ucp": {"count": 60}})
        out = tmp_path / "u.json"
        assert main(["ucp", "--config", path, "--out", str(out)]) == EXIT_OK
        rep = json.loads(out.read_text())
        assert 0.0 < rep["three_sphere"]["theta0"] < 1.0
        assert rep["three_sphere"]["violation_rate"] <= 0.05
        assert rep["caccioppoli_max"] > 0
        assert rep["cone"]["max_C_impl"] > 0
        ts = tmp_path / "u_three_sphere.csv"
        cone = tmp_path / "u_cone.csv"
        assert ts.exists() and cone.exists()
        assert ts.read_text().splitlines()[0] == "member_id,r1_int,r2_int,r3_int"
        assert cone.read_text().splitlines()[0] == "member_id,eps,E,value,C_impl"
