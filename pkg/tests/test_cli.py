import json

from balancenet.cli import main


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


NETWORK_CFG = {"kind": "network-run", "seed": 3,
               "model": {"family": "fhn-electrical", "n": 12},
               "T": 0.01, "dt": 1e-4}


class TestExitCodes:
    def test_success(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, NETWORK_CFG)
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
        assert "COMPLETED" in capsys.readouterr().out

    def test_config_error_is_one(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, {"kind": "network-run"})
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
        assert "MISSING_KEY" in capsys.readouterr().err

    def test_missing_file_is_one(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "o")]) == 1

    def test_kind_subcommand_mismatch(self, tmp_path):
        cfg = write_cfg(tmp_path, NETWORK_CFG)
        assert main(["pde", "--config", cfg, "--out", str(tmp_path / "o")]) == 1

    def test_missing_out_is_one(self, tmp_path):
        cfg = write_cfg(tmp_path, NETWORK_CFG)
        assert main(["simulate", "--config", cfg]) == 1

    def test_partial_sweep_failure_is_two(self, tmp_path):
        # second epsilon exceeds the step budget -> cell fails, sweep continues
        cfg = write_cfg(tmp_path, {
            "kind": "double-limit-sweep", "seed": 1,
            "pde": {"model": {}, "epsilons": [0.4, 1e-6],
                    "grid": {"L": 8, "cells": 256}, "T": 2.0}})
        code = main(["sweep", "--config", cfg, "--out", str(tmp_path / "o")])
        assert code == 2


class TestOverrides:
    def test_seed_override_changes_output(self, tmp_path):
        cfg = write_cfg(tmp_path, NETWORK_CFG)
        main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")])
        main(["simulate", "--config", cfg, "--out", str(tmp_path / "b"),
              "--seed", "4"])
        a = json.loads((tmp_path / "a" / "manifest.json").read_text())
        b = json.loads((tmp_path / "b" / "manifest.json").read_text())
        assert a["seed"] == 3 and b["seed"] == 4
        assert a["files"] != b["files"]

    def test_out_in_config_used_when_flag_absent(self, tmp_path):
        cfg = dict(NETWORK_CFG)
        cfg["out"] = str(tmp_path / "from_config")
        path = write_cfg(tmp_path, cfg)
        assert main(["simulate", "--config", path]) == 0
        assert (tmp_path / "from_config" / "manifest.json").exists()
