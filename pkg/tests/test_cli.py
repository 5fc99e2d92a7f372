import json
from pathlib import Path

import numpy as np
import pytest

from walshprod import ConfigError
from walshprod.cli import main
from walshprod.config import build_family, build_weights, load_config, n_from_rule
from walshprod.experiments import run_scaling_sweep

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def write_cfg(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def small_mc_cfg(trials=40, seed=42):
    return {
        "schema_version": 1,
        "seed": seed,
        "d": 4,
        "n": 8,
        "trials": trials,
        "chain": [
            {"family": {"kind": "all_size", "sizes": [1], "coords": [0, 1]},
             "weights": {"kind": "n_inv_sqrt"}},
            {"family": {"kind": "all_size", "sizes": [2], "coords": [2, 3]},
             "weights": {"kind": "n_inv_sqrt"}},
            {"family": {"kind": "all_size", "sizes": [1], "coords": [0, 1]},
             "weights": {"kind": "n_inv_sqrt"}},
        ],
    }


def scaling_cfg(**overrides):
    cfg = {
        "schema_version": 1,
        "seed": 42,
        "d_schedule": [4, 6, 8],
        "n_rule": {"kind": "power", "alpha": 3},
        "chain": [
            {"family": {"kind": "all_size", "sizes": [1]},
             "weights": {"kind": "min_n_d"}},
            {"family": {"kind": "all_size", "sizes": [2]},
             "weights": {"kind": "min_n_d"}},
            {"family": {"kind": "all_size", "sizes": [1]},
             "weights": {"kind": "min_n_d"}},
        ],
        "trials": 50,
    }
    cfg.update(overrides)
    return cfg


class TestConfigLoading:
    def test_rejects_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "missing.json"))

    def test_rejects_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_rejects_wrong_schema_version(self, tmp_path):
        path = write_cfg(tmp_path, "v2.json", {"schema_version": 2})
        with pytest.raises(ConfigError, match="schema_version"):
            load_config(path)

    def test_family_descriptors(self):
        fam = build_family({"kind": "all_size", "sizes": [1]}, 4)
        assert len(fam) == 4
        fam = build_family({"kind": "explicit", "members": [[0, 1], [2]]}, 3)
        assert len(fam) == 2
        fam = build_family(
            {"kind": "blocked", "exponents": [1, 0.5], "block_sizes": [1, 1]}, 9
        )
        assert fam.effective_degree == pytest.approx(1.5)
        with pytest.raises(ConfigError):
            build_family({"kind": "nope"}, 4)

    def test_weight_rules(self):
        fam = build_family({"kind": "all_size", "sizes": [2]}, 4)
        n, d = 64, 4
        w = build_weights({"kind": "min_n_d"}, fam, n, d)
        assert w[0] == pytest.approx(min(n**-0.5, d**-1.0))
        w = build_weights({"kind": "n_inv_sqrt", "c": 2.0}, fam, n, d)
        assert w[0] == pytest.approx(0.25)
        w = build_weights({"kind": "constant", "value": 0.5}, fam, n, d)
        assert (w == 0.5).all()
        with pytest.raises(ConfigError):
            build_weights({"kind": "explicit", "values": [1.0]}, fam, n, d)

    def test_n_rules(self):
        assert n_from_rule({"kind": "power", "alpha": 3}, 4, 0) == 64
        assert n_from_rule({"kind": "explicit", "values": [7, 9]}, 4, 1) == 9
        with pytest.raises(ConfigError):
            n_from_rule({"kind": "explicit", "values": [7]}, 4, 1)


class TestCliRuns:
    def test_verify_identity_ok(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main([
            "verify-identity", "--config", str(CONFIG_DIR / "identity.json"),
            "--out", str(out),
        ])
        assert code == 0
        assert (out / "verify-identity.csv").exists()
        assert (out / "verify-identity.png").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["all_passed"] is True
        assert summary["rng_algorithm"].startswith("numpy-philox")
        assert summary["config_hash"]
        assert all("name" in a and "passed" in a for a in summary["assertions"])
        header = (out / "verify-identity.csv").read_text().splitlines()[0]
        assert header == "d,n,first_size,second_size,norm,expected,rel_err"

    def test_no_plots_flag(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "verify-identity", "--config", str(CONFIG_DIR / "identity.json"),
            "--out", str(out), "--no-plots",
        ])
        assert code == 0
        assert not (out / "verify-identity.png").exists()

    def test_mc_vs_exact_byte_identical_reruns(self, tmp_path):
        cfg = write_cfg(tmp_path, "mc.json", small_mc_cfg())
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["mc-vs-exact", "--config", cfg, "--out", str(out_a), "--no-plots"]) == 0
        assert main(["mc-vs-exact", "--config", cfg, "--out", str(out_b), "--no-plots"]) == 0
        a = (out_a / "mc-vs-exact.csv").read_bytes()
        b = (out_b / "mc-vs-exact.csv").read_bytes()
        assert a == b
        assert b"\r" not in a

    def test_mc_vs_exact_zero_weight_chain(self, tmp_path):
        cfg_data = small_mc_cfg()
        for pos in cfg_data["chain"]:
            pos["weights"] = {"kind": "constant", "value": 0.0}
        cfg = write_cfg(tmp_path, "zero.json", cfg_data)
        out = tmp_path / "out"
        assert main(["mc-vs-exact", "--config", cfg, "--out", str(out), "--no-plots"]) == 0
        rows = (out / "mc-vs-exact.csv").read_text().splitlines()[1:]
        for row in rows:
            _, _, exact, mc_mean, _, z = row.split(",")
            assert float(exact) == 0.0 and float(mc_mean) == 0.0 and float(z) == 0.0

    def test_mc_vs_exact_low_trials_skips_assertion(self, tmp_path):
        cfg = write_cfg(tmp_path, "mc.json", small_mc_cfg(trials=2))
        out = tmp_path / "out"
        assert main(["mc-vs-exact", "--config", cfg, "--out", str(out), "--no-plots"]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["assertions"][0]["skipped"] is True

    def test_seed_override_changes_output(self, tmp_path):
        cfg = write_cfg(tmp_path, "mc.json", small_mc_cfg())
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["mc-vs-exact", "--config", cfg, "--out", str(out_a), "--no-plots"])
        main(["mc-vs-exact", "--config", cfg, "--out", str(out_b), "--no-plots",
              "--seed", "7"])
        assert (out_a / "mc-vs-exact.csv").read_bytes() != (out_b / "mc-vs-exact.csv").read_bytes()

    def test_threads_do_not_change_output(self, tmp_path):
        cfg = write_cfg(tmp_path, "mc.json", small_mc_cfg())
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["mc-vs-exact", "--config", cfg, "--out", str(out_a), "--no-plots"])
        main(["mc-vs-exact", "--config", cfg, "--out", str(out_b), "--no-plots",
              "--threads", "4"])
        assert (out_a / "mc-vs-exact.csv").read_bytes() == (out_b / "mc-vs-exact.csv").read_bytes()

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = write_cfg(tmp_path, "bad.json", {"schema_version": 1})
        code = main(["verify-identity", "--config", bad, "--out", str(tmp_path / "o")])
        assert code == 3
        assert "config error" in capsys.readouterr().err

    def test_non_disjoint_families_exit_code(self, tmp_path):
        cfg = write_cfg(tmp_path, "overlap.json", {
            "schema_version": 1,
            "cases": [{
                "d": 4, "n": 8,
                "first": {"kind": "all_size", "sizes": [1]},
                "second": {"kind": "all_size", "sizes": [1]},
            }],
        })
        assert main(["verify-identity", "--config", cfg, "--out", str(tmp_path / "o")]) == 3

    def test_budget_exceeded_exit_code(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "tiny.json", scaling_cfg(budget=1))
        code = main(["scaling-sweep", "--config", cfg, "--out", str(tmp_path / "o"),
                     "--exact", "--no-plots"])
        assert code == 4
        assert "budget" in capsys.readouterr().err

    def test_assertion_failure_exit_code(self, tmp_path):
        cfg = write_cfg(tmp_path, "strict.json", {
            "schema_version": 1,
            "seed": 42,
            "d_schedule": [4, 6, 8, 10],
            "families": [
                {"kind": "all_size", "sizes": [2]},
                {"kind": "all_size", "sizes": [1]},
                {"kind": "all_size", "sizes": [1]},
            ],
            "shapes": ["b_plain"],
            "slack": 0.5,
        })
        code = main(["weighted-sums", "--config", cfg, "--out", str(tmp_path / "o"),
                     "--no-plots"])
        assert code == 2

    def test_no_qualifying_middle_family(self, tmp_path):
        cfg = write_cfg(tmp_path, "nomid.json", scaling_cfg(chain=[
            {"family": {"kind": "all_size", "sizes": [1]}, "weights": {"kind": "min_n_d"}},
            {"family": {"kind": "all_size", "sizes": [1]}, "weights": {"kind": "min_n_d"}},
        ]))
        assert main(["scaling-sweep", "--config", cfg, "--out", str(tmp_path / "o"),
                     "--no-plots"]) == 3

    def test_oversized_weights_rejected(self, tmp_path):
        cfg = write_cfg(tmp_path, "heavy.json", scaling_cfg(chain=[
            {"family": {"kind": "all_size", "sizes": [1]}, "weights": {"kind": "constant", "value": 0.9}},
            {"family": {"kind": "all_size", "sizes": [2]}, "weights": {"kind": "min_n_d"}},
            {"family": {"kind": "all_size", "sizes": [1]}, "weights": {"kind": "min_n_d"}},
        ]))
        assert main(["scaling-sweep", "--config", cfg, "--out", str(tmp_path / "o"),
                     "--no-plots"]) == 3

    def test_mc_engine_override(self, tmp_path):
        cfg = write_cfg(tmp_path, "sweep.json", scaling_cfg(d_schedule=[4, 6]))
        out = tmp_path / "o"
        assert main(["scaling-sweep", "--config", cfg, "--out", str(out), "--mc",
                     "--no-plots"]) in (0, 2)
        rows = (out / "scaling-sweep.csv").read_text().splitlines()[1:]
        assert all(r.endswith(",mc") for r in rows)

    def test_unknown_command_help(self, capsys):
        assert main([]) == 3


class TestScalingBilinearity:
    def test_norm_quadratic_in_outer_weights(self):
        def cfg(eps):
            return scaling_cfg(chain=[
                {"family": {"kind": "all_size", "sizes": [1]},
                 "weights": {"kind": "constant", "value": eps}},
                {"family": {"kind": "all_size", "sizes": [2]},
                 "weights": {"kind": "min_n_d"}},
                {"family": {"kind": "all_size", "sizes": [1]},
                 "weights": {"kind": "constant", "value": eps}},
            ], d_schedule=[4, 6])

        small = run_scaling_sweep(cfg(0.01))
        big = run_scaling_sweep(cfg(0.02))
        norm_col = small.header.index("norm")
        ratio_col = small.header.index("ratio")
        for row_s, row_b in zip(small.rows, big.rows):
            assert row_b[norm_col] == pytest.approx(4.0 * row_s[norm_col], rel=1e-12)
            assert row_b[ratio_col] == pytest.approx(row_s[ratio_col], rel=1e-12)
