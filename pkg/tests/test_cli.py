import json
import os

import pytest

from airfl_sim.cli import main
from airfl_sim.config import ConfigError, parse_config

BASE_CONFIG = {
    "schema_version": 1,
    "seed": 3,
    "trials": 2000,
    "output_dir": "out",
    "system": {
        "targets": 3,
        "interferers": 2,
        "ris_elements": 16,
        "max_power_dbm": 0.0,
        "noise_psd_dbm_hz": -140.0,
        "bandwidth_hz": 1e6,
    },
    "schemes": ["power_inversion", "weighted_full_power", "bev_random"],
    "sweep": {"axis": "N", "values": [16, 32]},
    "train": {
        "rounds": 12, "train_size": 600, "test_size": 300, "features": 8,
        "classes": 3, "labels_per_client": 2, "seeds": [1],
        "aggregators": ["ideal", "power_inversion"],
    },
}


def write_config(tmp_path, mutate=None, name="cfg.json"):
    cfg = json.loads(json.dumps(BASE_CONFIG))
    if mutate:
        mutate(cfg)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


class TestParsing:
    def test_round_trip(self, tmp_path):
        cfg = parse_config(write_config(tmp_path))
        assert cfg.system.K == 3
        assert cfg.system.P_max == pytest.approx(1e-3)
        assert cfg.system.sigma2 == pytest.approx(1e-11)
        assert cfg.sweep_axis == "N"

    def test_unknown_key_rejected(self, tmp_path):
        path = write_config(tmp_path, lambda c: c.update(bogus=1))
        with pytest.raises(ConfigError, match="bogus"):
            parse_config(path)

    def test_nested_unknown_key_rejected(self, tmp_path):
        path = write_config(tmp_path,
                            lambda c: c["system"].update(antennas=4))
        with pytest.raises(ConfigError, match="system.*antennas"):
            parse_config(path)

    def test_power_units_exclusive(self, tmp_path):
        path = write_config(tmp_path,
                            lambda c: c["system"].update(max_power_w=1.0))
        with pytest.raises(ConfigError, match="max_power"):
            parse_config(path)

    def test_watt_form_accepted(self, tmp_path):
        def mutate(c):
            del c["system"]["max_power_dbm"]
            c["system"]["max_power_w"] = 0.002
        cfg = parse_config(write_config(tmp_path, mutate))
        assert cfg.system.P_max == 0.002

    def test_schema_version_checked(self, tmp_path):
        path = write_config(tmp_path,
                            lambda c: c.update(schema_version=99))
        with pytest.raises(ConfigError, match="schema_version"):
            parse_config(path)

    def test_unknown_scheme_rejected(self, tmp_path):
        path = write_config(tmp_path,
                            lambda c: c.update(schemes=["nope"]))
        with pytest.raises(ConfigError, match="nope"):
            parse_config(path)

    def test_bits_values_validated(self, tmp_path):
        path = write_config(
            tmp_path, lambda c: c.update(sweep={"axis": "N",
                                                "values": [64, None]}))
        with pytest.raises(ConfigError, match="bits"):
            parse_config(path)

    def test_gradient_source_validated(self, tmp_path):
        path = write_config(
            tmp_path, lambda c: c.update(gradients={"source": "psychic"}))
        with pytest.raises(ConfigError, match="source"):
            parse_config(path)

    def test_recorded_source_accepted(self, tmp_path):
        path = write_config(
            tmp_path, lambda c: c.update(gradients={
                "source": "recorded_training", "recorded_rounds": 10}))
        cfg = parse_config(path)
        assert cfg.gradients.source == "recorded_training"
        assert cfg.gradients.recorded_rounds == 10


class TestCliExitCodes:
    def test_moments_success(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = str(tmp_path / "res")
        assert main(["moments", "--config", cfg, "--out", out,
                     "--workers", "1"]) == 0
        lines = open(os.path.join(out, "moments.csv")).read().splitlines()
        # header + (K+M) rows per scheme
        assert len(lines) == 1 + 5 * 3
        assert os.path.exists(os.path.join(out, "moments.json"))

    def test_malformed_json_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"schema_version": 1,\n  "x" = 2}')
        assert main(["moments", "--config", str(bad)]) == 2
        err = capsys.readouterr().err
        assert "line 2" in err

    def test_missing_file_exit_2(self, tmp_path, capsys):
        assert main(["moments", "--config", str(tmp_path / "nope.json")]) == 2

    def test_sabotaged_lambda_detected(self, tmp_path, capsys):
        cfg = write_config(tmp_path,
                           lambda c: c.update(lambda_scale=2.0,
                                              schemes=["power_inversion"]))
        out = str(tmp_path / "sab")
        assert main(["moments", "--config", cfg, "--out", out,
                     "--workers", "1", "--check"]) == 1
        assert main(["moments", "--config", cfg, "--out", out,
                     "--workers", "1"]) == 0  # without --check just reports

    def test_sweep_missing_section_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, lambda c: c.pop("sweep"))
        assert main(["mse-sweep", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2


class TestCliDeterminism:
    def test_sweep_rerun_byte_identical_any_workers(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        outputs = []
        for i, workers in enumerate((1, 2, 1)):
            out = str(tmp_path / f"run{i}")
            assert main(["mse-sweep", "--config", cfg, "--out", out,
                         "--workers", str(workers)]) == 0
            outputs.append(open(os.path.join(out, "mse_sweep.csv"), "rb").read())
        assert outputs[0] == outputs[1] == outputs[2]

    def test_workers_env_fallback(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("AIRFL_SIM_WORKERS", "2")
        cfg = write_config(tmp_path)
        out = str(tmp_path / "env")
        assert main(["moments", "--config", cfg, "--out", out]) == 0

    def test_bad_workers_env_exit_2(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("AIRFL_SIM_WORKERS", "lots")
        cfg = write_config(tmp_path)
        assert main(["moments", "--config", cfg,
                     "--out", str(tmp_path / "x")]) == 2


class TestCliTrainAndBound:
    def test_train_traces_per_seed(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = str(tmp_path / "tr")
        assert main(["train", "--config", cfg, "--out", out,
                     "--seeds", "1,2"]) == 0
        for name in ("ideal", "power_inversion"):
            for seed in (1, 2):
                path = os.path.join(out, f"trace_{name}_seed{seed}.csv")
                assert os.path.exists(path)
                lines = open(path).read().splitlines()
                assert len(lines) == 1 + 12
                assert lines[0] == ("round,train_loss,test_accuracy,"
                                    "global_grad_norm,error_sq_norm")
        assert os.path.exists(os.path.join(out, "train_summary.csv"))

    def test_train_rerun_byte_identical(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        blobs = []
        for i in range(2):
            out = str(tmp_path / f"tr{i}")
            assert main(["train", "--config", cfg, "--out", out]) == 0
            blobs.append(open(os.path.join(
                out, "trace_power_inversion_seed1.csv"), "rb").read())
        assert blobs[0] == blobs[1]

    def test_missing_mnist_exit_2(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, lambda c: c["train"].update(dataset="mnist"))
        out = capsys  # silence lint
        code = main(["train", "--config", cfg, "--out", str(tmp_path / "m")])
        assert code == 2
        assert "images" in capsys.readouterr().err

    def test_bound_orders_schemes(self, tmp_path, capsys):
        cfg = write_config(tmp_path, lambda c: c.update(
            bound={"T": 100, "pilot_rounds": 8}))
        out = str(tmp_path / "b")
        assert main(["bound", "--config", cfg, "--out", out]) == 0
        payload = json.load(open(os.path.join(out, "bound.json")))
        schemes = payload["schemes"]
        assert schemes["power_inversion"]["varpi"] <= \
            schemes["weighted_full_power"]["varpi"]
        assert payload["inputs"]["xi"] >= 1.0
