import os

import numpy as np
import pytest

from parpf.bench import build_model, prepare_data, run_sweep
from parpf.cli import main
from parpf.config import ExperimentConfig, default_workers, parse_config
from parpf.exceptions import ConfigError
from parpf.io import (
    read_array_csv,
    read_metric_records,
    write_array_csv,
    write_metric_records,
)
from parpf.metrics import MetricRecord


class TestConfig:
    def test_defaults_resolve(self):
        cfg = ExperimentConfig()
        assert cfg.reference == "proxy"
        assert cfg.workers >= 1

    def test_fhn_defaults_to_truth_reference(self):
        cfg = ExperimentConfig(model="fhn")
        assert cfg.reference == "truth"

    def test_file_and_overrides(self, tmp_path):
        path = tmp_path / "sweep.cfg"
        path.write_text(
            "# comment\n"
            "model=lorenz63\n"
            "variants=centralised-bf,ensemble-bf\n"
            "M=4\n"
            "N=100,200\n"
            "reps=5\n"
            "seed=3\n"
        )
        cfg = parse_config(str(path), {"N": "400,800", "seed": "9"})
        assert cfg.n_particles_list == [400, 800]
        assert cfg.seed == 9
        assert cfg.variants == ["centralised-bf", "ensemble-bf"]
        assert cfg.n_filters_list == [4]
        assert cfg.replicates == 5

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("particles=7\n")
        with pytest.raises(ConfigError):
            parse_config(str(path))

    def test_empty_sweeps_rejected(self):
        with pytest.raises(ConfigError):
            parse_config(None, {"N": ""})
        with pytest.raises(ConfigError):
            ExperimentConfig(variants=[])

    def test_unknown_variant_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(variants=["ensemble-ukf"])

    def test_worker_env_default(self, monkeypatch):
        monkeypatch.setenv("PARPF_WORKERS", "3")
        assert default_workers() == 3
        cfg = ExperimentConfig()
        assert cfg.workers == 3
        # explicit value wins over the environment
        cfg = ExperimentConfig(workers=1)
        assert cfg.workers == 1


class TestCsvIo:
    def test_array_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        arr = rng.normal(size=(7, 3)) * np.exp(rng.normal(size=(7, 3)) * 20)
        path = tmp_path / "arr.csv"
        write_array_csv(path, "x", arr)
        steps, back = read_array_csv(path)
        assert np.array_equal(back, arr)
        assert steps.tolist() == list(range(1, 8))

    def test_metric_record_round_trip(self, tmp_path):
        records = [
            MetricRecord("ensemble-bf", 8, 400, 3200, 50, 1.0 / 3.0, 2e-7,
                         np.pi * 1e-5, 0.01, 0.5, 0.1275, 0),
            MetricRecord("double-bf", 4, 100, 400, 10, 0.2, float("nan"),
                         0.1, 0.0, 0.0, float("nan"), 3),
        ]
        path = tmp_path / "metrics.csv"
        write_metric_records(path, records)
        back = read_metric_records(path)
        assert back[0] == records[0]
        assert back[1].variant == "double-bf"
        assert np.isnan(back[1].mse_var) and np.isnan(back[1].time_error_index)

    def test_header_only_for_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_array_csv(path, "y", np.zeros((0, 2)))
        steps, back = read_array_csv(path)
        assert steps.size == 0 and back.shape == (0, 2)


class TestSimulateCommand:
    def test_writes_observation_rows(self, tmp_path):
        obs = tmp_path / "obs.csv"
        traj = tmp_path / "traj.csv"
        rc = main(["simulate", "--model", "lorenz63", "--T", "200",
                   "--seed", "5", "--obs", str(obs), "--traj", str(traj)])
        assert rc == 0
        _, values = read_array_csv(obs)
        assert values.shape == (200, 1)
        _, states = read_array_csv(traj)
        assert states.shape == (201, 3)

    def test_zero_steps_header_only(self, tmp_path):
        obs = tmp_path / "obs.csv"
        traj = tmp_path / "traj.csv"
        rc = main(["simulate", "--model", "lorenz63", "--T", "0",
                   "--seed", "5", "--obs", str(obs), "--traj", str(traj)])
        assert rc == 0
        assert obs.read_text().count("\n") == 1
        _, states = read_array_csv(traj)
        assert states.shape == (1, 3)

    def test_idempotent_per_seed(self, tmp_path):
        args = ["simulate", "--model", "lorenz63", "--T", "20", "--seed", "5"]
        a_obs, a_traj = tmp_path / "a.csv", tmp_path / "at.csv"
        b_obs, b_traj = tmp_path / "b.csv", tmp_path / "bt.csv"
        main(args + ["--obs", str(a_obs), "--traj", str(a_traj)])
        main(args + ["--obs", str(b_obs), "--traj", str(b_traj)])
        assert a_obs.read_bytes() == b_obs.read_bytes()
        assert a_traj.read_bytes() == b_traj.read_bytes()

    def test_missing_paths_fail(self):
        assert main(["simulate", "--model", "lorenz63", "--T", "5"]) == 2


class TestBenchCommand:
    def _cfg(self, tmp_path, **kwargs):
        defaults = dict(
            model="lorenz63",
            variants=["centralised-bf", "ensemble-bf"],
            n_filters_list=[2],
            n_particles_list=[20, 40],
            replicates=3,
            n_observations=6,
            seed=1,
            workers=1,
            proxy_particles=300,
            out_path=str(tmp_path / "metrics.csv"),
        )
        defaults.update(kwargs)
        return ExperimentConfig(**defaults)

    def test_row_count_is_product(self, tmp_path):
        cfg = self._cfg(tmp_path)
        records = run_sweep(cfg)
        assert len(records) == 2 * 1 * 2

    def test_centralised_rows_report_unit_index(self, tmp_path):
        records = run_sweep(self._cfg(tmp_path))
        for rec in records:
            if rec.variant == "centralised-bf":
                assert rec.time_error_index == 1.0
            else:
                assert rec.time_error_index == pytest.approx(
                    1.0 / rec.n_filters + 1.0 / rec.n_particles)
            assert rec.total_particles == rec.n_filters * rec.n_particles
            assert rec.mse_mean > 0.0

    def test_observation_file_reused(self, tmp_path):
        obs_path = tmp_path / "obs.csv"
        cfg = self._cfg(tmp_path, observations_path=str(obs_path))
        model = build_model(cfg)
        prepare_data(cfg, model)
        first = obs_path.read_bytes()
        prepare_data(cfg, model)  # second call loads, does not rewrite
        assert obs_path.read_bytes() == first

    def test_cli_end_to_end(self, tmp_path):
        out = tmp_path / "m.csv"
        rc = main(["bench", "--model", "lorenz63",
                   "--variants", "centralised-bf,ensemble-bf,double-bf",
                   "--M", "2", "--N", "20", "--reps", "2", "--T", "5",
                   "--seed", "2", "--workers", "1", "--proxy-J", "200",
                   "--out", str(out)])
        assert rc == 0
        records = read_metric_records(out)
        assert len(records) == 3
        assert {r.variant for r in records} == {"centralised-bf", "ensemble-bf",
                                                "double-bf"}


class TestRunCommand:
    def test_writes_estimates(self, tmp_path):
        out = tmp_path / "est.csv"
        rc = main(["run", "--model", "lorenz63", "--variants", "ensemble-bf",
                   "--M", "2", "--N", "30", "--T", "4", "--seed", "3",
                   "--workers", "1", "--out", str(out)])
        assert rc == 0
        header, rows = (out.read_text().splitlines()[0],
                        out.read_text().splitlines()[1:])
        assert header.split(",")[:2] == ["t", "est0"]
        assert len(rows) == 4


class TestVerifyCommand:
    def test_single_fast_check(self, capsys):
        rc = main(["verify", "--only", "resampling_exactness", "--fast"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "PASS resampling_exactness" in out

    def test_unknown_check_rejected(self):
        assert main(["verify", "--only", "nonsense"]) == 2
