"""Tests for the command-line orchestration layer."""

import io
import json

import pytest

from dfsgate import cli, model
from dfsgate.cli import RunConfig


def _quiet():
    return io.StringIO()


def _fast_cfg(tmp_path, **overrides):
    """Small grid, few trials: plumbing tests should not burn minutes."""
    kwargs = dict(
        sweep_sigmas=(20.0, 30.0),
        sigma_t=30.0,
        trials=2,
        out_dir=str(tmp_path / "out"),
    )
    kwargs.update(overrides)
    return RunConfig(**kwargs)


class TestRunConfig:
    def test_roundtrip_through_dict(self):
        cfg = RunConfig(seed=7, trials=3, mode="j1")
        again = RunConfig.from_dict(cfg.to_dict())
        assert again.to_dict() == cfg.to_dict()

    def test_from_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"sigma_t": 42.0, "noise": {"amplitude_N": 0.0}}))
        cfg = RunConfig.from_file(path)
        assert cfg.sigma_t == 42.0
        assert cfg.noise["amplitude_N"] == 0.0
        # untouched fields keep their defaults
        assert cfg.mode == "weighted"

    def test_bias_override_by_junction_name(self):
        cfg = RunConfig.from_dict({"bias": {"zt_B": 2.0, "tn_B": 2.0}})
        assert cfg.bias.junction_amplitudes()["zt_B"] == 2.0
        assert cfg.bias.junction_amplitudes()["zt_A"] == 1.0

    def test_rejects_unknown_keys(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            RunConfig.from_dict({"sigma": 30.0})
        with pytest.raises(ValueError, match="unknown noise config keys"):
            RunConfig(noise={"amplitudeN": 1e-4})
        with pytest.raises(ValueError, match="unknown dt config keys"):
            RunConfig(dt={"dt": 0.01})
        with pytest.raises(ValueError, match="unknown bias config keys"):
            RunConfig.from_dict({"bias": {"zt_Q": 1.0}})

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError, match="mode"):
            RunConfig(mode="both")
        with pytest.raises(ValueError, match="cross_pair"):
            RunConfig(cross_pair=("z", "q"))
        with pytest.raises(ValueError, match="trials"):
            RunConfig(trials=0)
        with pytest.raises(ValueError, match="sweep_sigmas"):
            RunConfig(sweep_sigmas=())
        with pytest.raises(ValueError):
            RunConfig(noise={"amplitude_N": -1.0})

    def test_default_grid_spans_the_figure_domain(self):
        grid = RunConfig().sweep_sigmas
        assert len(grid) == 15
        assert grid[0] == pytest.approx(10.0)
        assert grid[-1] == pytest.approx(2000.0)


class TestVerify:
    def test_fresh_build_passes_every_check(self):
        buf = _quiet()
        assert cli.run_verify(stream=buf) == 0
        text = buf.getvalue()
        assert "FAIL" not in text
        assert "10/10 checks passed" in text

    def test_fault_injection_trips_the_factorization_check(self):
        buf = _quiet()
        assert cli.run_verify(perturb_rme=1e-6, stream=buf) == 1
        lines = [l for l in buf.getvalue().splitlines() if "Wigner-Eckart" in l]
        assert len(lines) == 1 and lines[0].startswith("FAIL")
        assert "9/10 checks passed" in buf.getvalue()


class TestSweep:
    def test_writes_versioned_csv_and_json(self, tmp_path):
        cfg = _fast_cfg(tmp_path)
        rows = cli.run_sweep(cfg, stream=_quiet())
        assert [r["status"] for r in rows] == ["ok", "ok"]

        csv_text = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
        assert csv_text[0] == f"# schema: {cli.SWEEP_SCHEMA}"
        assert csv_text[1].startswith("# metadata: ")
        meta = json.loads(csv_text[1][len("# metadata: "):])
        assert meta["seed"] == cfg.seed
        assert csv_text[2].startswith("# columns: ")
        assert csv_text[3] == ",".join(cli._SWEEP_COLUMNS)
        assert len(csv_text) == 4 + len(rows)

        doc = json.loads((tmp_path / "out" / "sweep.json").read_text())
        assert doc["schema"] == cli.SWEEP_SCHEMA
        assert doc["rows"][0]["sigma_t"] == 20.0
        # the embedded config echo is itself a loadable config
        RunConfig.from_dict(doc["metadata"]["config"])

    def test_zero_noise_collapses_to_the_noiseless_columns(self, tmp_path):
        cfg = _fast_cfg(tmp_path, sweep_sigmas=(25.0,), noise={"amplitude_N": 0.0})
        (row,) = cli.run_sweep(cfg, stream=_quiet())
        assert row["trials"] == 1
        assert row["noisy_D0_mean"] == row["D0"]
        assert row["noisy_D1_mean"] == row["D1"]
        assert row["noisy_D0_std"] == 0.0

    def test_same_seed_reruns_are_byte_identical(self, tmp_path):
        cfg = _fast_cfg(tmp_path, sweep_sigmas=(20.0,), seed=11)
        cli.run_sweep(cfg, stream=_quiet())
        first = {
            name: (tmp_path / "out" / name).read_bytes()
            for name in ("sweep.csv", "sweep.json")
        }
        cli.run_sweep(cfg, stream=_quiet())
        for name, blob in first.items():
            assert (tmp_path / "out" / name).read_bytes() == blob

    def test_per_point_failure_is_recorded_and_the_sweep_continues(self, tmp_path):
        # sigma_t = 2 needs a peak above the dressed gap, so calibration
        # refuses; the other point must still come out clean
        cfg = _fast_cfg(
            tmp_path,
            sweep_sigmas=(2.0, 20.0),
            dt={"halving_check": False},
        )
        rows = cli.run_sweep(cfg, stream=_quiet())
        assert rows[0]["status"].startswith("error: DegeneracyError")
        assert rows[0]["amplitude"] is None
        assert rows[1]["status"] == "ok"

        data_lines = (tmp_path / "out" / "sweep.csv").read_text().splitlines()[4:]
        assert data_lines[0].startswith("2.0,,")

    def test_dt_preflight_aborts_on_drift(self, tmp_path):
        cfg = _fast_cfg(tmp_path, sweep_sigmas=(20.0,), dt={"halving_tol": 1e-18})
        with pytest.raises(RuntimeError, match="halving residual"):
            cli.run_sweep(cfg, stream=_quiet())

    def test_dt_preflight_can_be_switched_off(self, tmp_path):
        cfg = _fast_cfg(tmp_path, sweep_sigmas=(20.0,), dt={"halving_check": False})
        buf = _quiet()
        cli.run_sweep(cfg, stream=buf)
        assert "halving residual" not in buf.getvalue()


class TestSimulate:
    def test_report_document(self, tmp_path):
        cfg = _fast_cfg(tmp_path)
        doc = cli.run_simulate(cfg, stream=_quiet())
        on_disk = json.loads((tmp_path / "out" / "report.json").read_text())
        assert on_disk == doc

        assert doc["report"]["sigma_t"] == 30.0
        assert doc["report"]["trials"] == 2
        assert len(doc["trial_distances"]["0"]) == 2
        block = doc["logical_blocks"]["1"]
        assert len(block["real"]) == 4 and len(block["imag"]) == 4
        RunConfig.from_dict(doc["metadata"]["config"])

    def test_noiseless_wide_pulse_reaches_the_perturbative_floor(self, tmp_path):
        cfg = _fast_cfg(
            tmp_path,
            sigma_t=1000.0,
            noise={"amplitude_N": 0.0},
            trials=1,
        )
        doc = cli.run_simulate(cfg, stream=_quiet())
        assert doc["report"]["distance"]["0"] <= 1e-4
        assert doc["report"]["distance"]["1"] <= 1e-4


class TestMain:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["--version"])
        assert info.value.code == 0
        assert cli.VERSION_STRING in capsys.readouterr().out

    def test_subcommand_is_required(self):
        with pytest.raises(SystemExit) as info:
            cli.main([])
        assert info.value.code == 2

    def test_rejects_unknown_mode_choice(self):
        with pytest.raises(SystemExit) as info:
            cli.main(["sweep", "--mode", "both"])
        assert info.value.code == 2

    def test_verify_subcommand(self, capsys):
        assert cli.main(["verify"]) == 0
        assert "checks passed" in capsys.readouterr().out

    def test_sweep_with_overrides(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"sweep_sigmas": [20.0], "trials": 5}))
        out = tmp_path / "runs"
        code = cli.main(
            [
                "sweep",
                "--config", str(path),
                "--out", str(out),
                "--trials", "1",
                "--seed", "3",
            ]
        )
        capsys.readouterr()
        assert code == 0
        doc = json.loads((out / "sweep.json").read_text())
        assert doc["metadata"]["seed"] == 3
        assert doc["metadata"]["config"]["trials"] == 1

    def test_bad_config_reports_an_error(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"bogus": 1}))
        assert cli.main(["simulate", "--config", str(path)]) == 1
        assert capsys.readouterr().err.startswith("error:")


class TestGuards:
    def test_degenerate_bias_is_refused_before_any_simulation(self, tmp_path):
        # equal bias magnitudes collapse the dressed gap entirely
        bias = model.BiasConfig(1.0, 1.0, 0.0, 1.0, 1.0, 0.0)
        cfg = _fast_cfg(tmp_path, bias=bias, sweep_sigmas=(200.0,),
                        dt={"halving_check": False})
        rows = cli.run_sweep(cfg, stream=_quiet())
        assert rows[0]["status"].startswith("error:")
