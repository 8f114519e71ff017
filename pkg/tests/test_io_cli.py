"""CSV formats and the command-line surface: flags, exit codes, determinism."""

import numpy as np
import pytest

import rrckit as rk
from rrckit.cli import main
from rrckit.io import read_timeseries_csv, write_timeseries_csv


def run_cli(*argv):
    return main(list(argv))


class TestCsvRoundTrip:
    def test_values_survive_bitwise(self, tmp_path):
        rng = np.random.default_rng(80)
        ts = rk.TimeSeries(
            rng.standard_normal((37, 3)) * 10.0 ** rng.integers(-8, 8, size=(37, 3)),
            dt=0.25,
            labels=["a", "b", "c"],
        )
        path = tmp_path / "series.csv"
        write_timeseries_csv(path, ts)
        back = read_timeseries_csv(path)
        assert np.array_equal(back.values, ts.values)
        assert back.labels == ["a", "b", "c"]
        assert back.dt == pytest.approx(0.25)

    def test_header_required(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("")
        with pytest.raises(ValueError):
            read_timeseries_csv(path)


class TestSimulate:
    def test_chaotic_preset_shape(self, tmp_path, capsys):
        out = tmp_path / "orbit.csv"
        assert run_cli("simulate", "--regime", "chaotic", "--samples", "200",
                       "--t-end", "12", "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t,x1,x2,x3"
        assert len(lines) == 201
        assert "rows=200" in capsys.readouterr().out

    def test_explicit_params(self, tmp_path):
        out = tmp_path / "orbit.csv"
        code = run_cli("simulate", "--params", "0.5,0.1,0.1", "--ic", "1,1,1",
                       "--samples", "50", "--t-end", "5", "--out", str(out))
        assert code == 0
        assert read_timeseries_csv(out).values.shape == (50, 3)

    def test_missing_out_is_usage_error(self, capsys):
        assert run_cli("simulate", "--regime", "chaotic") == 2

    def test_missing_regime_and_params(self, tmp_path):
        assert run_cli("simulate", "--out", str(tmp_path / "x.csv")) == 2

    def test_malformed_params(self, tmp_path):
        assert run_cli("simulate", "--params", "1,2", "--ic", "1,1,1",
                       "--out", str(tmp_path / "x.csv")) == 2

    def test_grid_defaults(self):
        from rrckit.cli import build_parser

        args = build_parser().parse_args(
            ["simulate", "--regime", "chaotic", "--out", "x.csv"]
        )
        assert args.samples == 12000 and args.t_end == 120.0


@pytest.fixture(scope="module")
def orbit_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "orbit.csv"
    grid = rk.SimulationGrid(t_end=30.0, samples=600)
    write_timeseries_csv(path, rk.integrate(rk.CHAOTIC, grid))
    return path


class TestTrain:
    def test_trains_and_reports(self, orbit_csv, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        code = run_cli("train", "--input", str(orbit_csv), "--lag", "2",
                       "--order", "2", "--delta", "1e-8", "--epsilon", "1e-8",
                       "--train-frac", "0.5", "--seed", "3", "--out", str(model_path))
        assert code == 0
        out = capsys.readouterr().out
        for key in ("rank=", "nnz=", "residual_fro=", "rows=300", "seed=3"):
            assert key in out
        model = rk.load_model(model_path)
        assert model.L == 2 and model.p == 2

    def test_invalid_lag(self, orbit_csv, tmp_path):
        assert run_cli("train", "--input", str(orbit_csv), "--lag", "0",
                       "--out", str(tmp_path / "m.json")) == 2

    def test_missing_input(self, tmp_path):
        assert run_cli("train", "--input", str(tmp_path / "nope.csv"), "--lag", "1",
                       "--out", str(tmp_path / "m.json")) == 2

    def test_rank_zero_exit_names_delta(self, tmp_path, capsys):
        data = tmp_path / "flat.csv"
        write_timeseries_csv(data, rk.TimeSeries(np.linspace(0, 1, 30)))
        code = run_cli("train", "--input", str(data), "--lag", "1",
                       "--order", "1", "--delta", "1e9",
                       "--out", str(tmp_path / "m.json"))
        assert code == 1
        assert "1e+09" in capsys.readouterr().err

    def test_paired_target(self, orbit_csv, tmp_path):
        target = tmp_path / "target.csv"
        data = read_timeseries_csv(orbit_csv)
        write_timeseries_csv(target, rk.TimeSeries(2.0 * data.values, dt=data.dt))
        code = run_cli("train", "--input", str(orbit_csv), "--target", str(target),
                       "--lag", "1", "--order", "1", "--out", str(tmp_path / "m.json"))
        assert code == 0


class TestForecast:
    @pytest.fixture()
    def trained(self, orbit_csv, tmp_path):
        model_path = tmp_path / "model.json"
        assert run_cli("train", "--input", str(orbit_csv), "--lag", "2",
                       "--order", "2", "--delta", "1e-8", "--epsilon", "1e-8",
                       "--train-frac", "0.5", "--out", str(model_path)) == 0
        return model_path

    def test_single_step_matches_transform(self, trained, orbit_csv, tmp_path, capsys):
        out = tmp_path / "fc.csv"
        assert run_cli("forecast", "--model", str(trained), "--seed-data",
                       str(orbit_csv), "--horizon", "1", "--out", str(out)) == 0
        predicted = read_timeseries_csv(out).values[0]
        model = rk.load_model(trained)
        data = read_timeseries_csv(orbit_csv)
        window = rk.delay_embed(data, model.L, data.T)
        _, y_sel = rk.transform(model, window)
        assert np.array_equal(predicted, y_sel)

    def test_zero_horizon_rejected(self, trained, orbit_csv, tmp_path):
        assert run_cli("forecast", "--model", str(trained), "--seed-data",
                       str(orbit_csv), "--horizon", "0",
                       "--out", str(tmp_path / "fc.csv")) == 2

    def test_truth_metrics_lines(self, trained, orbit_csv, tmp_path, capsys):
        out = tmp_path / "fc.csv"
        assert run_cli("forecast", "--model", str(trained), "--seed-data",
                       str(orbit_csv), "--horizon", "5", "--truth", str(orbit_csv),
                       "--out", str(out)) == 0
        stdout = capsys.readouterr().out
        assert "nrmse_x1=" in stdout and "nrmse_x3=" in stdout

    def test_blowup_reports_step(self, tmp_path, capsys):
        data = tmp_path / "double.csv"
        write_timeseries_csv(data, rk.TimeSeries(2.0 ** np.arange(24)))
        model_path = tmp_path / "m.json"
        assert run_cli("train", "--input", str(data), "--lag", "1", "--order", "1",
                       "--delta", "1e-10", "--out", str(model_path)) == 0
        code = run_cli("forecast", "--model", str(model_path), "--seed-data",
                       str(data), "--horizon", "500", "--out", str(tmp_path / "fc.csv"))
        assert code == 1
        assert "step" in capsys.readouterr().err


class TestExposure:
    @pytest.fixture()
    def panel_csvs(self, tmp_path):
        panel, _ = rk.synth_panel(18, 15, 24, seed=90, noise_level=0.0)
        remit = tmp_path / "remit.csv"
        deposits = tmp_path / "deposits.csv"
        write_timeseries_csv(
            remit, rk.TimeSeries(panel.R, labels=[f"r{j+1}" for j in range(18)])
        )
        write_timeseries_csv(
            deposits, rk.TimeSeries(panel.D, labels=[f"d{j+1}" for j in range(15)])
        )
        return remit, deposits

    def test_planted_panel_all_exposures_tiny(self, panel_csvs, tmp_path, capsys):
        remit, deposits = panel_csvs
        out = tmp_path / "report.csv"
        code = run_cli("exposure", "--remittances", str(remit), "--deposits",
                       str(deposits), "--lagged", "--out", str(out))
        assert code == 0
        rows = out.read_text().splitlines()
        assert rows[0] == "institution,exposure,rank"
        assert len(rows) == 16  # header + one row per institution
        values = [float(line.split(",")[1]) for line in rows[1:]]
        assert max(values) <= 1e-8
        assert (tmp_path / "report_adjacency.csv").exists()
        assert (tmp_path / "report_fitted.csv").exists()

    def test_two_quarter_lagged_panel_rejected(self, tmp_path):
        remit = tmp_path / "r.csv"
        deposits = tmp_path / "d.csv"
        write_timeseries_csv(remit, rk.TimeSeries(np.ones((2, 3)) + np.arange(2)[:, None]))
        write_timeseries_csv(deposits, rk.TimeSeries(np.ones((2, 2)) + np.arange(2)[:, None]))
        assert run_cli("exposure", "--remittances", str(remit), "--deposits",
                       str(deposits), "--lagged", "--out", str(tmp_path / "o.csv")) == 2

    def test_holdout_eval_range_flag(self, panel_csvs, tmp_path):
        remit, deposits = panel_csvs
        out = tmp_path / "holdout.csv"
        code = run_cli("exposure", "--remittances", str(remit), "--deposits",
                       str(deposits), "--train-frac", "0.8",
                       "--eval-range", "holdout", "--out", str(out))
        assert code == 0
        assert len(out.read_text().splitlines()) == 16

    def test_degenerate_channel_names_column(self, panel_csvs, tmp_path, capsys):
        remit, deposits = panel_csvs
        data = read_timeseries_csv(deposits)
        values = data.values.copy()
        values[:, 4] = 0.0
        bad = tmp_path / "bad_deposits.csv"
        write_timeseries_csv(bad, rk.TimeSeries(values, labels=data.labels))
        code = run_cli("exposure", "--remittances", str(remit), "--deposits",
                       str(bad), "--out", str(tmp_path / "o.csv"))
        assert code == 1
        assert "d5" in capsys.readouterr().err


class TestSuggestLag:
    def test_white_noise(self, tmp_path, capsys):
        rng = np.random.default_rng(91)
        path = tmp_path / "noise.csv"
        write_timeseries_csv(path, rk.TimeSeries(rng.standard_normal(400)))
        assert run_cli("suggest-lag", "--input", str(path)) == 0
        assert "suggested_lag=1" in capsys.readouterr().out

    def test_cosine_period_forty(self, tmp_path, capsys):
        path = tmp_path / "cos.csv"
        write_timeseries_csv(
            path, rk.TimeSeries(np.cos(2 * np.pi * np.arange(400) / 40.0))
        )
        assert run_cli("suggest-lag", "--input", str(path)) == 0
        assert "suggested_lag=8" in capsys.readouterr().out

    def test_constant_channel_warns(self, tmp_path, capsys):
        path = tmp_path / "const.csv"
        values = np.column_stack([np.full(50, 1.0), np.sin(np.arange(50.0))])
        write_timeseries_csv(path, rk.TimeSeries(values, labels=["flat", "wave"]))
        assert run_cli("suggest-lag", "--input", str(path)) == 0
        captured = capsys.readouterr()
        assert "lag_flat=1" in captured.out
        assert "warning" in captured.err and "flat" in captured.err

    def test_too_short(self, tmp_path):
        path = tmp_path / "tiny.csv"
        write_timeseries_csv(path, rk.TimeSeries(np.array([1.0, 2.0])))
        assert run_cli("suggest-lag", "--input", str(path)) == 2


class TestDeterminism:
    def test_simulate_bytes_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert run_cli("simulate", "--regime", "periodic", "--samples", "150",
                           "--t-end", "10", "--out", str(out)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_train_and_forecast_bytes_identical(self, orbit_csv, tmp_path):
        models, forecasts = [], []
        for tag in ("a", "b"):
            model_path = tmp_path / f"model_{tag}.json"
            fc_path = tmp_path / f"fc_{tag}.csv"
            assert run_cli("train", "--input", str(orbit_csv), "--lag", "3",
                           "--order", "2", "--delta", "1e-10", "--train-frac", "0.5",
                           "--seed", "11", "--out", str(model_path)) == 0
            assert run_cli("forecast", "--model", str(model_path), "--seed-data",
                           str(orbit_csv), "--horizon", "20", "--out", str(fc_path)) == 0
            models.append(model_path.read_bytes())
            forecasts.append(fc_path.read_bytes())
        assert models[0] == models[1]
        assert forecasts[0] == forecasts[1]

    def test_exposure_bytes_identical(self, tmp_path):
        panel, _ = rk.synth_panel(8, 5, 20, seed=92, noise_level=0.02)
        remit, deposits = tmp_path / "r.csv", tmp_path / "d.csv"
        write_timeseries_csv(remit, rk.TimeSeries(panel.R))
        write_timeseries_csv(deposits, rk.TimeSeries(panel.D))
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / f"rep_{tag}.csv"
            assert run_cli("exposure", "--remittances", str(remit), "--deposits",
                           str(deposits), "--lagged", "--out", str(out)) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestHelp:
    def test_help_exits_zero(self):
        assert run_cli("--help") == 0

    def test_unknown_command_usage_error(self):
        assert run_cli("frobnicate") == 2
