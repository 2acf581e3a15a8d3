# tests/test_cli.py
import io
import math

import pandas as pd
import pytest

from app.main import main


def run_cli(capsys, *argv):
    status = main(list(argv))
    captured = capsys.readouterr()
    return status, captured.out, captured.err


def read_rows(out):
    return pd.read_csv(io.StringIO(out))


def test_eval_connectivity_reference(capsys, table1_path):
    status, out, _ = run_cli(capsys, "eval", "--scenario", str(table1_path), "--metric", "connectivity")
    assert status == 0
    frame = read_rows(out)
    assert list(frame.columns) == [
        "metric", "lambda", "mu", "h_a_km", "platform", "param_name", "param_value", "value", "error",
    ]
    assert len(frame) == 1
    assert 0.99 < frame.loc[0, "value"] <= 1.0


def test_eval_delay_at_zero_matches_connectivity(capsys):
    _, out, _ = run_cli(capsys, "eval", "--metric", "connectivity", "--lambda", "3", "--mu", "3")
    connectivity = read_rows(out).loc[0, "value"]
    _, out, _ = run_cli(capsys, "eval", "--metric", "delay-ccdf", "--lambda", "3", "--mu", "3", "--t", "0,60")
    frame = read_rows(out)
    assert frame.param_name.tolist() == ["t_s", "t_s"]
    assert frame.loc[0, "value"] == pytest.approx(1.0 - connectivity, abs=1e-10)
    assert frame.loc[1, "value"] < frame.loc[0, "value"]


def test_eval_effective_satellites_platform_switch(capsys):
    _, out, _ = run_cli(capsys, "eval", "--metric", "effective-satellites", "--lambda", "15", "--mu", "10", "--platform", "off")
    without = read_rows(out).loc[0, "value"]
    _, out, _ = run_cli(capsys, "eval", "--metric", "effective-satellites", "--lambda", "15", "--mu", "10")
    with_platform = read_rows(out).loc[0, "value"]
    assert without == pytest.approx(6.0, abs=0.7)
    assert with_platform == pytest.approx(8.0, abs=0.7)


def test_eval_snr_thresholds_are_reported_in_db(capsys):
    _, out, _ = run_cli(capsys, "eval", "--metric", "snr-coverage-ground", "--tau-db", "0,10")
    frame = read_rows(out)
    assert frame.param_name.tolist() == ["tau_db", "tau_db"]
    assert frame.param_value.tolist() == pytest.approx([0.0, 10.0])


def test_eval_writes_file(capsys, tmp_path):
    target = tmp_path / "nested" / "gain.csv"
    status, out, _ = run_cli(capsys, "eval", "--metric", "gain-factors", "--out", str(target))
    assert status == 0
    assert out == ""
    frame = pd.read_csv(target)
    assert frame.metric.tolist() == ["gain-factors:orbit", "gain-factors:satellite", "gain-factors:orbit-linearized"]
    assert b"\r\n" not in target.read_bytes()


def test_missing_grid_flag_exits_2(capsys):
    status, out, err = run_cli(capsys, "eval", "--metric", "range-ccdf")
    assert status == 2
    assert out == ""
    assert "needs --d" in err


def test_unknown_metric_exits_2(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["eval", "--metric", "coverage-probability"])
    assert excinfo.value.code == 2


def test_bad_scenario_file_exits_2(capsys, tmp_path):
    path = tmp_path / "broken.env"
    path.write_text("mean_orbits=5\nmean_orbits=6\n", encoding="utf-8")
    status, _, err = run_cli(capsys, "eval", "--scenario", str(path), "--metric", "connectivity")
    assert status == 2
    assert f"{path}:2:" in err


def test_eval_rejects_ranges(capsys):
    status, _, err = run_cli(capsys, "eval", "--metric", "connectivity", "--lambda", "1:5:1")
    assert status == 2
    assert "sweep" in err


def test_sweep_grid(capsys):
    status, out, _ = run_cli(capsys, "sweep", "--metric", "connectivity", "--lambda", "3:15:6", "--mu", "5,10")
    assert status == 0
    frame = read_rows(out)
    assert len(frame) == 6
    assert sorted(set(frame["lambda"])) == [3.0, 9.0, 15.0]
    for _, group in frame.groupby("mu"):
        assert group.sort_values("lambda").value.is_monotonic_increasing


def test_sweep_over_platform_altitude(capsys):
    _, out, _ = run_cli(capsys, "sweep", "--metric", "connectivity", "--lambda", "3", "--mu", "3", "--h-a", "0:100:50")
    frame = read_rows(out)
    assert frame.h_a_km.tolist() == pytest.approx([0.0, 50.0, 100.0])
    assert frame.value.is_monotonic_increasing


def test_sweep_ground_rate_from_ground_level(capsys):
    status, out, err = run_cli(capsys, "sweep", "--metric", "rate-ground", "--h-a", "0:20:10")
    assert status == 0, err
    frame = read_rows(out)
    assert frame.h_a_km.tolist() == pytest.approx([0.0, 10.0, 20.0])
    assert frame.value.is_monotonic_decreasing


def test_negative_threshold_range_needs_equals_form(capsys):
    status, out, _ = run_cli(capsys, "eval", "--metric", "snr-coverage-ground", "--tau-db=-5:5:5")
    assert status == 0
    assert read_rows(out).param_value.tolist() == pytest.approx([-5.0, 0.0, 5.0])


def test_sweep_with_monte_carlo(capsys):
    status, out, _ = run_cli(
        capsys, "sweep", "--metric", "connectivity", "--lambda", "3", "--mu", "3", "--with-mc", "5000", "--seed", "7"
    )
    assert status == 0
    frame = read_rows(out)
    assert {"mc_mean", "mc_stderr", "mc_trials"} <= set(frame.columns)
    row = frame.iloc[0]
    assert row.mc_trials == 5000
    assert abs(row.mc_mean - row.value) <= 4.5 * row.mc_stderr


def test_sample_is_reproducible(capsys):
    _, first, _ = run_cli(capsys, "sample", "--lambda", "10", "--mu", "8", "--seed", "42")
    _, second, _ = run_cli(capsys, "sample", "--lambda", "10", "--mu", "8", "--seed", "42")
    _, other, _ = run_cli(capsys, "sample", "--lambda", "10", "--mu", "8", "--seed", "43")
    assert first == second
    assert first != other
    frame = read_rows(first)
    radius = (frame.x_km ** 2 + frame.y_km ** 2 + frame.z_km ** 2) ** 0.5
    assert radius.tolist() == pytest.approx([6921.0] * len(frame), rel=1e-9)


def test_sample_epoch(capsys):
    _, out, _ = run_cli(capsys, "sample", "--lambda", "5", "--mu", "5", "--seed", "1", "--epoch", "60")
    frame = read_rows(out)
    assert (frame.epoch_s == 60.0).all()


def test_validate_trivial_grid(capsys, tmp_path):
    target = tmp_path / "report.csv"
    status, _, err = run_cli(capsys, "validate", "--grid", "trivial", "--trials", "2500", "--out", str(target))
    assert status == 0
    assert "0 flagged" in err
    report = pd.read_csv(target)
    assert (report.z_score == 0.0).all()


def test_validate_detects_corruption(capsys):
    status, out, err = run_cli(capsys, "validate", "--grid", "trivial", "--trials", "2500", "--corrupt")
    assert status == 1
    assert "FLAG connectivity" in err
    report = read_rows(out)
    flagged = report[report.metric_id == "connectivity"]
    # simulated 0 against 0.05 at 2500 trials: binomial stderr of the analytical share
    assert flagged.mc_stderr.iloc[0] == pytest.approx(math.sqrt(0.05 * 0.95 / 2500))
    assert flagged.z_score.iloc[0] == pytest.approx(0.05 / math.sqrt(0.05 * 0.95 / 2500))


def test_validate_rejects_tiny_runs(capsys):
    status, _, err = run_cli(capsys, "validate", "--grid", "trivial", "--trials", "10")
    assert status == 2
    assert "at least 100" in err
