import json
import math

import numpy as np
import pytest

import hotspotkde as hk

FORECAST_WEEK = "2019-03-03"
TRAINING_WEEK = "2019-02-24"


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("ws")
    hk.synthesize_events(str(root / "events.csv"), weeks=10, clusters=6, events_per_week=50, seed=3)
    config = {
        "events_csv": "events.csv",
        "store": "store",
        "grid": {"cell_m": 400},
        "history_weeks": 3,
        "schedule": {"warmup": 10, "samples": 10},
        "fast_eval": True,
    }
    return hk.open_workspace(config, root)


def test_kernels_match_closed_forms():
    assert hk.gaussian_kernel(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert hk.log_bessel_i0(0.0) == pytest.approx(0.0)
    assert hk.von_mises_interval_mass(12.0, 0.0, 24.0, 2.0) == pytest.approx(1.0, abs=1e-9)
    assert hk.von_mises_density(0.0, 1.0) > hk.von_mises_density(12.0, 1.0)


def test_event_area_auc_perfect_ranking():
    assert hk.event_area_auc([0, 1, 2, 3], [5, 0, 0, 0]) == pytest.approx(0.875)
    assert hk.event_area_auc([0, 1], [0, 0]) is None


def test_fit_forecast_evaluate(workspace):
    assert len(workspace.weeks()) == 10
    assert workspace.forecast(FORECAST_WEEK, "20-24") is None
    models = workspace.fit(TRAINING_WEEK)
    assert len(models) == 1
    fid = workspace.forecast(FORECAST_WEEK, "20-24")
    f = workspace.load_forecast(fid)
    assert f["week"] == FORECAST_WEEK
    assert isinstance(f["log_density"], np.ndarray)
    assert f["log_density"].shape == (workspace.cell_count,)
    assert f["classes"].count("red") == math.ceil(0.2 * workspace.cell_count)
    e = workspace.evaluate(fid)
    assert e["has_actuals"]
    assert e["auc"] > 0.6
    assert json.loads(workspace.forecast_geojson(fid))["type"] == "FeatureCollection"


def test_intel_changes_the_map(workspace):
    (model,) = workspace.fit(TRAINING_WEEK)
    plain = workspace.forecast(FORECAST_WEEK, "20-24")
    assert workspace.forecast_with_intel(model, FORECAST_WEEK, "20-24", []) == plain
    points = [{"lon": 77.2, "lat": 28.6, "window": "20-24"}]
    with_intel = workspace.forecast_with_intel(model, FORECAST_WEEK, "20-24", points)
    assert with_intel != plain
    diff = json.loads(workspace.diff_geojson(plain, with_intel))
    assert diff["summary"]["blue"] == diff["summary"]["green"]


def test_errors_map_to_python_exceptions(workspace):
    with pytest.raises(ValueError):
        workspace.fit("03/03/2019")
    with pytest.raises(LookupError):
        workspace.load_forecast("forecast-0000")


def test_cli_in_process(tmp_path):
    code, out, err = hk.run_cli(["--help"])
    assert code == 0
    assert "backtest" in out
    code, _, err = hk.run_cli(["fit", "--bogus"])
    assert code == 2
