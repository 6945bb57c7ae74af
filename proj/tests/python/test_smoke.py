import json
import math

import pytest

import eventreg


def test_catalog_has_nine_entries():
    ids = [entry[0] for entry in eventreg.catalog()]
    assert len(ids) == 9
    assert eventreg.id_for_figure("fig10") == "event-rejection"


def test_default_parameters_is_a_dict():
    params = eventreg.default_parameters("if-sync")
    assert params["grid"]["dt"] > 0
    assert "seeds" in params


def test_unknown_override_raises():
    with pytest.raises(eventreg.ConfigError, match="synapse.nope"):
        eventreg.simulate("event-rejection", overrides={"synapse.nope": 1.0})


def test_fn_dynamics_matches_formula():
    dv, di = eventreg.fn_dynamics(0.0, 0.0, 0.5)
    assert dv == pytest.approx(0.5, abs=1e-12)
    assert di == pytest.approx(0.7 / 12.5, abs=1e-12)


def test_if_period():
    assert eventreg.if_time_to_threshold(0.0, 1.0, 0.5) == pytest.approx(2 * math.log(2), abs=1e-12)


def test_event_metrics():
    ref = eventreg.EventTrain([1.0, 2.0, 3.0])
    test = eventreg.EventTrain([1.01, 2.02, 3.01, 5.0])
    report = eventreg.match_trains(ref, test, 0.05)
    assert report.matched_fraction == 1.0
    assert report.extra_test == 1
    assert eventreg.spurious_count(ref, test, 0.05) == 1
    with pytest.raises(eventreg.MetricError):
        eventreg.phase_offset(eventreg.EventTrain([1.0, 2.0]), ref)


def test_detect_sine_crossings():
    t = [k * 1e-3 for k in range(20001)]
    v = [math.sin(x) for x in t]
    train = eventreg.detect_events(t, v, 0.0, up=True, refractory=1.0)
    assert len(train) == 4
    assert train.times[1] == pytest.approx(2 * math.pi, abs=1e-3)


def test_small_run_writes_result_set(tmp_path):
    out, metrics, manifest = eventreg.run_experiment(
        "if-sync", seed=2, overrides={"seeds": 5, "grid.t_end": 20.0}, out_dir=tmp_path / "ifsync"
    )
    assert metrics["n10_eps0.seeds"] == 5
    assert manifest["seed"] == 2
    written = json.loads((out / "metrics.json").read_text())
    assert written == pytest.approx(metrics)
    assert (out / "events.csv").read_text().startswith("trial_id,label,time\n")
