"""Event regulation experiments: Python front end to the C++ core."""

import json

from ._core import (
    ConfigError,
    EventTrain,
    MatchReport,
    MetricError,
    catalog,
    detect_events,
    fn_dynamics,
    id_for_figure,
    if_time_to_threshold,
    match_trains,
    phase_offset,
    preset_names,
    spurious_count,
)
from . import _core

__all__ = [
    "ConfigError",
    "EventTrain",
    "MatchReport",
    "MetricError",
    "catalog",
    "default_parameters",
    "detect_events",
    "fn_dynamics",
    "id_for_figure",
    "if_time_to_threshold",
    "match_trains",
    "phase_offset",
    "preset_names",
    "run_experiment",
    "simulate",
    "spurious_count",
]


def _encode(overrides):
    return [(k, json.dumps(v)) for k, v in (overrides or {}).items()]


def default_parameters(experiment):
    return json.loads(_core.default_parameters_json(experiment))


def simulate(experiment, seed=None, overrides=None):
    """Run in memory and return the metrics dict."""
    return _core.simulate_metrics(experiment, seed, _encode(overrides))


def run_experiment(experiment, seed=None, overrides=None, out_dir="", force=False):
    """Run and write the result set. Returns (out_dir, metrics, manifest)."""
    path, metrics, manifest = _core.run_experiment(experiment, seed, _encode(overrides), str(out_dir), force)
    return path, metrics, json.loads(manifest)
