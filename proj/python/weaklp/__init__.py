"""Weak-L^p difference quotient estimators (Python front end)."""

import json

from ._core import *  # noqa: F401,F403
from ._core import __version__, field_from_json as _field_from_json, run_experiment_json


def field(spec):
    """Build a field from a dict such as {"kind": "bump", "dim": 2}."""
    return _field_from_json(json.dumps(spec))


def run_experiment(config, workers=0, seed=None):
    """Run an experiment config (dict). Returns (report dict, {csv name: text}, exit code)."""
    report, tables, code = run_experiment_json(json.dumps(config), workers, seed)
    return json.loads(report), dict(tables), code
