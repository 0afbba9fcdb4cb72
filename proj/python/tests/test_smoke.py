import math

import pytest

import weaklp


def test_constants():
    assert weaklp.k_closed_form(1.0, 1) == 2.0
    assert weaklp.k_closed_form(2.0, 3) == pytest.approx(4 * math.pi / 3, rel=1e-12)
    k = weaklp.k_constant(1.5, 2)
    assert k["k"] == pytest.approx(k["k_quad"], rel=1e-6)


def test_field_and_limit_fixture():
    u = weaklp.catalogue_field("bump", 1)
    assert u.dim == 1
    assert u([0.0]) == pytest.approx(math.exp(-1.0))
    assert weaklp.limit_prediction(u, 1.0) == pytest.approx(1.471518, rel=1e-6)
    value, err = weaklp.pair_measure(u, 1.0, 100.0)
    assert 100.0 * value == pytest.approx(1.471518, rel=0.05)


def test_field_spec_and_refusal():
    u = weaklp.field({"kind": "bump", "dim": 2, "radius": 2.0})
    assert u.dim == 2
    with pytest.raises(ValueError):
        weaklp.field({"kind": "bump", "dim": 2, "radius": -1.0})


def test_vitali_hand_trace():
    assert weaklp.vitali_select([(0.5, 1.5), (3.0, 4.0), (0.0, 1.0)]) == [(0.0, 1.0), (3.0, 4.0)]


def test_run_experiment_is_worker_independent():
    cfg = {"kind": "covering", "fields": 5, "cells": 32, "seed": 7}
    a = weaklp.run_experiment(cfg, workers=1)
    b = weaklp.run_experiment(cfg, workers=3)
    assert a[2] == 0
    assert a[0] == b[0]
    assert a[1] == b[1]
    assert a[0]["schema"] == 1


def test_bad_config_names_field():
    with pytest.raises(ValueError, match="lambdas"):
        weaklp.run_experiment({"kind": "limit", "field": {"kind": "zero", "dim": 1}, "lambdas": [0.0]})
