# Copyright 2026 The joinlab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math
import os
import pathlib

import numpy as np
import pytest

import joinlab

FIXTURES = pathlib.Path(os.environ.get("JOINLAB_FIXTURES", pathlib.Path(__file__).parents[2] / "tests" / "fixtures"))


def load(name):
    return json.loads((FIXTURES / name).read_text())


def test_experiment_ids():
    ids = joinlab.experiment_ids()
    assert "bernoulli-nondec" in ids
    assert len(ids) == 9


def test_constants_table():
    by_name = {row["name"]: row["value"] for row in joinlab.constants()}
    assert by_name["bernoulli.two_var_R"] == pytest.approx(5 / 96, abs=1e-15)
    assert by_name["markov2.sigma_h2.series"] == pytest.approx(by_name["markov2.sigma_h2.spectral"], abs=1e-12)


def test_markov_spectrum_two_state():
    s = joinlab.markov_spectrum([[0.7, 0.3], [0.3, 0.7]])
    lam = 1 - 2 * 0.42
    assert s["sigma_h2_spectral"] == pytest.approx(0.25 * (1 + lam) / (1 - lam), abs=1e-12)
    assert s["abs_diff_limit"] == pytest.approx(2 * math.sqrt(s["sigma_h2_spectral"] / math.pi))


def test_wp_assignment_matches_sorted_coupling():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=50), rng.normal(0.3, 1.0, size=50)
    value, _ = joinlab.wp_assignment(a, b)
    assert value == pytest.approx(np.mean(np.abs(np.sort(a) - np.sort(b))), abs=1e-12)
    with pytest.raises(ValueError):
        joinlab.wp_assignment(a.reshape(25, 2), b)


def test_reproduce_small_run():
    config = {"seed": 3, "samples": 20000, "params": {"m": [2]}}
    report = joinlab.reproduce("doubling-variance", config)
    assert report["experiment"] == "doubling-variance"
    assert len(report["rows"]) == 1
    with pytest.raises(ValueError):
        joinlab.reproduce("doubling-variance", {"samples": 10})


def test_depbound_product_is_zero():
    config = {
        "seed": 1,
        "samples": 100,
        "system": {"kind": "bernoulli", "K": 12},
        "family": [{"kind": "product"}],
        "grid": [{"n": 2, "m": 1}],
        "expect": "zero",
    }
    report = joinlab.depbound(config)
    assert all(row["pass"] for row in report["rows"])


def test_twin_quotient_fixture():
    space = load("planted_twins.json")
    quotient = joinlab.twin_quotient(space)
    assert quotient == joinlab.twin_quotient(load("planted_twins.quotient.json"))
    assert joinlab.twin_blocks(space) == [[0, 3], [1], [2]]
    for n in (1, 2, 3):
        assert joinlab.array_laws_equal(space, quotient, n)
    ok, witness, _ = joinlab.kernel_isomorphic(quotient, load("planted_twins.quotient.json"))
    assert ok and witness == [0, 1, 2]


def test_malformed_space_is_rejected():
    with pytest.raises(ValueError):
        joinlab.twin_quotient(load("malformed.json"))
    with pytest.raises(ValueError):
        joinlab.twin_quotient("{not json")
