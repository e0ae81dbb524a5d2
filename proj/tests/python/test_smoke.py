import math

import pytest

import ubranch


def test_closed_forms():
    assert ubranch.gw_mean(2.0, 1.0, 1.0) == pytest.approx(math.e)
    assert ubranch.extinction_prob(2.0, 1.0) == pytest.approx(0.5)
    assert ubranch.yule_pmf(3, math.log(2.0), 1.0) == pytest.approx(0.125)
    assert ubranch.long_jump_prob(10, 0.5) / 0.5**20 == pytest.approx(1.0, rel=0.01)
    s = ubranch.schedule_lower(4)
    assert s["t"] == pytest.approx(3.0 * 2.0 - 1.0)
    assert not s["degenerate"]


def test_simulate_lines_is_deterministic():
    a = ubranch.simulate_lines(horizon=3.0, seed=5)
    b = ubranch.simulate_lines(horizon=3.0, seed=5)
    assert a == b
    assert a["population"][0] == 1
    assert all(x <= y for x, y in zip(a["max_line"], a["max_line"][1:]))
    exits = ubranch.simulate_lines(horizon=3.0, seed=5, exits=True)
    assert exits["t"] == a["t"]


def test_simulate_spatial():
    t = ubranch.simulate_spatial(horizon=2.0, seed=3)
    assert t["max_position"][0] == 0.0
    assert len(t["t"]) == 101


def test_experiments():
    s = ubranch.extinction_experiment(replicates=2000, tolerance=0.05)
    assert s["verdict"] == "pass"
    y = ubranch.yule_law_experiment(replicates=5000, tolerance=0.03)
    assert y["estimate"] <= 0.03
    d = ubranch.domination_quantiles([1.0] * 1000, [2.0] * 1000, [0.5], resamples=100)
    assert d["verdict"] == "pass"
    assert d["levels"][0]["violated"] is False
    assert ubranch.schema_version == 1


def test_errors_map_to_python_exceptions():
    with pytest.raises(ubranch.InvariantError):
        ubranch.simulate_lines(gamma=1.5)
    with pytest.raises(ValueError):
        ubranch.domination_quantiles([1.0], [1.0, 2.0], [0.5])
