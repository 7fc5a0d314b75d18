import json

import pytest

from gibbstv.errors import ParameterError
from gibbstv.geometry import Window
from gibbstv.harness import (
    Scenario,
    draw_samples,
    gnz_residual,
    h_empty_ball,
    h_one,
    run_bound,
    sweep_points,
    verify_bounds_report,
)
from gibbstv.models import Poisson, Strauss

WIN = {"dim": 2, "lower": [0, 0], "upper": [1, 1], "torus": True}


def strauss(beta, gamma, R):
    return {"kind": "Strauss", "window": WIN, "params": {"beta": beta, "gamma": gamma, "R": R}}


def test_scenario_validation():
    with pytest.raises(ParameterError):
        Scenario.from_dict({"name": "x", "task": "nope", "model_xi": strauss(10, 0.5, 0.1)})
    with pytest.raises(ParameterError):
        Scenario.from_dict({"name": "x", "task": "verify", "model_xi": strauss(10, 0.5, 0.1), "theorem": "main"})
    with pytest.raises(ParameterError):
        Scenario.from_dict({"name": "x", "task": "simulate", "model_xi": strauss(10, 0.5, 0.1), "bogus": 1})
    with pytest.raises(ParameterError):
        Scenario.from_dict({"name": "x", "task": "simulate", "model_xi": strauss(10, 0.5, 0.1), "mc": {"reps": 0}})
    s = Scenario.from_dict({"name": "x", "task": "simulate", "model_xi": strauss(10, 0.5, 0.1)})
    assert s.with_overrides(seed=5, reps=7).mc["seed"] == 5
    assert Scenario.from_dict(s.to_dict()) == s


def test_sweep_points():
    s = Scenario.from_dict({
        "name": "sw", "task": "bound", "theorem": "inhibitory_pip",
        "model_xi": strauss(50, 0.4, 0.1), "model_h": strauss(50, 0.5, 0.1),
        "sweep": {"model_xi.params.gamma": [0.1, 0.2]},
    })
    pts = list(sweep_points(s))
    assert [p for p, _ in pts] == [{"model_xi.params.gamma": 0.1}, {"model_xi.params.gamma": 0.2}]
    rows = run_bound(s)
    assert rows[1][1].bound == pytest.approx(rows[0][1].bound * 0.3 / 0.4)


def test_identical_models_verify():
    s = Scenario.from_dict({
        "name": "same", "task": "verify", "theorem": "inhibitory_pip",
        "model_xi": strauss(20, 0.5, 0.05), "model_h": strauss(20, 0.5, 0.05),
        "mc": {"reps": 300, "seed": 4},
        "gnz": {"n": 200},
    })
    rep = verify_bounds_report(s)
    assert rep.theoretical.bound == 0.0
    assert rep.ordering_ok
    assert rep.empirical_lower - 3 * rep.empirical_se <= 0
    assert len(rep.gnz_residuals) == 2


def test_verify_determinism():
    d = {
        "name": "det", "task": "verify", "theorem": "inhibitory_pip",
        "model_xi": strauss(20, 0.4, 0.05), "model_h": strauss(20, 0.5, 0.05),
        "mc": {"reps": 150, "seed": 9}, "gnz": {"n": 100, "radius": 0.05},
    }
    a = verify_bounds_report(Scenario.from_dict(d)).to_json()
    b = verify_bounds_report(Scenario.from_dict(d)).to_json()
    assert a == b
    assert json.loads(a)["ordering_ok"] is True


def test_gnz_poisson_exact_lhs(unit2):
    m = Poisson(unit2, 10)
    r = gnz_residual(m, h_one, n=2000, seed=1)
    assert abs(r.residual) <= 3 * r.se
    # h = 1: the right-hand side is beta |X| exactly
    assert r.rhs == pytest.approx(10.0)


def test_gnz_strauss_empty_ball():
    m = Strauss(Window.unit(2, True), 50, 0.5, 0.05)
    smp = draw_samples(m, 600, seed=2, key=3)
    for h in (h_one, h_empty_ball(0.05)):
        r = gnz_residual(m, h, samples=smp, seed=2)
        assert r.ok
