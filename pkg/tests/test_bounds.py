import json
import math

import numpy as np
import pytest
from scipy import integrate

from gibbstv import bounds as B
from gibbstv.errors import ParameterError, StabilityError
from gibbstv.geometry import Window
from gibbstv.harness import draw_samples
from gibbstv.models import BiScaleStrauss, LennardJones, Poisson, Strauss, restrict_to_Ak
from gibbstv.stein import stein_params

T2 = Window.unit(2, torus=True)


def test_main_identical_and_poisson_pair(unit2):
    s = Strauss(T2, 50, 0.5, 0.1)
    assert B.tv_bound_main(s, s).bound == 0.0
    r = B.tv_bound_main(Poisson(unit2, 10), Poisson(unit2, 12))
    assert r.stein.c1 == 1.0
    assert r.bound == pytest.approx(2.0)
    assert r.vacuous


def test_main_strauss_vs_poisson():
    r = B.tv_bound_main(Strauss(T2, 50, 0.9, 0.05), Poisson(T2, 50))
    assert r.stein.c1 == 1.0
    assert r.bound == pytest.approx(50 * 50 * 0.1 * math.pi * 0.05**2, rel=1e-9)


def test_main_monte_carlo_below_envelope():
    xi, h = Strauss(T2, 50, 0.9, 0.05), Poisson(T2, 50)
    smp = draw_samples(xi, 200, seed=5, key=1)
    mc = B.tv_bound_main(xi, h, samples=smp, seed=5)
    env = B.tv_bound_main(xi, h)
    assert mc.intensity_mode == "monte_carlo"
    assert mc.bound - 3 * mc.stderr <= env.bound


def test_main_needs_envelope():
    bi = BiScaleStrauss(T2, 10, 0.5, 1.01, 0.05, 0.1)
    with pytest.raises(StabilityError):
        B.tv_bound_main(Poisson(T2, 10), bi)


def test_inhibitory_strauss_examples():
    h = Strauss(T2, 50, 0.5, 0.1)
    c1 = stein_params(h).c1
    r = B.tv_bound_inhibitory_pip(Strauss(T2, 50, 0.4, 0.1), h)
    assert r.bound == pytest.approx(c1 * 50 * 50 * 0.1 * math.pi * 0.01, rel=1e-9)
    assert B.tv_bound_inhibitory_pip(h, h).bound == 0.0
    r = B.tv_bound_inhibitory_pip(Strauss(T2, 50, 0.5, 0.12), h)
    assert r.bound == pytest.approx(c1 * 50 * 50 * 0.5 * math.pi * (0.12**2 - 0.1**2), rel=1e-9)
    with pytest.raises(ParameterError):
        B.tv_bound_inhibitory_pip(Strauss(T2, 40, 0.5, 0.1), h)


def test_inhibitory_linear_in_gamma_gap():
    h = Strauss(T2, 50, 0.5, 0.1)
    ratios = [B.tv_bound_inhibitory_pip(Strauss(T2, 50, g, 0.1), h).bound / abs(g - 0.5) for g in (0.1, 0.3, 0.45, 0.7, 0.9)]
    assert np.ptp(ratios) <= 1e-12 * ratios[0]


def test_poisson_vs_hardcore_value():
    r = B.tv_bound_inhibitory_pip(Strauss(T2, 10, 0.0, 0.02), Poisson(T2, 10))
    assert r.bound == pytest.approx(100 * math.pi * 4e-4, abs=1e-12)


def test_radial_l1_against_quad():
    s1, s2 = Strauss(T2, 50, 0.4, 0.12), Strauss(T2, 50, 0.5, 0.1)
    val = B.radial_l1(s1.interaction, s2.interaction, 2)
    f = lambda s: abs(s1.interaction(np.array([s]))[0] - s2.interaction(np.array([s]))[0]) * 2 * math.pi * s  # noqa: E731
    ref = integrate.quad(f, 0, 0.2, points=[0.1, 0.12])[0]
    assert val == pytest.approx(ref, rel=1e-9)


def test_hardcore_pip():
    a = B.tv_bound_hardcore_pip(Strauss(T2, 20, 0.0, 0.05), Strauss(T2, 20, 0.0, 0.05))
    assert a.bound == 0.0
    # inhibitory hard-core pair: M_1 = 1 and the value matches the inhibitory bound
    from gibbstv.models import HardCorePIP

    x, h = HardCorePIP(T2, 20, 0.02, 0.4, 0.06), HardCorePIP(T2, 20, 0.02, 0.6, 0.06)
    r = B.tv_bound_hardcore_pip(x, h)
    assert r.intermediates["M_k"] == 1.0
    assert r.bound == pytest.approx(B.tv_bound_inhibitory_pip(x, h).bound, rel=1e-12)
    with pytest.raises(ParameterError):
        B.tv_bound_hardcore_pip(Strauss(T2, 20, 0.5, 0.05), Strauss(T2, 20, 0.5, 0.05))


def test_general_pip_identical_tail_only():
    m = BiScaleStrauss(T2, 10, 0.5, 1.002, 0.05, 0.1)
    r = B.tv_bound_general_pip(m, m, [3, 6], 0.05, moments={"xi": 20.0, "h": 20.0})
    assert r.first_term == 0.0
    assert r.bound == pytest.approx(r.tail)
    assert r.tail < 1e-6


def test_general_pip_biscale_first_term():
    xi = BiScaleStrauss(T2, 10, 0.5, 1.004, 0.05, 0.1)
    h = BiScaleStrauss(T2, 10, 0.5, 1.002, 0.05, 0.1)
    k, delta = 2, 0.05
    r = B.tv_bound_general_pip(xi, h, k, delta, moments={"xi": 15.0, "h": 15.0})
    inter = r.intermediates
    c1 = r.stein.c1
    mk = inter["m_k"]
    E = restrict_to_Ak(xi, k, delta).envelope_max()  # envelope count on the unit torus
    expected = c1 * math.pi * 10 * 1.004**mk * E * (1.004 - 1.002) * (0.1**2 - 0.05**2)
    assert r.first_term == pytest.approx(expected, rel=1e-9)
    # tail: gamma^{k(k+1)/2} B^k / ((k+1)! C^k) (m_xi + m_h)
    Bd = 10 * math.pi * 0.05**2
    tail = 0.5**3 * Bd**2 / (6 * 1.004**2) * 30.0
    assert r.tail == pytest.approx(tail, rel=1e-12)


def test_general_pip_k_sweep_is_minimum():
    xi = BiScaleStrauss(T2, 10, 0.5, 1.004, 0.05, 0.1)
    h = BiScaleStrauss(T2, 10, 0.5, 1.002, 0.05, 0.1)
    r = B.tv_bound_general_pip(xi, h, [1, 2, 3], 0.05, moments={"xi": 15.0, "h": 15.0})
    assert r.bound == min(row["bound"] for row in r.intermediates["k_sweep"])


def test_moment_bound_ruelle():
    m = Poisson(Window.unit(2), 10)
    m.ruelle = {"psi_star": 10.0}
    assert B.moment_bound_ruelle(m, 1, 1.0) == pytest.approx(10 * math.exp(9), rel=1e-12)
    assert B.moment_bound_ruelle(m, 0, 1.0) == pytest.approx(10 * math.exp(9), rel=1e-12)
    with pytest.raises(ParameterError):
        B.moment_bound_ruelle(Strauss(T2, 10, 0.5, 0.1), 1, 1.0)


def test_moment_bound_dominates_mc():
    s = Strauss(T2, 10, 0.5, 0.1)
    s.ruelle = {"psi_star": 10.0}
    smp = draw_samples(s, 300, seed=3, key=1)
    est, se = B.mc_moment(smp, 1.0, 1)
    assert est <= B.moment_bound_ruelle(s, 1, 1.0)


def test_lj_L_example():
    val = B.lj_L(0.1, 0.01)
    assert 0.25e12 - 4 * math.pi * math.sqrt(3) * 0.09**2 / (1e-6 * 0.08**5) == pytest.approx(val, rel=1e-12)
    assert val == pytest.approx(1.96e11, rel=5e-3)


def test_lj_identical_tail_only_and_errors():
    w3 = Window((0, 0, 0), (10, 10, 10), torus=True)
    m = LennardJones(w3, 0.1, 1e-5, 1.0)
    r = B.tv_bound_lennard_jones(m, m, 1, 0.1)
    assert r.first_term == 0.0
    assert r.bound == pytest.approx(r.tail)
    with pytest.raises(ParameterError):
        B.tv_bound_lennard_jones(m, m, 1, 0.6)


def test_area_bounds():
    R, g, b0 = 0.1, 0.01, 10.0
    beta = B.calibrated_beta(b0, g, R)
    r = B.tv_bound_area_vs_hardcore(beta, g, R, b0)
    assert r.intermediates["activity_gap"] == pytest.approx(0.0, abs=1e-12)
    assert B.area_I_closed(0.1, 0.01) == pytest.approx(0.330379, abs=1e-6)
    assert B.area_I(0.1, 0.01) <= B.area_I_closed(0.1, 0.01)
    assert B.area_I(0.2, 1.0) == pytest.approx(math.pi * 0.04)
    assert B.tv_lower_area(b0, 1.0, 0.1, 0.2) == pytest.approx(math.exp(-b0) * b0**2 * 0.18 * math.pi * 0.01)
    assert B.area_kappa(b0, 0.2) == pytest.approx(math.exp(-b0) * b0**2 * 0.18)
    with pytest.raises(ParameterError):
        B.tv_bound_area_vs_hardcore(1, 1.5, 0.1, 1)


def test_area_I_against_grid():
    # direct 2D midpoint grid of gamma^{lens} over B(0, R)
    R, g = 0.1, 0.1
    n = 801
    s = (np.arange(n) + 0.5) / n * 2 * R - R
    X, Y = np.meshgrid(s, s)
    d = np.hypot(X, Y)
    inside = d <= R
    vals = g ** B.lens_volume(d[inside], R / 2, 2)
    ref = float(vals.sum()) * (2 * R / n) ** 2
    assert B.area_I(R, g) == pytest.approx(ref, rel=2e-3)


def test_report_json():
    r = B.tv_bound_inhibitory_pip(Strauss(T2, 50, 0.4, 0.1), Strauss(T2, 50, 0.5, 0.1))
    d = json.loads(r.to_json())
    assert d["theorem_id"] == r.theorem_id
    assert d["vacuous"] is True
    assert "L1_phi" in json.dumps(d["intermediates"]) or d["intermediates"]
