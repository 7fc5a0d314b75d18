import math

import numpy as np
import pytest

from gibbstv.errors import DivergenceError, ExplosionError
from gibbstv.geometry import Window
from gibbstv.models import BiScaleStrauss, PairwiseInteraction, PiecewiseRadial, Poisson, Strauss, mk_exponent, restrict_to_Ak
from gibbstv.stein import c1_upper, choose_nstar, e1_mc_oracle, series_tolerance, stein_c, stein_eps, stein_params


def brute_e1(eps, c, nstar, levels=400):
    """Independent oracle: solve the first-step equations of the dominating chain on a truncated level set.

    e_n = E(time to reach n-1 from n) satisfies e_n = 1/n + (1 - p_n)/p_n ... unrolled as
    e_n = (1 + (1 - p_n) n e_{n+1}) / (n p_n), closed at a level far beyond n*.
    """
    e = 0.0
    for n in range(levels, 0, -1):
        p = 1 / (1 + eps) if n < nstar else n / (n + c)
        e = (1 + (1 - p) * n * e) / (n * p)
    return e


def test_choose_nstar_examples():
    assert choose_nstar(0.5, 10) == 20
    assert choose_nstar(0.0, 7) == 1
    assert choose_nstar(0.5, 10, "eps_only") == math.inf
    assert choose_nstar(0.3, 0.9) == 3


def test_c1_exact_cases():
    assert c1_upper(0, 5, 3).c1 == 1.0
    assert c1_upper(0.5, 1, math.inf).c1 == pytest.approx(3 * math.log(2), abs=1e-12)
    assert c1_upper(0.4, 1, 1).c1 == pytest.approx(3.0361840, abs=1e-7)
    with pytest.raises(DivergenceError):
        c1_upper(1.2, 1, math.inf)


def test_c1_anchor_matches_closed_form():
    # (e^c - 1)/c + sum c^i / (i i!)
    c = 1.0
    val = (math.e - 1) + sum(c**i / (i * math.factorial(i)) for i in range(1, 40))
    assert c1_upper(0.9, c, 1).c1 == pytest.approx(val, rel=1e-12)


@pytest.mark.parametrize("eps,c,nstar", [(0.3, 1, 2), (0.5, 10, 20), (0.7, 5, 8), (0.2, 0.5, 1), (0.9, 3, 4)])
def test_c1_matches_first_step_recursion(eps, c, nstar):
    assert c1_upper(eps, c, nstar).c1 == pytest.approx(brute_e1(eps, c, nstar), rel=1e-9)


def test_c1_monotone_grid():
    eps_grid = np.linspace(0.05, 0.95, 10)
    c_grid = np.linspace(0.1, 8, 10)
    for ns in (1, 2, 5):
        for c in c_grid:
            v = [c1_upper(e, c, ns).c1 for e in eps_grid]
            assert all(a <= b * (1 + 1e-12) for a, b in zip(v, v[1:]))
        for e in eps_grid:
            v = [c1_upper(e, c, ns).c1 for c in c_grid]
            assert all(a <= b * (1 + 1e-12) for a, b in zip(v, v[1:]))


def test_c1_limits():
    # eps -> 0 with n* >= 2: only the i = n*-1 term survives and tends to 1
    for ns in (2, 3, 5):
        assert c1_upper(1e-9, 2.0, ns).c1 == pytest.approx(1.0, rel=1e-6)
    # c -> 0: only the finite sum and a_{n*} = 1/n* remain
    eps, ns = 0.4, 3
    expected = eps ** (ns - 1) / ns + (1 + eps) / eps * sum(eps ** (ns - i) / (ns - i) for i in range(1, ns))
    assert c1_upper(eps, 1e-12, ns).c1 == pytest.approx(expected, rel=1e-9)


def test_c1_nstar_optimal_on_grid():
    for eps in (0.2, 0.3, 0.7):
        for c in (0.5, 1, 5, 12):
            n0 = choose_nstar(eps, c)
            best = c1_upper(eps, c, n0).c1
            for d in (-2, -1, 1, 2):
                if n0 + d >= 1:
                    assert best <= c1_upper(eps, c, n0 + d).c1 * (1 + 1e-12)


def test_oracle_examples():
    m, se = e1_mc_oracle(0, 0, 1, 20_000, seed=1)
    assert abs(m - 1) <= 3 * se
    for eps, c, ns, seed in ((0.5, 1, 2, 2), (0.5, 10, 20, 3)):
        m, se = e1_mc_oracle(eps, c, ns, 100_000, seed=seed)
        sp = c1_upper(eps, c, ns)
        assert abs(m - sp.c1) <= 3 * se + sp.truncation_error


def test_oracle_explosion():
    with pytest.raises(ExplosionError):
        e1_mc_oracle(3.0, 0, 10**9, 20, seed=0, level_cap=200)


def test_oracle_deterministic():
    assert e1_mc_oracle(0.3, 1, 2, 500, seed=9) == e1_mc_oracle(0.3, 1, 2, 500, seed=9)


def test_stein_inputs_models():
    t = Window.unit(2, torus=True)
    assert stein_eps(Poisson(t, 10)) == 0.0
    assert stein_c(Poisson(t, 10)) == 0.0
    s = Strauss(t, 50, 0.5, 0.1)
    assert stein_eps(s) == pytest.approx(50 * 0.5 * math.pi * 0.01, rel=1e-4)
    assert stein_eps(s) == pytest.approx(0.785398, abs=1e-6)
    assert stein_c(s) == 50.0
    flat = PairwiseInteraction(t, 5, PiecewiseRadial([0.1], [1.0]))
    assert stein_eps(flat) == 0.0


def test_stein_c_conditioned_Mk_two():
    t = Window.unit(2, torus=True)
    k, delta = 1, 0.05
    m = mk_exponent(2, 0.05, 0.1, delta)
    C = 2 ** (1 / (m * k))
    cond = restrict_to_Ak(BiScaleStrauss(t, 50, 0.5, C, 0.05, 0.1), k, delta)
    assert cond.M_k == pytest.approx(2.0, rel=1e-12)
    assert stein_c(cond) == pytest.approx(100.0, rel=1e-12)


def test_stein_params_and_tolerance():
    t = Window.unit(2, torus=True)
    sp = stein_params(Strauss(t, 50, 0.5, 0.1))
    assert sp.nstar == math.ceil(50 / sp.eps)
    assert sp.eps <= sp.c
    assert sp.c1 >= 1
    with series_tolerance(1e-6):
        loose = stein_params(Strauss(t, 50, 0.5, 0.1))
    assert loose.c1 == pytest.approx(sp.c1, rel=1e-5)
