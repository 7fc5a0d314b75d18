import json
import math

import numpy as np
import pytest
from scipy import stats as sps

from gibbstv.geometry import PointConfig, Window
from gibbstv.models import HardCorePIP, Poisson, Strauss
from gibbstv.sbdp import check_bookkeeping, couple, coupled_pair, mean_coupling_time, sample_equilibrium, simulate

T2 = Window.unit(2, torus=True)


def test_horizon_zero_is_identity(unit2):
    xi = PointConfig([(0.2, 0.3), (0.5, 0.5)])
    st = simulate(Poisson(unit2, 10), xi, 0.0, seed=1)
    assert np.array_equal(st.config.points, xi.points)
    assert st.jump_count == 0


def test_poisson_equilibrium_counts(unit2):
    m = Poisson(unit2, 10)
    counts = [len(simulate(m, PointConfig.empty(2), 12.0, seed=4, replica=i).config) for i in range(1500)]
    obs = np.bincount(counts, minlength=31)[:31].astype(float)
    # pool the two tails so every expected cell is large enough
    lo, hi = 4, 17
    pmf = sps.poisson(10).pmf(np.arange(31))
    e = np.concatenate([[pmf[:lo].sum()], pmf[lo:hi], [1 - pmf[:hi].sum()]]) * len(counts)
    o = np.concatenate([[obs[:lo].sum()], obs[lo:hi], [len(counts) - obs[:hi].sum()]])
    p = sps.chisquare(o, e).pvalue
    assert p > 0.001


def test_sample_equilibrium_means(unit2):
    m = Poisson(unit2, 10)
    smp = sample_equilibrium(m, 5.0, 800, 1.0, seed=2)
    c = np.array([len(s) for s in smp])
    assert abs(c.mean() - 10) <= 3 * math.sqrt(10 / len(c)) * 2  # correlation-inflated
    s = sample_equilibrium(Strauss(T2, 50, 0.5, 0.05), 10.0, 300, 1.0, seed=3)
    assert np.mean([len(x) for x in s]) < 50
    assert sample_equilibrium(m, 1.0, 0, 1.0, seed=0) == []


def test_hardcore_stays_legal(unit2):
    m = HardCorePIP(unit2, 80, 0.05)
    smp = sample_equilibrium(m, 5.0, 100, 0.2, seed=6)
    for s in smp:
        if len(s) > 1:
            d = unit2.pairwise_distances(s.points)
            assert d[np.triu_indices(len(s), 1)].min() >= 0.05


def test_couple_identical():
    m = Strauss(T2, 50, 0.9, 0.05)
    xi = PointConfig([(0.1, 0.1)])
    rec = couple(m, xi, xi, seed=0)
    assert rec.tau == 0.0 and rec.jumps == 0
    assert mean_coupling_time(m, xi, xi, 5, seed=0) == (0.0, 0.0, 0.0)


def test_poisson_one_point_difference():
    m = Poisson(T2, 10)
    gen = np.random.default_rng(1)
    base = T2.uniform(gen, 10)
    xi = PointConfig(np.vstack([base, [[0.5, 0.5]]]))
    eta = PointConfig(base)
    taus = []
    for i in range(2000):
        r = couple(m, xi, eta, seed=7, replica=i)
        assert r.bad_births == 0
        assert check_bookkeeping(xi, eta, r)
        taus.append(r.tau)
    t = np.array(taus)
    assert abs(t.mean() - 1) <= 3 * t.std(ddof=1) / math.sqrt(len(t))
    # Exp(1): KS test
    assert sps.kstest(t, "expon").pvalue > 0.001


def test_bookkeeping_strauss():
    m = Strauss(T2, 50, 0.5, 0.05)
    gen = np.random.default_rng(2)
    for i in range(50):
        xi = PointConfig(T2.uniform(gen, 12))
        eta = PointConfig(np.vstack([xi.points[:8], T2.uniform(gen, 3)]))
        r = couple(m, xi, eta, seed=3, replica=i)
        assert check_bookkeeping(xi, eta, r)
        assert r.coupled


def test_coupled_pair_moves_together():
    m = Strauss(T2, 30, 0.5, 0.05)
    xi = PointConfig([(0.1, 0.1), (0.4, 0.4)])
    eta = PointConfig([(0.1, 0.1)])
    a, b, rec = coupled_pair(m, xi, eta, 20.0, seed=1)
    assert rec.tau < 20.0
    assert sorted(map(tuple, a.points)) == sorted(map(tuple, b.points))


def test_trace_dump(tmp_path, unit2):
    path = tmp_path / "trace.jsonl"
    couple(Poisson(unit2, 5), PointConfig([(0.5, 0.5)]), PointConfig.empty(2), seed=2, trace=str(path))
    lines = [json.loads(l) for l in path.read_text().splitlines()]
    assert lines
    assert {"t", "kind", "point", "chain"} <= set(lines[0])
    assert lines[-1]["kind"] in ("death", "birth", "common")


def test_determinism(unit2):
    m = Strauss(unit2, 40, 0.5, 0.05)
    a = simulate(m, PointConfig.empty(2), 3.0, seed=11, replica=2).config.points
    b = simulate(m, PointConfig.empty(2), 3.0, seed=11, replica=2).config.points
    assert np.array_equal(a, b)
