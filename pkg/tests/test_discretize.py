import math

import numpy as np
import pytest

from gibbstv.discretize import (
    DiscretizedPIP,
    annulus_sup_measure,
    build_grid_partition,
    d2_bound_discrete,
    lattice_points,
    project,
    randomize,
)
from gibbstv.errors import ParameterError
from gibbstv.geometry import PointConfig, Window
from gibbstv.models import AreaInteraction, BiScaleStrauss, Poisson, Strauss
from gibbstv.stein import stein_params

T2 = Window.unit(2, torus=True)


def test_partition_examples(unit2):
    p = build_grid_partition(unit2, 10)
    assert p.r_V == pytest.approx(math.sqrt(2) / 20)
    assert p.n_cells == 100
    one = build_grid_partition(unit2, 1)
    assert np.allclose(one.centers, [[0.5, 0.5]])
    p3 = build_grid_partition(Window.unit(3), 4)
    assert p3.n_cells == 64
    assert p3.r_V == pytest.approx(math.sqrt(3) / 8)
    with pytest.raises(ParameterError):
        build_grid_partition(unit2, 0)


def test_partition_tiles_window(unit2):
    p = build_grid_partition(unit2, 7)
    vols = sum(float(np.prod(u - l)) for _, (l, u) in p.cells())
    assert vols == pytest.approx(unit2.volume)
    for c, (l, u) in p.cells():
        assert np.all(l <= c) and np.all(c <= u)
    gen = np.random.default_rng(0)
    X = unit2.uniform(gen, 500)
    assert np.all(np.linalg.norm(X - p.t(X), axis=1) <= p.r_V + 1e-15)


def test_project_examples(unit2):
    p = build_grid_partition(unit2, 4)
    assert project(p, PointConfig.empty(2)).sum() == 0
    x = p.centers[3] + 0.01
    k = project(p, [x])
    assert k[3] == 1 and k.sum() == 1
    k = project(p, [p.centers[5], p.centers[5] + 0.02])
    assert k[5] == 2


def test_randomize_roundtrip(unit2):
    p = build_grid_partition(unit2, 5)
    gen = np.random.default_rng(3)
    for i in range(20):
        counts = gen.integers(0, 3, p.n_cells)
        xi = randomize(p, counts, seed=1, replica=i)
        assert len(xi) == counts.sum()
        assert np.array_equal(project(p, xi), counts)
    assert len(randomize(p, np.zeros(p.n_cells, int), seed=0)) == 0


def test_poisson_lattice_count_law(unit2):
    # the Poisson lattice analogue: independent Poisson(beta |cell|) counts per cell
    p = build_grid_partition(unit2, 5)
    gen = np.random.default_rng(4)
    tot = []
    for i in range(2000):
        counts = gen.poisson(10 * p.cell_volume, p.n_cells)
        tot.append(len(randomize(p, counts, seed=2, replica=i)))
    tot = np.array(tot)
    assert abs(tot.mean() - 10) <= 3 * math.sqrt(10 / len(tot))
    assert abs(tot.var() - 10) <= 1.5


def test_discretized_pip_intensity():
    base = Strauss(T2, 50, 0.5, 0.1)
    p = build_grid_partition(T2, 10)
    m = DiscretizedPIP(base, p)
    # same cell: excluded
    assert m.cond_intensity((0.51, 0.51), [(0.55, 0.55)]) == 0.0
    # centres 0.2 apart are out of range even when the points themselves are closer
    assert m.cond_intensity((0.59, 0.55), [(0.71, 0.55)]) == pytest.approx(50.0)
    fine = DiscretizedPIP(base, build_grid_partition(T2, 20))
    # neighbouring centres 0.05 apart: one factor gamma, though the points are 0.11 apart
    assert fine.cond_intensity((0.501, 0.51), [(0.599, 0.51)]) == pytest.approx(25.0)
    X = T2.uniform(np.random.default_rng(1), 50)
    pts = [(0.05, 0.05), (0.33, 0.71)]
    many = m.cond_intensity_many(X, pts)
    one = [m.cond_intensity(x, pts) for x in X]
    assert np.allclose(many, one)
    assert m.log_density([(0.51, 0.51), (0.55, 0.55)]) == -math.inf


def test_discretized_needs_inhibitory_pip():
    p = build_grid_partition(T2, 10)
    for bad in (BiScaleStrauss(T2, 10, 0.5, 1.01, 0.05, 0.1), AreaInteraction(T2, 10, 0.5, 0.1), Poisson(T2, 10)):
        with pytest.raises(ParameterError):
            d2_bound_discrete(bad, p)


def test_d2_strauss_euclidean_example():
    m = Strauss(T2, 50, 0.5, 0.1)
    p = build_grid_partition(T2, 10)
    r = d2_bound_discrete(m, p, annulus="euclidean")
    rV = math.sqrt(2) / 20
    ann = 4 * math.pi * 2 * (0.1 + 2 * rV) * rV
    assert r.intermediates["sup_integral"] == pytest.approx(0.5 * ann, rel=1e-12)
    c1 = stein_params(m).c1
    assert r.bound == pytest.approx(rV + c1 * 50 * 50 * 0.5 * ann, rel=1e-12)


def test_d2_exact_annulus_below_euclidean():
    for n in (5, 10, 20, 40):
        rV = build_grid_partition(T2, n).r_V
        assert annulus_sup_measure(T2, 0.1, rV) <= annulus_sup_measure(T2, 0.1, rV, "euclidean")


def test_d2_lipschitz():
    m = Strauss(T2, 50, 0.5, 0.1)
    p10, p20 = build_grid_partition(T2, 10), build_grid_partition(T2, 20)
    assert d2_bound_discrete(m, p10, lipschitz=0.0).bound == pytest.approx(p10.r_V)
    a = d2_bound_discrete(m, p10, lipschitz=3.0)
    b = d2_bound_discrete(m, p20, lipschitz=3.0)
    assert (b.bound - p20.r_V) / (a.bound - p10.r_V) == pytest.approx(0.5, rel=1e-12)


def test_d2_bound_at_least_rV():
    m = Strauss(T2, 50, 0.5, 0.1)
    for n in (3, 8, 25):
        p = build_grid_partition(T2, n)
        r = d2_bound_discrete(m, p, occupancy=True)
        assert r.bound >= p.r_V
        assert "occupancy_term" in r.intermediates


def test_lattice_points(unit2):
    p = build_grid_partition(unit2, 2)
    pts = lattice_points(p, [0, 2, 0, 1])
    assert len(pts) == 3
    assert np.array_equal(project(p, pts), [0, 2, 0, 1])


def test_partition_json(unit2):
    d = build_grid_partition(unit2, 2).to_dict()
    assert len(d["centers"]) == 4 and len(d["cells"]) == 4
