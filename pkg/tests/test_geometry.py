import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbstv.errors import ParameterError
from gibbstv.geometry import PointConfig, Window, ball_measure, d1_distance, integrate_window, symdiff_norm


def test_window_validation():
    with pytest.raises(ParameterError):
        Window((0, 0), (1, 0))
    w = Window((0, 0), (2, 3))
    assert w.volume == 6.0
    assert w.dim == 2


def test_ball_measure_torus_interior():
    w = Window.unit(2, torus=True)
    assert ball_measure(w, (0.5, 0.5), 0.1) == pytest.approx(math.pi * 0.01, rel=1e-12)
    # wrapped ball near a corner has the same measure on the torus
    assert ball_measure(w, (0.0, 0.0), 0.1) == pytest.approx(math.pi * 0.01, rel=1e-9)


def test_ball_measure_corner_against_grid():
    w = Window.unit(2)
    v = ball_measure(w, (0.0, 0.0), 0.1)
    assert v == pytest.approx(0.0078540, abs=1e-7)
    # independent oracle: midpoint grid count over [0, 0.1]^2
    n = 2000
    g = (np.arange(n) + 0.5) / n * 0.1
    X, Y = np.meshgrid(g, g)
    grid = float(np.mean(X**2 + Y**2 <= 0.01)) * 0.01
    assert v == pytest.approx(grid, abs=2e-6)


def test_ball_measure_zero_and_monotone():
    w = Window.unit(2)
    assert ball_measure(w, (0.3, 0.3), 0.0) == 0.0
    vals = [ball_measure(w, (0.1, 0.2), r) for r in np.linspace(0.01, 0.8, 12)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_symdiff_examples():
    a, b, c = (0.1, 0.1), (0.2, 0.2), (0.3, 0.3)
    assert symdiff_norm([a, b], [b, c]) == 2
    assert symdiff_norm([a, b], [a, b]) == 0
    assert symdiff_norm([a], PointConfig.empty(2)) == 1


def test_d1_examples():
    assert d1_distance([(0.1, 0.1)], [(0.2, 0.2), (0.3, 0.3)]) == 1.0
    assert d1_distance([(0.0, 0.0)], [(0.3, 0.0)]) == pytest.approx(0.3)
    assert d1_distance([(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]) == 0.0
    assert d1_distance(PointConfig.empty(2), PointConfig.empty(2)) == 0.0


def test_d1_rejects_large():
    pts = np.random.default_rng(0).random((65, 2))
    with pytest.raises(ParameterError):
        d1_distance(pts, pts)


configs = st.lists(st.tuples(st.sampled_from([0.1, 0.25, 0.5, 0.75]), st.sampled_from([0.2, 0.4, 0.9])), max_size=5)


@settings(max_examples=100, deadline=None)
@given(configs, configs, configs)
def test_symdiff_is_metric(x, y, z):
    x, y, z = (PointConfig(v, 2) for v in (x, y, z))
    assert symdiff_norm(x, y) == symdiff_norm(y, x)
    assert symdiff_norm(x, z) <= symdiff_norm(x, y) + symdiff_norm(y, z)
    assert (symdiff_norm(x, y) == 0) == (sorted(map(tuple, x)) == sorted(map(tuple, y)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 6), st.integers(0, 10_000))
def test_d1_properties(n, seed):
    gen = np.random.default_rng(seed)
    a, b = gen.random((n, 2)), gen.random((n, 2))
    d = d1_distance(a, b)
    assert 0.0 <= d <= 1.0
    assert d == pytest.approx(d1_distance(b, a))
    assert d == pytest.approx(d1_distance(a[::-1], b[gen.permutation(n)]))


def test_integrate_window_examples():
    w = Window.unit(2)
    tol = 1e-4
    assert integrate_window(lambda X: np.ones(len(X)), w, tol) == pytest.approx(1.0, abs=tol)
    assert integrate_window(lambda X: np.full(len(X), 50.0), w, tol) == pytest.approx(50.0, abs=50 * tol)
    ind = lambda X: (np.linalg.norm(X - 0.5, axis=1) <= 0.1).astype(float)  # noqa: E731
    v = integrate_window(ind, w, tol)
    assert abs(v - ball_measure(w, (0.5, 0.5), 0.1)) <= 2 * tol
