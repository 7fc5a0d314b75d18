"""Fixed families of [0,1]-valued statistics of point configurations.

The difference of the sample means of any [0,1]-valued statistic is a
lower estimate of the total variation distance between the two laws.  If
every statistic is also 1-Lipschitz for the d1 metric on configurations,
it lower-bounds the Wasserstein distance d2 as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .geometry import as_points


@dataclass
class Statistic:
    name: str
    func: object  # ndarray of points (n, D) -> float in [0, 1]
    lipschitz: bool = False  # 1-Lipschitz with respect to d1


class StatFamily:
    """An ordered, fixed family of statistics; every value is checked to lie in [0,1]."""

    def __init__(self, window):
        self.window = window
        self.stats = []
        gen = np.random.default_rng(7)
        self._probes = [np.empty((0, window.dim))] + [window.uniform(gen, n) for n in (1, 2, 5, 30)]

    def register(self, name, func, lipschitz=False):
        for p in self._probes:
            v = float(func(p))
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"statistic {name!r} leaves [0,1] (value {v})")
        self.stats.append(Statistic(name, func, lipschitz))
        return self

    def __len__(self):
        return len(self.stats)

    @property
    def names(self):
        return [s.name for s in self.stats]

    def evaluate(self, samples):
        """(n_samples, K) matrix of statistic values."""
        dim = self.window.dim
        out = np.empty((len(samples), len(self.stats)))
        for i, s in enumerate(samples):
            pts = as_points(s, dim)
            out[i] = [st.func(pts) for st in self.stats]
        if np.any(out < 0) or np.any(out > 1):
            raise ParameterError("a statistic left [0,1] on the data")
        return out


def _count_cap(mean_count):
    return int(math.ceil(mean_count + 6 * math.sqrt(mean_count + 1) + 2))


def _count_stats(fam, cap, lipschitz):
    for j in range(cap + 1):
        fam.register(f"count<={j}", lambda p, j=j: float(len(p) <= j), lipschitz)
    for j in range(cap + 1):
        fam.register(f"count=={j}", lambda p, j=j: float(len(p) == j), lipschitz)


def _sub_boxes(w, per_axis):
    edges = [np.linspace(w.lo[i], w.hi[i], per_axis + 1) for i in range(w.dim)]
    grids = np.meshgrid(*[range(per_axis)] * w.dim, indexing="ij")
    idx = np.array([g.ravel() for g in grids]).T
    return [
        (np.array([edges[d][k[d]] for d in range(w.dim)]), np.array([edges[d][k[d] + 1] for d in range(w.dim)]))
        for k in idx
    ]


def _box_count(lo, hi):
    def f(p):
        if not len(p):
            return 0
        return int(np.sum(np.all((p >= lo) & (p < hi), axis=1)))

    return f


def _min_pair_below(w, t):
    def f(p):
        if len(p) < 2:
            return 0.0
        d = w.pairwise_distances(p)
        iu = np.triu_indices(len(p), 1)
        return float(d[iu].min() <= t)

    return f


def tv_family(window, mean_count, boxes_per_axis=2, t_grid=None):
    """Count thresholds and atoms, sub-box count thresholds and min-pair-distance indicators.

    mean_count fixes the count cap before any data are seen (use the envelope count).
    """
    fam = StatFamily(window)
    cap = _count_cap(mean_count)
    _count_stats(fam, cap, lipschitz=True)
    boxes = _sub_boxes(window, boxes_per_axis)
    box_cap = _count_cap(mean_count / len(boxes))
    for b, (lo, hi) in enumerate(boxes):
        cnt = _box_count(lo, hi)
        for j in range(box_cap + 1):
            fam.register(f"box{b}<={j}", lambda p, cnt=cnt, j=j: float(cnt(p) <= j))
    if t_grid is None:
        scale = float(np.min(window.sides))
        t_grid = scale * np.array([0.005, 0.01, 0.02, 0.03, 0.05, 0.075, 0.1])
    for t in t_grid:
        fam.register(f"minpair<={t:.6g}", _min_pair_below(window, float(t)))
    return fam


def _mean_clamped_distance(w, c):
    c = np.asarray(c, float)

    def f(p):
        if not len(p):
            return 0.0
        return float(np.mean(np.minimum(w.distances(c, p), 1.0)))

    return f


def d2_family(window, mean_count, refs_per_axis=2):
    """Statistics that are 1-Lipschitz for d1: count indicators and point averages of min(1, d(x, c))."""
    fam = StatFamily(window)
    cap = _count_cap(mean_count)
    _count_stats(fam, cap, lipschitz=True)
    refs = [window.center] + [0.5 * (lo + hi) for lo, hi in _sub_boxes(window, refs_per_axis)]
    for lo, _ in _sub_boxes(window, refs_per_axis):
        refs.append(lo)
    for i, c in enumerate(refs):
        fam.register(f"meandist{i}", _mean_clamped_distance(window, c), lipschitz=True)
    return fam


@dataclass
class EmpiricalLower:
    lower: float
    se: float
    best: str
    family_size: int
    n_a: int
    n_b: int

    def to_dict(self):
        return {
            "lower": self.lower,
            "se": self.se,
            "best_statistic": self.best,
            "family_size": self.family_size,
            "n_a": self.n_a,
            "n_b": self.n_b,
        }


def empirical_lower(samples_a, samples_b, family):
    """max_f |mean_a f - mean_b f| with a binomial standard error widened by sqrt(family size).

    For [0,1]-valued f, Var f <= p(1-p) with p its mean, so the binomial
    form is a valid bound on the standard error of each mean.
    """
    if not len(samples_a) or not len(samples_b):
        raise ParameterError("both sample sets must be non-empty")
    A = family.evaluate(samples_a)
    B = family.evaluate(samples_b)
    pa, pb = A.mean(0), B.mean(0)
    diff = np.abs(pa - pb)
    j = int(np.argmax(diff))
    se = math.sqrt(pa[j] * (1 - pa[j]) / len(A) + pb[j] * (1 - pb[j]) / len(B))
    se *= math.sqrt(len(family))
    return EmpiricalLower(float(diff[j]), float(se), family.names[j], len(family), len(A), len(B))


def count_tv_two_sample(samples_a, samples_b):
    """Half the L1 distance between the two empirical count distributions."""
    ca = np.array([len(s) for s in samples_a], int)
    cb = np.array([len(s) for s in samples_b], int)
    top = int(max(ca.max(initial=0), cb.max(initial=0))) + 1
    pa = np.bincount(ca, minlength=top) / len(ca)
    pb = np.bincount(cb, minlength=top) / len(cb)
    return 0.5 * float(np.abs(pa - pb).sum())


__all__ = [
    "EmpiricalLower",
    "StatFamily",
    "Statistic",
    "count_tv_two_sample",
    "d2_family",
    "empirical_lower",
    "tv_family",
]
