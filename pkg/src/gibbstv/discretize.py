"""Regular grid partitions, the lattice projection t and its randomization, and d2 discretization bounds.

A lattice configuration is an integer array of counts, one entry per cell
(cells in C order over the grid axes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundReport, _intensity
from .errors import ParameterError
from .geometry import PointConfig, Window, as_points, ball_measure, unit_ball_volume
from .models import ConstantBirthBound, Model, PairwiseInteraction, PiecewiseRadial
from .rng import stream
from .stats import d2_family, empirical_lower
from .stein import stein_params


@dataclass(frozen=True)
class Partition:
    window: Window
    n_per_dim: int

    def __post_init__(self):
        if int(self.n_per_dim) != self.n_per_dim or self.n_per_dim < 1:
            raise ParameterError("n_per_dim must be a positive integer")

    @property
    def _strides(self):
        d = self.window.dim
        return self.n_per_dim ** np.arange(d - 1, -1, -1, dtype=np.int64)

    @property
    def edge(self):
        return self.window.sides / self.n_per_dim

    @property
    def r_V(self):
        return 0.5 * float(np.linalg.norm(self.edge))

    @property
    def n_cells(self):
        return self.n_per_dim ** self.window.dim

    @property
    def cell_volume(self):
        return float(np.prod(self.edge))

    @property
    def lowers(self):
        n, d = self.n_per_dim, self.window.dim
        idx = np.array(np.meshgrid(*[np.arange(n)] * d, indexing="ij")).reshape(d, -1).T
        return self.window.lo + idx * self.edge

    @property
    def centers(self):
        return self.lowers + 0.5 * self.edge

    def cells(self):
        """List of (center, (lower, upper)) per cell."""
        lo = self.lowers
        return [(c, (l, l + self.edge)) for c, l in zip(lo + 0.5 * self.edge, lo)]

    def cell_index(self, X):
        """Flat cell index of each row of X (points on the upper faces go to the last cell)."""
        X = np.atleast_2d(np.asarray(X, float))
        k = ((X - self.window.lo) / self.edge).astype(np.int64)
        np.clip(k, 0, self.n_per_dim - 1, out=k)
        return k @ self._strides

    def t(self, X):
        """The lattice map: each point goes to the center of its cell."""
        return self.centers[self.cell_index(X)]

    def to_dict(self):
        return {
            "window": self.window.to_dict(),
            "n_per_dim": int(self.n_per_dim),
            "r_V": self.r_V,
            "centers": self.centers.tolist(),
            "cells": [[l.tolist(), u.tolist()] for _, (l, u) in self.cells()],
        }


def build_grid_partition(w, n_per_dim):
    return Partition(w, int(n_per_dim))


def project(p, xi):
    """Counts per cell of t(xi)."""
    pts = as_points(xi, p.window.dim)
    if not len(pts):
        return np.zeros(p.n_cells, dtype=np.int64)
    return np.bincount(p.cell_index(pts), minlength=p.n_cells).astype(np.int64)


def lattice_points(p, counts):
    """The lattice configuration as a point pattern on the cell centers (with multiplicities)."""
    counts = np.asarray(counts, np.int64)
    return PointConfig(np.repeat(p.centers, counts, axis=0), p.window.dim)


def randomize(p, counts, seed, replica=0):
    """Replace each lattice point by an independent uniform point of its cell."""
    counts = np.asarray(counts, np.int64)
    if counts.shape != (p.n_cells,) or np.any(counts < 0):
        raise ParameterError(f"counts must be a non-negative array of length {p.n_cells}")
    gen = stream(seed, replica)
    lo = np.repeat(p.lowers, counts, axis=0)
    u = gen.random(lo.shape)
    return PointConfig(lo + u * p.edge, p.window.dim)


class DiscretizedPIP(Model):
    """Randomized discrete analogon of an inhibitory PIP with constant beta.

    Its density is u(t(xi)) with u the PIP density restricted to lattice
    configurations with at most one point per cell, so
    lambda(x | xi) = beta prod_{y in xi} phi(t(x), t(y)) when the cell of x is empty, else 0.
    Equilibrium samples of this model projected by t are samples of the
    discrete analogon.
    """

    kind = "DiscretizedPIP"

    def __init__(self, base, partition):
        _check_base(base)
        if partition.window != base.window:
            raise ParameterError("partition and model must share the window")
        super().__init__(base.window, base.beta.value)
        self.base = base
        self.partition = partition
        self._centers = partition.centers
        self._beta = float(base.beta.value)

    def papangelou(self, x, pts):
        if len(pts) == 0:
            return self._beta
        p = self.partition
        cx = int(p.cell_index(x)[0])
        cells = p.cell_index(pts)
        if np.any(cells == cx):
            return 0.0
        diff = self.window.displacements(self._centers[cx], self._centers[cells])
        return self._beta * self.base.interaction.product_sq(np.einsum("ij,ij->i", diff, diff))

    def cond_intensity_many(self, X, xi):
        pts = as_points(xi, self.window.dim)
        X = np.atleast_2d(np.asarray(X, float))
        b = np.full(len(X), self.base.beta.value)
        if not len(pts):
            return b
        p = self.partition
        cx = p.cell_index(X)
        cells = p.cell_index(pts)
        occupied = np.isin(cx, cells)
        d = self.window.cross_distances(p.centers[cx], p.centers[cells])
        with np.errstate(divide="ignore"):
            logs = np.log(self.base.interaction(d)).sum(axis=1)
        return np.where(occupied, 0.0, b * np.exp(logs))

    def log_density(self, xi):
        pts = as_points(xi, self.window.dim)
        if not len(pts):
            return 0.0
        cells = self.partition.cell_index(pts)
        if len(np.unique(cells)) < len(cells):
            return -math.inf
        return self.base.log_density(self.partition.centers[cells])

    def envelope(self, x):
        return self.base.beta.value

    def envelope_max(self):
        return self.base.beta.value

    def birth_bound(self):
        return ConstantBirthBound(self)

    @property
    def inhibitory(self):
        return True

    def to_dict(self):
        return {
            "kind": self.kind,
            "window": self.window.to_dict(),
            "params": {"base": self.base.to_dict(), "n_per_dim": int(self.partition.n_per_dim)},
        }

    def params(self):
        return {"base": self.base.params(), "n_per_dim": int(self.partition.n_per_dim)}


def _check_base(m):
    if not isinstance(m, PairwiseInteraction) or not m.interaction.radial:
        raise ParameterError("discretization bounds need a radial pairwise interaction process")
    if not m.inhibitory:
        raise ParameterError("discretization bounds need an inhibitory interaction (phi <= 1)")
    if not m.beta.is_constant:
        raise ParameterError("discretization bounds need a constant beta")


def annulus_sup_measure(w, R, r_V, mode="exact"):
    """sup_y |A(y, R - 2 r_V, R + 2 r_V)|, the set of x whose lattice image may cross the radius R.

    exact: ball measures on the window (translation invariant on a torus;
    the unrestricted R^D value on a bounded window); euclidean: the linear
    majorant 4 alpha_D D (R + 2 r_V)^(D-1) r_V.
    """
    D = w.dim
    a = unit_ball_volume(D)
    outer, inner = R + 2 * r_V, max(R - 2 * r_V, 0.0)
    if mode == "euclidean":
        return 4 * a * D * outer ** (D - 1) * r_V
    if mode != "exact":
        raise ParameterError(f"unknown annulus mode {mode!r}")
    if w.torus:
        return ball_measure(w, w.center, outer) - ball_measure(w, w.center, inner)
    return min(a * (outer ** D - inner ** D), w.volume)


def d2_bound_discrete(m, p, intensity_mode="envelope", samples=None, annulus="exact", lipschitz=None,
                      occupancy=False, regime="optimal"):
    """d2(discrete analogon, PIP) <= r_V + c1 E|Xi_U| beta sup_y ∫ |phi(t(x),t(y)) - phi(x,y)| dx.

    For step interactions the sup-integral is bounded by summing |jump| times
    the annulus measure around each jump radius; with lipschitz=L it is
    2 L |X| r_V instead.  occupancy=True adds c1 E|Xi_U| beta |cell|, the
    contribution of the cell-exclusion rule of the discrete analogon.
    samples (for the Monte Carlo intensity) are equilibrium samples of Xi_U.
    """
    _check_base(m)
    if p.window != m.window:
        raise ParameterError("partition and model must share the window")
    w = m.window
    beta = m.beta.value
    r_V = p.r_V
    sp = stein_params(m, regime)
    inter = {"r_V": r_V, "n_per_dim": int(p.n_per_dim), "beta": beta}
    notes = []
    if lipschitz is not None:
        if lipschitz < 0:
            raise ParameterError("Lipschitz constant must be non-negative")
        sup_int = 2 * lipschitz * w.volume * r_V
        theorem = "discrete_lipschitz"
        inter["L"] = float(lipschitz)
    else:
        phi = m.interaction
        if not isinstance(phi, PiecewiseRadial):
            raise ParameterError("without a Lipschitz constant the interaction must be a step function")
        vals = np.concatenate([phi.values, [1.0]])
        jumps = np.abs(np.diff(vals))
        sup_int = 0.0
        for rad, jmp in zip(phi.radii, jumps):
            if jmp > 0:
                sup_int += jmp * annulus_sup_measure(w, rad, r_V, annulus)
        theorem = "discrete_step"
        inter["annulus_mode"] = annulus
    inter["sup_integral"] = sup_int
    count, se = _intensity(beta * w.volume, intensity_mode, samples)
    inter["E_count_U"] = count
    inter["E_count_U_se"] = se
    second = sp.c1 * count * beta * sup_int
    if occupancy:
        occ = sp.c1 * count * beta * p.cell_volume
        inter["occupancy_term"] = occ
        second += occ
        notes.append("includes the cell-occupancy term")
    inter["tv_term"] = second
    if intensity_mode == "envelope":
        notes.append("E|Xi_U| bounded by beta |X|")
    bound = r_V + second
    return BoundReport(theorem, bound, sp, inter, intensity_mode, notes, first_term=r_V, tail=second,
                       stderr=sp.c1 * beta * sup_int * se)


def empirical_d2_lower(lattice_configs, continuous_samples, family):
    """Lower estimate of d2 from samples of the two laws using d1-Lipschitz [0,1] statistics."""
    if not all(s.lipschitz for s in family.stats):
        raise ParameterError("every statistic of a d2 family must be d1-Lipschitz")
    return empirical_lower(lattice_configs, continuous_samples, family)


def default_d2_family(m):
    return d2_family(m.window, m.beta.value * m.window.volume)


__all__ = [
    "DiscretizedPIP",
    "Partition",
    "annulus_sup_measure",
    "build_grid_partition",
    "d2_bound_discrete",
    "default_d2_family",
    "empirical_d2_lower",
    "lattice_points",
    "project",
    "randomize",
]
