"""Windows, point configurations, configuration metrics and window quadrature."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.optimize import linear_sum_assignment

from .errors import ParameterError, QuadratureError

D1_MAX_POINTS = 64


def unit_ball_volume(dim):
    """Lebesgue volume of the unit ball in R^dim."""
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)


@dataclass(frozen=True)
class Window:
    """Axis-aligned box in R^D with Lebesgue measure, optionally a flat torus."""

    lower: tuple
    upper: tuple
    torus: bool = False
    _lo: np.ndarray = field(init=False, repr=False, compare=False)
    _sides: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) == 0 or len(lo) != len(hi):
            raise ParameterError("lower and upper must be non-empty and of equal length")
        if not all(a < b for a, b in zip(lo, hi)):
            raise ParameterError(f"window needs lower < upper in every coordinate, got {lo}, {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "torus", bool(self.torus))
        lo_arr = np.array(lo)
        sides = np.array(hi) - lo_arr
        lo_arr.setflags(write=False)
        sides.setflags(write=False)
        object.__setattr__(self, "_lo", lo_arr)
        object.__setattr__(self, "_sides", sides)

    @classmethod
    def unit(cls, dim, torus=False):
        return cls((0.0,) * dim, (1.0,) * dim, torus)

    @property
    def dim(self):
        return len(self.lower)

    @property
    def lo(self):
        return self._lo

    @property
    def hi(self):
        return self._lo + self._sides

    @property
    def sides(self):
        return self._sides

    @property
    def volume(self):
        return float(np.prod(self._sides))

    @property
    def center(self):
        return self._lo + self._sides / 2

    def contains(self, x):
        x = np.asarray(x, float)
        return bool(np.all(x >= self._lo) and np.all(x <= self._lo + self._sides))

    def wrap(self, x):
        """Map a point back into the box (identity unless torus)."""
        x = np.asarray(x, float)
        if not self.torus:
            return x
        return self._lo + np.mod(x - self._lo, self._sides)

    def displacements(self, x, pts):
        """Vectors pts - x, minimum-image on the torus."""
        diff = np.asarray(pts, float) - np.asarray(x, float)
        if self.torus:
            diff = diff - self._sides * np.round(diff / self._sides)
        return diff

    def distances(self, x, pts):
        diff = self.displacements(x, pts)
        return np.sqrt(np.einsum("...i,...i->...", diff, diff))

    def distance(self, x, y):
        return float(self.distances(x, np.asarray(y, float)[None, :])[0])

    def pairwise_distances(self, pts):
        pts = np.asarray(pts, float)
        diff = pts[:, None, :] - pts[None, :, :]
        if self.torus:
            diff = diff - self._sides * np.round(diff / self._sides)
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def cross_distances(self, a, b):
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        diff = a[:, None, :] - b[None, :, :]
        if self.torus:
            diff = diff - self._sides * np.round(diff / self._sides)
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def uniform(self, gen, n):
        return self._lo + self._sides * gen.random((n, self.dim))

    def eroded_volume(self, margin):
        """Volume of {x : dist(x, complement) >= margin} (no wrap-around)."""
        s = self._sides - 2 * margin
        return float(np.prod(np.clip(s, 0.0, None)))

    def to_dict(self):
        return {"dim": self.dim, "lower": list(self.lower), "upper": list(self.upper), "torus": self.torus}

    @classmethod
    def from_dict(cls, d):
        w = cls(tuple(d["lower"]), tuple(d["upper"]), bool(d.get("torus", False)))
        if "dim" in d and int(d["dim"]) != w.dim:
            raise ParameterError(f"window dim {d['dim']} does not match bounds of length {w.dim}")
        return w


class PointConfig:
    """Finite ordered list of points; a read-only (n, D) float array underneath."""

    __slots__ = ("points",)

    def __init__(self, points, dim=None):
        arr = np.array(points, dtype=float)
        if arr.size == 0:
            d = dim if dim is not None else (arr.shape[-1] if arr.ndim == 2 else 0)
            arr = arr.reshape(0, d)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ParameterError(f"points must be an (n, D) array, got shape {arr.shape}")
        if dim is not None and arr.shape[1] != dim:
            raise ParameterError(f"points have dimension {arr.shape[1]}, expected {dim}")
        arr.setflags(write=False)
        self.points = arr

    @classmethod
    def empty(cls, dim):
        return cls(np.empty((0, dim)))

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def __array__(self, dtype=None, copy=None):
        return self.points if dtype is None else self.points.astype(dtype)

    def __repr__(self):
        return f"PointConfig(n={len(self)}, dim={self.dim})"

    def add(self, x):
        return PointConfig(np.vstack([self.points, np.asarray(x, float).reshape(1, -1)]))

    def remove(self, i):
        return PointConfig(np.delete(self.points, i, axis=0), dim=self.dim)

    def inside(self, w):
        if len(self) == 0:
            return True
        return bool(np.all(self.points >= w.lo) and np.all(self.points <= w.hi))

    def to_list(self):
        return self.points.tolist()


def as_points(xi, dim=None):
    """Coerce a PointConfig / array-like to an (n, D) float array."""
    if isinstance(xi, PointConfig):
        return xi.points
    return PointConfig(xi, dim=dim).points


def symdiff_norm(xi, eta):
    """Number of points in exactly one of the two multisets (exact coordinate match)."""
    a = Counter(map(tuple, as_points(xi).tolist()))
    b = Counter(map(tuple, as_points(eta).tolist()))
    return sum(((a - b) + (b - a)).values())


def d1_distance(xi, eta, window=None):
    """Optimal-matching distance between configurations, capped at 1 per point.

    Equals 1 when cardinalities differ.  Uses the window metric when given
    (so the torus wraps), the Euclidean one otherwise.
    """
    a = as_points(xi)
    b = as_points(eta)
    n, m = len(a), len(b)
    if n != m:
        return 1.0
    if n == 0:
        return 0.0
    if n > D1_MAX_POINTS:
        raise ParameterError(f"d1_distance supports at most {D1_MAX_POINTS} points, got {n}")
    if window is not None:
        cost = window.cross_distances(a, b)
    else:
        cost = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
    cost = np.minimum(cost, 1.0)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / n)


# ---------------------------------------------------------------------------
# measures of ball unions


def _interval_cover(lo, hi, inc, exc):
    """Length of [lo,hi] ∩ (∪inc) minus ∪exc; inc/exc are lists of (a, b)."""
    if not inc or hi <= lo:
        return 0.0
    cuts = {lo, hi}
    for a, b in itertools.chain(inc, exc):
        if lo < a < hi:
            cuts.add(a)
        if lo < b < hi:
            cuts.add(b)
    cuts = sorted(cuts)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (a + b)
        if any(s <= mid <= e for s, e in inc) and not any(s < mid < e for s, e in exc):
            total += b - a
    return total


def _circle_arcs_area(c0, r0, others):
    """Exact area of disc(c0, r0) minus the union of discs in ``others`` (2D).

    Green's theorem over the boundary arcs of the difference region.
    """
    circles = [(np.asarray(c0, float), float(r0))]
    seen = set()
    for c, r in others:
        c = np.asarray(c, float)
        key = (c[0], c[1], float(r))
        if key in seen or r <= 0:
            continue
        seen.add(key)
        if np.hypot(*(c - circles[0][0])) >= r + r0:
            continue
        if np.hypot(*(c - circles[0][0])) + r0 <= r:
            return 0.0
        circles.append((c, float(r)))
    if len(circles) == 1:
        return math.pi * r0 * r0

    def angles(i):
        ci, ri = circles[i]
        out = [0.0, 2 * math.pi]
        for j, (cj, rj) in enumerate(circles):
            if j == i:
                continue
            d = math.hypot(cj[0] - ci[0], cj[1] - ci[1])
            if d == 0 or d >= ri + rj or d <= abs(ri - rj):
                continue
            a = (ri * ri - rj * rj + d * d) / (2 * d)
            base = math.atan2(cj[1] - ci[1], cj[0] - ci[0])
            half = math.acos(max(-1.0, min(1.0, a / ri)))
            for t in (base - half, base + half):
                out.append(t % (2 * math.pi))
        return sorted(out)

    def inside(p, k):
        ck, rk = circles[k]
        return math.hypot(p[0] - ck[0], p[1] - ck[1]) < rk

    area = 0.0
    for i, (ci, ri) in enumerate(circles):
        ts = angles(i)
        for t1, t2 in zip(ts[:-1], ts[1:]):
            if t2 - t1 <= 0:
                continue
            tm = 0.5 * (t1 + t2)
            p = (ci[0] + ri * math.cos(tm), ci[1] + ri * math.sin(tm))
            if i == 0:
                keep = not any(inside(p, k) for k in range(1, len(circles)))
                sign = 1.0
            else:
                keep = inside(p, 0) and not any(inside(p, k) for k in range(1, len(circles)) if k != i)
                sign = -1.0
            if keep:
                area += sign * 0.5 * (
                    ri * ri * (t2 - t1)
                    + ri * ci[0] * (math.sin(t2) - math.sin(t1))
                    - ri * ci[1] * (math.cos(t2) - math.cos(t1))
                )
    return max(area, 0.0)


def _sliced_measure(lo, hi, inc, exc, tol):
    """Measure of box ∩ (∪inc) minus (∪exc) by recursive slicing + adaptive quad."""
    d = len(lo)
    inc = [(c, r) for c, r in inc if r > 0 and np.all(c + r > lo) and np.all(c - r < hi)]
    if not inc:
        return 0.0
    exc = [(c, r) for c, r in exc if r > 0 and np.all(c + r > lo) and np.all(c - r < hi)]
    if d == 1:
        return _interval_cover(
            lo[0], hi[0],
            [(c[0] - r, c[0] + r) for c, r in inc],
            [(c[0] - r, c[0] + r) for c, r in exc],
        )
    a = max(lo[0], min(c[0] - r for c, r in inc))
    b = min(hi[0], max(c[0] + r for c, r in inc))
    if b <= a:
        return 0.0
    cuts = {a, b}
    balls = inc + exc
    for c, r in balls:
        for t in (c[0] - r, c[0] + r):
            if a < t < b:
                cuts.add(t)
        if d == 2:
            for edge in (lo[1], hi[1]):
                h = r * r - (edge - c[1]) ** 2
                if h > 0:
                    for t in (c[0] - math.sqrt(h), c[0] + math.sqrt(h)):
                        if a < t < b:
                            cuts.add(t)
    if d == 2:
        for (c1, r1), (c2, r2) in itertools.combinations(balls, 2):
            dist = math.hypot(c2[0] - c1[0], c2[1] - c1[1])
            if dist == 0 or dist >= r1 + r2 or dist <= abs(r1 - r2):
                continue
            along = (r1 * r1 - r2 * r2 + dist * dist) / (2 * dist)
            h = math.sqrt(max(r1 * r1 - along * along, 0.0))
            ux, uy = (c2[0] - c1[0]) / dist, (c2[1] - c1[1]) / dist
            for s in (h, -h):
                t = c1[0] + along * ux - s * uy
                if a < t < b:
                    cuts.add(t)
    cuts = sorted(cuts)
    lo_r, hi_r = lo[1:], hi[1:]

    def section(t):
        def cut(group):
            out = []
            for c, r in group:
                h = r * r - (t - c[0]) ** 2
                if h > 0:
                    out.append((c[1:], math.sqrt(h)))
            return out
        return _sliced_measure(lo_r, hi_r, cut(inc), cut(exc), tol)

    pieces = max(len(cuts) - 1, 1)
    total = 0.0
    for s, e in zip(cuts[:-1], cuts[1:]):
        if e - s <= 0:
            continue
        val, _ = integrate.quad(section, s, e, epsabs=tol / pieces, epsrel=1e-11, limit=200)
        total += val
    return total


def region_measure(include, exclude=(), box=None, tol=1e-10):
    """Lebesgue measure of (box ∩ ∪include) minus ∪exclude.

    ``include`` and ``exclude`` are sequences of (center, radius).  Without a
    box the region lives in all of R^D.
    """
    include = [(np.asarray(c, float), float(r)) for c, r in include]
    exclude = [(np.asarray(c, float), float(r)) for c, r in exclude]
    if not include:
        return 0.0
    dim = len(include[0][0])
    if box is None:
        if dim == 2 and len(include) == 1:
            c0, r0 = include[0]
            return _circle_arcs_area(c0, r0, exclude)
        lo = np.min([c - r for c, r in include], axis=0)
        hi = np.max([c + r for c, r in include], axis=0)
    else:
        lo, hi = (np.asarray(v, float) for v in box)
    return _sliced_measure(lo, hi, include, exclude, tol)


def ball_measure(w, center, r, tol=1e-10):
    """Measure of the closed ball B(center, r) intersected with the window.

    On a torus this is the measure of the wrapped ball.
    """
    if r < 0:
        raise ParameterError("radius must be non-negative")
    if r == 0:
        return 0.0
    center = np.asarray(center, float)
    full = unit_ball_volume(w.dim) * r ** w.dim
    if w.torus:
        if 2 * r < float(np.min(w.sides)):
            return full
        reach = np.ceil(r / w.sides).astype(int) + 1
        shifts = itertools.product(*[range(-k, k + 1) for k in reach])
        images = [center + np.array(s) * w.sides for s in shifts]
        include = [(c, r) for c in images]
        return min(region_measure(include, box=(w.lo, w.hi), tol=tol), w.volume)
    if np.all(center - r >= w.lo) and np.all(center + r <= w.hi):
        return full
    return region_measure([(center, r)], box=(w.lo, w.hi), tol=tol)


def uncovered_ball_measure(center, radius, others, w=None):
    """|B(center, radius) minus the union of B(y, radius), y in others| in R^D.

    With a torus window the neighbours are taken at their minimum image.
    """
    center = np.asarray(center, float)
    others = np.asarray(others, float).reshape(-1, len(center))
    if len(others):
        if w is not None and w.torus:
            others = center + w.displacements(center, others)
        keep = np.sqrt(((others - center) ** 2).sum(1)) < 2 * radius
        others = others[keep]
    if not len(others):
        return unit_ball_volume(len(center)) * radius ** len(center)
    return region_measure([(center, radius)], [(y, radius) for y in others])


# ---------------------------------------------------------------------------
# adaptive quadrature over the window


def _box_offsets(d):
    out = []
    for k in (2, 3, 4):
        grid = (np.arange(k) + 0.5) / k
        out.append(np.array(list(itertools.product(grid, repeat=d))))
    return out


def _box_rules(f, lo, width, offsets):
    """Midpoint rules with 2^D, 3^D and 4^D sub-boxes on each of m boxes.

    """
    m, d = lo.shape
    allofs = np.vstack(offsets)
    pts = lo[:, None, :] + allofs[None, :, :] * width[:, None, :]
    vals = np.asarray(f(pts.reshape(-1, d)), float).reshape(m, -1)
    vol = np.prod(width, axis=1)
    out = []
    start = 0
    for ofs in offsets:
        out.append(vals[:, start:start + len(ofs)].mean(axis=1) * vol)
        start += len(ofs)
    return out


def integrate_window(f, w, tol=1e-6, max_evals=4_000_000, initial=4):
    """Adaptive tensor quadrature of f over the window.

    ``f`` maps an (n, D) array of points to n values.  Boxes are refined
    dyadically; each box compares the midpoint rule on 4^D sub-boxes with
    the rules on 2^D and 3^D sub-boxes and takes the larger Richardson
    estimate |fine - coarse| / 3 as its error (the odd rule keeps jumps from
    agreeing by accident).  A box is split while its error exceeds its
    volume share of ``tol``.  Raises QuadratureError past ``max_evals``
    integrand calls.

    The estimate is sample based: a sliver of a jump set that falls between
    all sample points of a box is invisible to it, so for indicator
    integrands the achieved accuracy is only as good as ``tol`` suggests
    down to about 1e-4 relative to the window.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    d = w.dim
    vol = w.volume
    offsets = _box_offsets(d)
    per_box = sum(len(o) for o in offsets)
    edges = [np.linspace(w.lo[i], w.hi[i], initial + 1) for i in range(d)]
    lows = np.array(list(itertools.product(*[e[:-1] for e in edges])))
    width = np.tile(w.sides / initial, (len(lows), 1))
    corners = np.array(list(itertools.product((0, 1), repeat=d)), float)
    evals = 0
    done_val = 0.0
    done_err = 0.0
    while True:
        coarse, odd, fine = _box_rules(f, lows, width, offsets)
        evals += len(lows) * per_box
        err = np.maximum(np.abs(fine - coarse), np.abs(fine - odd)) / 3.0
        share = tol * np.prod(width, axis=1) / vol
        ok = err <= share
        done_val += float(fine[ok].sum())
        done_err += float(err[ok].sum())
        if ok.all():
            return done_val
        pending_val = done_val + float(fine[~ok].sum())
        pending_err = done_err + float(err[~ok].sum())
        if pending_err <= tol:
            return pending_val
        lows, width = lows[~ok], width[~ok]
        if evals + len(lows) * 2 ** d * per_box > max_evals:
            raise QuadratureError("integrate_window exceeded its evaluation budget", pending_val, pending_err)
        half = width / 2
        lows = (lows[:, None, :] + corners[None, :, :] * half[:, None, :]).reshape(-1, d)
        width = np.repeat(half, len(corners), axis=0)
