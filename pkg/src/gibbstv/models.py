"""Conditional-intensity families, their densities, envelopes and A_k conditioning."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import RegularGridInterpolator

from .errors import ParameterError, StabilityError
from .geometry import PointConfig, Window, as_points, ball_measure, unit_ball_volume, uncovered_ball_measure

LOG_SPACE_THRESHOLD = 32
MINIBALL_SUBSET_CAP = 10_000


# ---------------------------------------------------------------------------
# activity functions


class ConstantActivity:
    is_constant = True

    def __init__(self, value):
        value = float(value)
        if not value >= 0 or not math.isfinite(value):
            raise ParameterError(f"activity must be finite and non-negative, got {value}")
        self.value = value

    def __call__(self, x):
        x = np.asarray(x, float)
        if x.ndim == 1:
            return self.value
        return np.full(len(x), self.value)

    @property
    def max(self):
        return self.value

    def integral(self, w):
        return self.value * w.volume

    def ball_integral(self, w, y, r):
        return self.value * ball_measure(w, y, r)

    def to_json(self):
        return self.value


class TabulatedActivity:
    """Activity given on a regular node grid spanning the window, multilinear in between."""

    is_constant = False

    def __init__(self, grid, w):
        grid = np.asarray(grid, float)
        if grid.ndim != w.dim or min(grid.shape) < 2:
            raise ParameterError("tabulated activity needs a D-dimensional grid with >= 2 nodes per axis")
        if np.any(grid < 0) or not np.all(np.isfinite(grid)):
            raise ParameterError("tabulated activity must be finite and non-negative")
        self.grid = grid
        self.window = w
        axes = [np.linspace(w.lo[i], w.hi[i], grid.shape[i]) for i in range(w.dim)]
        self._interp = RegularGridInterpolator(axes, grid, method="linear")

    def __call__(self, x):
        x = np.asarray(x, float)
        pts = np.clip(np.atleast_2d(x), self.window.lo, self.window.hi)
        out = self._interp(pts)
        return float(out[0]) if x.ndim == 1 else out

    @property
    def max(self):
        return float(self.grid.max())

    def integral(self, w):
        # the trapezoid rule is exact for a multilinear interpolant
        val = self.grid
        for i in range(w.dim):
            val = np.trapezoid(val, np.linspace(w.lo[i], w.hi[i], self.grid.shape[i]), axis=0)
        return float(val)

    def ball_integral(self, w, y, r):
        from .geometry import integrate_window

        y = np.asarray(y, float)

        def f(x):
            return self(x) * (w.distances(y, x) <= r)

        return integrate_window(f, w, tol=1e-6 * max(self.max, 1e-300) * w.volume)

    def to_json(self):
        return {"grid": self.grid.tolist()}


def make_activity(value, w):
    if isinstance(value, (ConstantActivity, TabulatedActivity)):
        return value
    if isinstance(value, dict):
        return TabulatedActivity(value["grid"], w)
    return ConstantActivity(value)


# ---------------------------------------------------------------------------
# interaction functions


class PiecewiseRadial:
    """phi(d) = values[i] for radii[i-1] < d <= radii[i], and 1 beyond radii[-1]."""

    radial = True

    def __init__(self, radii, values):
        radii = [float(r) for r in np.atleast_1d(radii)]
        values = [float(v) for v in np.atleast_1d(values)]
        if not radii or len(radii) != len(values):
            raise ParameterError("radii and values must be non-empty and of equal length")
        if any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii[:-1], radii[1:])):
            raise ParameterError("radii must be positive and strictly increasing")
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise ParameterError("interaction values must be finite and non-negative")
        self.radii = tuple(radii)
        self.values = tuple(values)
        self._r = np.array(radii)
        self._r2 = self._r ** 2
        self._v = np.array(values + [1.0])
        with np.errstate(divide="ignore"):
            self._logv = np.log(self._v)
        # sup of phi over [d, inf) as a function of the shell index
        self._tail_sup = np.maximum.accumulate(self._v[::-1])[::-1]
        self.C = float(self._v.max())
        self.support = radii[-1]

    def __call__(self, d):
        d = np.asarray(d, float)
        return self._v[np.searchsorted(self._r, d, side="left")]

    def upper(self, d):
        """sup over s >= d of phi(s)."""
        return self._tail_sup[np.searchsorted(self._r, np.asarray(d, float), side="left")]

    def product_sq(self, d2):
        """prod phi over squared distances d2 (only the ones inside the support matter)."""
        near = d2[d2 <= self._r2[-1]]
        if near.size == 0:
            return 1.0
        idx = np.searchsorted(self._r2, near, side="left")
        if len(self._r) == 1:
            return self.values[0] ** near.size
        counts = np.bincount(idx, minlength=len(self._r))
        out = 1.0
        for c, v in zip(counts, self.values):
            if c:
                out *= v ** int(c)
        return out

    def log_values(self, d):
        return self._logv[np.searchsorted(self._r, np.asarray(d, float), side="left")]

    @property
    def inhibitory(self):
        return self.C <= 1.0

    @property
    def hard_core(self):
        """Largest radius h with phi = 0 on [0, h] (0 if none)."""
        h = 0.0
        for r, v in zip(self.radii, self.values):
            if v != 0.0:
                break
            h = r
        return h

    def gamma_within(self, delta):
        """max phi on [0, delta]."""
        i = int(np.searchsorted(self._r, delta, side="left"))
        return float(self._v[: i + 1].max())

    def ranges(self):
        """(r, R) of the interaction-range condition: phi <= 1 on [0, r] and on (R, inf)."""
        above = [i for i, v in enumerate(self.values) if v > 1.0]
        if not above:
            return self.support, self.support
        first, last = above[0], above[-1]
        r = self.radii[first - 1] if first > 0 else 0.0
        return r, self.radii[last]

    def shells(self):
        """(inner, outer, value) for each constant piece inside the support."""
        inner = (0.0,) + self.radii[:-1]
        return list(zip(inner, self.radii, self.values))

    def integral_abs_minus_one(self, lower=0.0, dim=2):
        """∫_{|z| > lower} |phi(|z|) - 1| dz over R^dim."""
        a = unit_ball_volume(dim)
        tot = 0.0
        for s, e, v in self.shells():
            s = max(s, lower)
            if e > s:
                tot += abs(v - 1.0) * a * (e ** dim - s ** dim)
        return tot

    def to_params(self):
        return {"radii": list(self.radii), "values": list(self.values)}

    def __eq__(self, other):
        return isinstance(other, PiecewiseRadial) and self.radii == other.radii and self.values == other.values

    def __hash__(self):
        return hash((self.radii, self.values))


class LennardJonesRadial:
    """phi(d) = exp(-b V(d)) with V(d) = (R/d)^12 - (R/d)^6."""

    radial = True
    rho = 6.0
    M = 0.25

    def __init__(self, b, R):
        b, R = float(b), float(R)
        if not b > 0 or not R > 0:
            raise ParameterError("Lennard-Jones needs b > 0 and R > 0")
        self.b = b
        self.R = R
        self.C = math.exp(b * self.M)
        self.support = math.inf
        self.d_min = 2 ** (1 / 6) * R

    def potential(self, d):
        d = np.asarray(d, float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            q = (self.R / d) ** 6
            v = q * q - q
        return np.where(d > 0, v, np.inf)

    def __call__(self, d):
        with np.errstate(over="ignore"):
            return np.exp(-self.b * self.potential(d))

    def log_values(self, d):
        return -self.b * self.potential(d)

    def upper(self, d):
        d = np.asarray(d, float)
        return np.where(d <= self.d_min, self.C, self(np.maximum(d, self.d_min)))

    def product_sq(self, d2):
        if d2.size == 0:
            return 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            q = (self.R * self.R / d2) ** 3
            v = np.where(d2 > 0, q * q - q, np.inf)
        return float(np.exp(-self.b * v.sum()))

    @property
    def inhibitory(self):
        return False

    @property
    def hard_core(self):
        return 0.0

    def gamma_within(self, delta):
        return float(self(min(delta, self.d_min)))

    def ranges(self):
        return self.R, self.R

    def integral_abs_minus_one(self, lower=0.0, dim=3):
        a = unit_ball_volume(dim) * dim
        g = lambda s: abs(float(self(s)) - 1.0) * s ** (dim - 1)  # noqa: E731
        pts = sorted({max(lower, v) for v in [1e-300] + self.knots()})
        tot = 0.0
        for s, e in zip(pts[:-1], pts[1:]):
            if e > s:
                tot += integrate.quad(g, s, e, limit=200, epsabs=1e-14 * e ** dim, epsrel=1e-9)[0]
        # beyond the last knot |phi - 1| <= b R^6 s^-6 * e^(b/4)
        last = pts[-1]
        tot += self.b * self.R ** 6 * self.C * last ** (dim - 6) / (6 - dim)
        return a * tot

    def knots(self):
        """Break points for quadrature: the steep wall where b V = 1, the minimum and a geometric far range."""
        wall = self.R * self.b ** (1 / 12) if self.b < 1 else self.R
        pts = {self.R / 2, self.R, self.d_min}
        pts |= {wall * f for f in (0.7, 0.85, 0.95, 1.0, 1.05, 1.15, 1.3)}
        pts |= {self.R * 4.0 ** i for i in range(1, 6)}
        return sorted(pts)

    def to_params(self):
        return {"b": self.b, "R": self.R}


class GeneralPair:
    """Arbitrary interaction phi(x, Y) -> values, with a declared upper bound C.

    Used for user-supplied, possibly non-radial, interactions; only the
    generic code paths (and the grid-sampled validation) apply to it.
    """

    radial = False
    support = math.inf

    def __init__(self, func, C, inhibitory=None):
        self.func = func
        self.C = float(C)
        self._inhibitory = self.C <= 1.0 if inhibitory is None else bool(inhibitory)

    def factors(self, x, pts):
        return np.asarray(self.func(np.asarray(x, float), np.asarray(pts, float)), float)

    def upper(self, d):
        return np.full(np.shape(d), self.C)

    @property
    def inhibitory(self):
        return self._inhibitory

    @property
    def hard_core(self):
        return 0.0


# ---------------------------------------------------------------------------
# A_k membership


def miniball_radius(P):
    """Radius of the smallest ball enclosing the rows of P (small point sets)."""
    P = np.asarray(P, float)
    n, d = P.shape
    if n == 1:
        return 0.0
    best = math.inf
    for size in range(2, min(n, d + 1) + 1):
        for S in itertools.combinations(range(n), size):
            Q = P[list(S)]
            A = Q[1:] - Q[0]
            G = 2.0 * A @ A.T
            rhs = (A * A).sum(1)
            try:
                lam = np.linalg.solve(G, rhs)
            except np.linalg.LinAlgError:
                continue
            c = Q[0] + lam @ A
            rad = float(np.sqrt(((Q[0] - c) ** 2).sum()))
            if rad >= best:
                continue
            if np.all(np.sqrt(((P - c) ** 2).sum(1)) <= rad * (1 + 1e-12) + 1e-15):
                best = rad
    return best


def _completes_cluster(x, pts, k, delta, w):
    """True if some closed ball of radius delta/2 holds x and k points of pts."""
    if len(pts) < k:
        return False
    disp = w.displacements(x, pts)
    near = disp[np.einsum("ij,ij->i", disp, disp) <= delta * delta]
    if len(near) < k:
        return False
    if k == 1:
        return True
    n_sub = math.comb(len(near), k)
    if n_sub > MINIBALL_SUBSET_CAP:
        # conservative: too crowded to check exactly, treat as a violation
        return True
    origin = np.zeros((1, near.shape[1]))
    for S in itertools.combinations(range(len(near)), k):
        Q = near[list(S)]
        # every pair inside a ball of radius delta/2 is within delta
        if np.any(((Q[:, None, :] - Q[None, :, :]) ** 2).sum(-1) > delta * delta):
            continue
        if miniball_radius(np.vstack([origin, Q])) <= delta / 2 * (1 + 1e-12):
            return True
    return False


def in_Ak(xi, k, delta, w):
    """Whether every closed ball of radius delta/2 holds at most k points of xi."""
    pts = as_points(xi)
    for i in range(len(pts)):
        if _completes_cluster(pts[i], pts[i + 1:], k, delta, w):
            return False
    return True


# ---------------------------------------------------------------------------
# birth envelopes for simulation


class ConstantBirthBound:
    """Dominating birth intensity psi_max, uniform over the window."""

    def __init__(self, model):
        self.w = model.window
        self.level = model.envelope_max()

    def reset(self, pts):
        pass

    def add(self, y):
        pass

    def remove(self, y):
        pass

    def total(self):
        return self.level * self.w.volume

    def propose(self, draws):
        return draws.point(self.w.lo, self.w.sides), self.level


class CellBirthBound:
    """Piecewise-constant dominating birth intensity on a grid of cells.

    In cell Q the bound is min(cap, beta_max * prod_y G(dist(Q, y))) where
    G(d) = sup_{s >= d} phi(s).  Log-products are updated incrementally on
    each birth / death and recomputed from scratch now and then.
    """

    REFRESH = 512

    def __init__(self, model, cell_side, cap):
        w = model.window
        self.w = w
        self.phi = model.interaction
        self.beta_max = model.beta.max
        self.log_cap = math.log(cap) if cap > 0 else -math.inf
        n = np.maximum(1, np.floor(w.sides / cell_side)).astype(int)
        self.n = n
        self.cell = w.sides / n
        axes = [w.lo[i] + (np.arange(n[i]) + 0.5) * self.cell[i] for i in range(w.dim)]
        self.centers = np.array(list(itertools.product(*axes)))
        self.cell_vol = float(np.prod(self.cell))
        self._log = np.zeros(len(self.centers))
        self._updates = 0
        self._pts = None

    def _log_g(self, y):
        diff = np.abs(self.centers - y)
        if self.w.torus:
            diff = np.minimum(diff, self.w.sides - diff)
        gap = np.maximum(diff - self.cell / 2, 0.0)
        d = np.sqrt((gap * gap).sum(1))
        return np.log(self.phi.upper(d))

    def reset(self, pts):
        self._pts = pts
        self._log = np.zeros(len(self.centers))
        for y in np.asarray(pts):
            self._log += self._log_g(y)
        self._updates = 0
        self._refresh_levels()

    def _refresh_levels(self):
        lv = np.minimum(math.log(self.beta_max) + self._log if self.beta_max > 0 else -np.inf, self.log_cap)
        self.levels = np.exp(lv)
        self.cum = np.cumsum(self.levels * self.cell_vol)

    def _bump(self):
        self._updates += 1
        if self._updates >= self.REFRESH and self._pts is not None:
            self.reset(self._pts)
        else:
            self._refresh_levels()

    def add(self, y):
        self._log += self._log_g(np.asarray(y, float))
        self._bump()

    def remove(self, y):
        self._log -= self._log_g(np.asarray(y, float))
        self._bump()

    def total(self):
        return float(self.cum[-1])

    def propose(self, draws):
        u = draws.uniform() * self.cum[-1]
        i = min(int(np.searchsorted(self.cum, u, side="right")), len(self.cum) - 1)
        x = draws.point(self.centers[i] - self.cell / 2, self.cell)
        return x, float(self.levels[i])


# ---------------------------------------------------------------------------
# models


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)
    checked: list = field(default_factory=list)

    def to_dict(self):
        return {"ok": self.ok, "violations": list(self.violations), "checked": list(self.checked)}


class Model:
    """Base class: a conditional intensity lambda(x | xi) on a window."""

    kind = "Model"

    def __init__(self, window, beta):
        if not isinstance(window, Window):
            raise ParameterError("window must be a Window")
        self.window = window
        self.beta = make_activity(beta, window)

    # -- core hooks -------------------------------------------------------
    def papangelou(self, x, pts):
        """lambda(x | xi) for a configuration already known to have positive density."""
        raise NotImplementedError

    def log_density(self, xi):
        raise NotImplementedError

    # -- public API -------------------------------------------------------
    def cond_intensity(self, x, xi):
        pts = as_points(xi, self.window.dim)
        x = np.asarray(x, float)
        if not self.window.contains(x):
            raise ParameterError("x must lie in the window")
        if self.log_density(pts) == -math.inf:
            return 0.0
        return float(self.papangelou(x, pts))

    def cond_intensity_many(self, X, xi):
        """lambda(x | xi) for each row of X; xi assumed to have positive density."""
        pts = as_points(xi, self.window.dim)
        return np.array([self.papangelou(x, pts) for x in np.asarray(X, float)])

    def unnormalized_density(self, xi):
        ld = self.log_density(as_points(xi, self.window.dim))
        return 0.0 if ld == -math.inf else math.exp(ld)

    def envelope(self, x):
        raise StabilityError(f"{self.kind} model has no finite envelope; use restrict_to_Ak")

    def envelope_max(self):
        return self.envelope(self.window.center)

    def has_envelope(self):
        try:
            self.envelope_max()
            return True
        except StabilityError:
            return False

    def envelope_integral(self):
        """∫ psi*(x) dx."""
        return self.envelope_max() / self.beta.max * self.beta.integral(self.window) if self.beta.max > 0 else 0.0

    def birth_bound(self):
        return ConstantBirthBound(self)

    @property
    def inhibitory(self):
        return False

    def validate(self):
        return ValidationReport(True)

    def to_dict(self):
        return {"kind": self.kind, "window": self.window.to_dict(), "params": self.params()}

    def params(self):
        return {"beta": self.beta.to_json()}

    def __repr__(self):
        return f"{self.kind}({self.params()})"


class Poisson(Model):
    kind = "Poisson"

    def papangelou(self, x, pts):
        return self.beta(x)

    def cond_intensity_many(self, X, xi):
        return np.asarray(self.beta(np.atleast_2d(X)), float)

    def log_density(self, xi):
        pts = as_points(xi, self.window.dim)
        if len(pts) == 0:
            return 0.0
        with np.errstate(divide="ignore"):
            return float(np.sum(np.log(self.beta(pts))))

    def envelope(self, x):
        return self.beta(np.asarray(x, float))

    def envelope_max(self):
        return self.beta.max

    @property
    def inhibitory(self):
        return True


class PairwiseInteraction(Model):
    """Pairwise interaction process: lambda(x | xi) = beta(x) prod_{y in xi} phi(x, y)."""

    kind = "PIP"

    def __init__(self, window, beta, interaction, kind=None, ruelle=None):
        super().__init__(window, beta)
        self.interaction = interaction
        if kind is not None:
            self.kind = kind
        self.ruelle = ruelle
        if interaction.radial and np.isfinite(interaction.support) and window.torus:
            if 2 * interaction.support >= float(np.min(window.sides)):
                raise ParameterError("interaction range must be below half the torus side")

    def _factors(self, x, pts):
        if self.interaction.radial:
            return self.interaction(self.window.distances(x, pts))
        return self.interaction.factors(x, pts)

    def papangelou(self, x, pts):
        b = self.beta(x)
        if len(pts) == 0:
            return b
        if self.interaction.radial:
            diff = self.window.displacements(x, pts)
            d2 = np.einsum("ij,ij->i", diff, diff)
            if len(pts) > LOG_SPACE_THRESHOLD and not isinstance(self.interaction, PiecewiseRadial):
                with np.errstate(divide="ignore"):
                    return b * math.exp(float(self.interaction.log_values(np.sqrt(d2)).sum()))
            return b * self.interaction.product_sq(d2)
        f = self._factors(x, pts)
        if len(pts) > LOG_SPACE_THRESHOLD:
            with np.errstate(divide="ignore"):
                return b * math.exp(float(np.log(f).sum()))
        return b * float(np.prod(f))

    def cond_intensity_many(self, X, xi):
        pts = as_points(xi, self.window.dim)
        X = np.atleast_2d(np.asarray(X, float))
        b = np.asarray(self.beta(X), float)
        if len(pts) == 0:
            return b
        if self.interaction.radial:
            with np.errstate(divide="ignore"):
                logs = self.interaction.log_values(self.window.cross_distances(X, pts))
        else:
            with np.errstate(divide="ignore"):
                logs = np.log(np.array([self.interaction.factors(x, pts) for x in X]))
        return b * np.exp(logs.sum(axis=1))

    def log_density(self, xi):
        pts = as_points(xi, self.window.dim)
        n = len(pts)
        if n == 0:
            return 0.0
        with np.errstate(divide="ignore"):
            out = float(np.sum(np.log(self.beta(pts))))
            if n > 1:
                if self.interaction.radial:
                    d = self.window.pairwise_distances(pts)[np.triu_indices(n, 1)]
                    out += float(np.sum(self.interaction.log_values(d)))
                else:
                    for i in range(n - 1):
                        out += float(np.sum(np.log(self.interaction.factors(pts[i], pts[i + 1:]))))
        return out

    @property
    def inhibitory(self):
        return self.interaction.inhibitory

    def envelope(self, x):
        if not self.inhibitory:
            raise StabilityError(
                f"{self.kind} interaction exceeds 1 somewhere (C={self.interaction.C}); "
                "it has no finite envelope, use restrict_to_Ak"
            )
        return self.beta(np.asarray(x, float))

    def envelope_max(self):
        if not self.inhibitory:
            self.envelope(self.window.center)
        return self.beta.max

    def constants(self, delta=None):
        """Condition constants (C, delta, gamma, r, R) of the interaction."""
        phi = self.interaction
        r, R = phi.ranges() if phi.radial else (math.nan, math.nan)
        out = {"C": phi.C, "r": r, "R": R}
        if delta is not None:
            out["delta"] = float(delta)
            out["gamma"] = phi.gamma_within(delta) if phi.radial else math.nan
        return out

    def validate(self, n_grid=12):
        violations, checked = [], []
        phi = self.interaction
        w = self.window
        gen = np.random.default_rng(12345)
        xs = w.uniform(gen, n_grid * n_grid)
        ys = w.uniform(gen, n_grid * n_grid)
        if phi.radial:
            fxy = phi(np.sqrt((w.displacements(np.zeros(w.dim), xs - ys) ** 2).sum(1)))
            fyx = phi(np.sqrt((w.displacements(np.zeros(w.dim), ys - xs) ** 2).sum(1)))
        else:
            fxy = np.array([phi.factors(x, y[None])[0] for x, y in zip(xs, ys)])
            fyx = np.array([phi.factors(y, x[None])[0] for x, y in zip(xs, ys)])
        checked.append("symmetry")
        if not np.allclose(fxy, fyx, rtol=1e-12, atol=1e-15):
            violations.append("symmetry: phi(x,y) != phi(y,x) on the sample grid")
        checked.append("non-negativity")
        if np.any(fxy < 0):
            violations.append("non-negativity: phi < 0 on the sample grid")
        checked.append("upper bound C")
        if np.any(fxy > phi.C * (1 + 1e-12)):
            violations.append(f"upper bound: phi exceeds declared C={phi.C}")
        if phi.radial:
            r, R = phi.ranges()
            ds = np.linspace(0, max(R, r) * 2 if np.isfinite(R) else 1.0, 2001)[1:]
            vals = phi(ds)
            checked.append("interaction ranges")
            bad = ((ds <= r) | (ds > R)) & (vals > 1 + 1e-12)
            if isinstance(phi, LennardJonesRadial):
                bad = (ds <= r) & (vals > 1 + 1e-12)
            if np.any(bad):
                violations.append(f"interaction ranges: phi > 1 outside the annulus ({r}, {R}]")
            if not (r < R or r == R):
                violations.append("interaction ranges: need r < R or r = R")
            if self.kind == "BiScaleStrauss":
                rr, RR = self.bi_scale
                C = phi.values[1]
                gamma = phi.values[0]
                m = unit_ball_volume(w.dim) * w.dim ** (w.dim / 2) * (RR / rr + 1) ** w.dim
                checked.append("Ruelle criterion")
                limit = math.inf if gamma == 0 else gamma ** (-1 / (2 * m))
                if C > limit * (1 + 1e-12):
                    violations.append(f"Ruelle criterion: C={C} > gamma^(-1/(2m))={limit:.6g} (m={m:.6g})")
        return ValidationReport(not violations, violations, checked)

    def params(self):
        p = {"beta": self.beta.to_json()}
        named = getattr(self, "named_params", None)
        if named is not None:
            p.update(named)
        elif hasattr(self.interaction, "to_params"):
            p.update(self.interaction.to_params())
        return p

    def birth_bound(self):
        if self.inhibitory:
            return ConstantBirthBound(self)
        raise StabilityError(f"{self.kind} has no finite envelope; use restrict_to_Ak")


def Strauss(window, beta, gamma, R):
    if not 0 <= gamma <= 1:
        raise ParameterError("Strauss needs 0 <= gamma <= 1")
    m = PairwiseInteraction(window, beta, PiecewiseRadial([R], [gamma]), kind="Strauss")
    m.named_params = {"gamma": float(gamma), "R": float(R)}
    return m


def BiScaleStrauss(window, beta, gamma, C, r, R):
    if not 0 <= gamma <= 1 or not C >= 0 or not 0 < r < R:
        raise ParameterError("bi-scale Strauss needs 0 <= gamma <= 1, C >= 0 and 0 < r < R")
    m = PairwiseInteraction(window, beta, PiecewiseRadial([r, R], [gamma, C]), kind="BiScaleStrauss")
    m.bi_scale = (float(r), float(R))
    m.named_params = {"gamma": float(gamma), "C": float(C), "r": float(r), "R": float(R)}
    return m


def HardCorePIP(window, beta, delta, gamma=1.0, R=None):
    """Hard core of radius delta, optionally followed by a Strauss shell (delta, R] with value gamma."""
    if R is None or R <= delta:
        interaction = PiecewiseRadial([delta], [0.0])
    else:
        interaction = PiecewiseRadial([delta, R], [0.0, gamma])
    m = PairwiseInteraction(window, beta, interaction, kind="HardCorePIP")
    m.named_params = {"delta": float(delta)}
    if R is not None and R > delta:
        m.named_params.update({"gamma": float(gamma), "R": float(R)})
    return m


def LennardJones(window, beta, b, R):
    m = PairwiseInteraction(window, beta, LennardJonesRadial(b, R), kind="LennardJones")
    m.named_params = {"b": float(b), "R": float(R)}
    return m


class AreaInteraction(Model):
    """lambda(x | xi) = beta * gamma^(-|B(x,R/2) minus the union of B(y,R/2)|)."""

    kind = "AreaInteraction"

    def __init__(self, window, beta, gamma, R):
        super().__init__(window, beta)
        gamma, R = float(gamma), float(R)
        if not 0 < gamma <= 1:
            raise ParameterError(f"area-interaction needs gamma in (0, 1], got {gamma}")
        if not R > 0:
            raise ParameterError("area-interaction needs R > 0")
        if not self.beta.is_constant:
            raise ParameterError("area-interaction supports constant beta only")
        if window.torus and R >= float(np.min(window.sides)) / 2:
            raise ParameterError("area-interaction needs R below half the torus side")
        self.gamma = gamma
        self.R = R
        self.ball_volume = unit_ball_volume(window.dim) * (R / 2) ** window.dim

    def uncovered(self, x, pts):
        return uncovered_ball_measure(x, self.R / 2, pts, self.window)

    def papangelou(self, x, pts):
        if self.gamma == 1.0:
            return self.beta.value
        return self.beta.value * self.gamma ** (-self.uncovered(x, pts))

    def union_measure(self, pts):
        """|union of B(y, R/2)|, grown one ball at a time so it matches the intensities exactly."""
        pts = as_points(pts, self.window.dim)
        return sum(self.uncovered(pts[i], pts[:i]) for i in range(len(pts)))

    def log_density(self, xi):
        pts = as_points(xi, self.window.dim)
        n = len(pts)
        with np.errstate(divide="ignore"):
            out = n * math.log(self.beta.value) if n else 0.0
        if self.gamma < 1.0 and n:
            out -= self.union_measure(pts) * math.log(self.gamma)
        return out

    def envelope(self, x):
        return self.beta.value * self.gamma ** (-self.ball_volume)

    def envelope_max(self):
        return self.envelope(None)

    @property
    def inhibitory(self):
        return self.gamma == 1.0

    def params(self):
        return {"beta": self.beta.value, "gamma": self.gamma, "R": self.R}


def mk_exponent(dim, r, R, delta):
    """m = alpha_D D^{D/2} ((R/delta + 1)^D - (r/delta - 1)^D)."""
    return unit_ball_volume(dim) * dim ** (dim / 2) * ((R / delta + 1) ** dim - (r / delta - 1) ** dim)


def lj_tail_term(dim, rho, R, delta):
    """alpha_D D / (rho - D) (sqrt(D)/delta)^D (R - delta)^(D-1) / (R - 2 delta)^(rho - 1)."""
    return (
        unit_ball_volume(dim) * dim / (rho - dim)
        * (math.sqrt(dim) / delta) ** dim
        * (R - delta) ** (dim - 1) / (R - 2 * delta) ** (rho - 1)
    )


def log_Mk(base, k, delta):
    """log of the envelope multiplier M_k for the A_k-conditioned base model."""
    if isinstance(base, Poisson):
        return 0.0, {"m": 0.0, "m_k": 0.0}
    if isinstance(base, AreaInteraction):
        # lambda <= beta gamma^{-|B(x,R/2)|} regardless of conditioning
        return -base.ball_volume * math.log(base.gamma), {"m": 0.0, "m_k": 0.0}
    if not isinstance(base, PairwiseInteraction):
        raise ParameterError(f"cannot condition a {base.kind} model")
    phi = base.interaction
    dim = base.window.dim
    if isinstance(phi, LennardJonesRadial):
        r, R = phi.ranges()
        m = mk_exponent(dim, r, R, delta) if r < R else 0.0
        tail = lj_tail_term(dim, phi.rho, R, delta)
        return phi.b * k * (m * phi.M + tail), {"m": m, "m_k": m * k, "lj_tail": tail}
    if not phi.radial:
        if phi.inhibitory:
            return 0.0, {"m": 0.0, "m_k": 0.0}
        raise ParameterError("conditioning a non-radial, non-inhibitory interaction is not supported")
    C = max(phi.C, 1.0)
    r, R = phi.ranges()
    if C == 1.0 or r >= R:
        return 0.0, {"m": 0.0, "m_k": 0.0}
    m = mk_exponent(dim, r, R, delta)
    return m * k * math.log(C), {"m": m, "m_k": m * k}


class Conditioned(Model):
    """The base model conditioned on A_k: at most k points in any closed ball of radius delta/2."""

    kind = "Conditioned"

    def __init__(self, base, k, delta):
        k = int(k)
        delta = float(delta)
        if k < 1 or not delta > 0:
            raise ParameterError("restrict_to_Ak needs k >= 1 and delta > 0")
        w = base.window
        if w.torus and delta >= float(np.min(w.sides)) / 2:
            raise ParameterError("delta must be below half the torus side")
        if isinstance(base, PairwiseInteraction):
            phi = base.interaction
            if isinstance(phi, LennardJonesRadial):
                r, R = phi.ranges()
                if delta > r or delta >= R / 2:
                    raise ParameterError(
                        f"Lennard-Jones conditioning needs delta <= r and delta < R/2 (delta={delta}, r={r}, R={R})"
                    )
            elif phi.radial and phi.C > 1.0:
                r, R = phi.ranges()
                if delta > r:
                    raise ParameterError(f"conditioning needs delta <= r (delta={delta}, r={r})")
        self.base = base
        self.k = k
        self.delta = delta
        self.window = w
        self.beta = base.beta
        self.interaction = getattr(base, "interaction", None)
        self.log_M, self.mk_info = log_Mk(base, k, delta)

    @property
    def M_k(self):
        return math.exp(self.log_M) if self.log_M < 700 else math.inf

    def violates(self, x, pts):
        return _completes_cluster(np.asarray(x, float), pts, self.k, self.delta, self.window)

    def papangelou(self, x, pts):
        if self.violates(x, pts):
            return 0.0
        return self.base.papangelou(x, pts)

    def cond_intensity_many(self, X, xi):
        pts = as_points(xi, self.window.dim)
        X = np.atleast_2d(np.asarray(X, float))
        lam = self.base.cond_intensity_many(X, pts)
        if len(pts) == 0:
            return lam
        if self.k == 1:
            ok = self.window.cross_distances(X, pts).min(axis=1) > self.delta
            return lam * ok
        ok = np.array([not self.violates(x, pts) for x in X])
        return lam * ok

    def log_density(self, xi):
        pts = as_points(xi, self.window.dim)
        if not in_Ak(pts, self.k, self.delta, self.window):
            return -math.inf
        return self.base.log_density(pts)

    def envelope(self, x):
        return self.beta(np.asarray(x, float)) * self.M_k

    def envelope_max(self):
        return self.beta.max * self.M_k

    def birth_bound(self):
        base = self.base
        if isinstance(base, PairwiseInteraction) and not base.inhibitory and base.interaction.radial:
            phi = base.interaction
            side = phi.support if np.isfinite(phi.support) else 2 * phi.ranges()[1]
            side = max(side, float(np.min(self.window.sides)) / 64)
            return CellBirthBound(self, side, self.envelope_max())
        return ConstantBirthBound(self)

    @property
    def inhibitory(self):
        return self.base.inhibitory

    def validate(self):
        return self.base.validate()

    def to_dict(self):
        return {
            "kind": self.kind,
            "window": self.window.to_dict(),
            "params": {"base": self.base.to_dict(), "k": self.k, "delta": self.delta},
        }

    def params(self):
        return self.to_dict()["params"]


def restrict_to_Ak(m, k, delta):
    return Conditioned(m, k, delta)


def validate(m):
    return m.validate()


# ---------------------------------------------------------------------------
# JSON model definitions


def model_from_dict(d, window=None):
    """Build a model from {kind, window: {dim, lower, upper, torus}, params: {...}}."""
    kind = d["kind"]
    if "window" in d:
        window = Window.from_dict(d["window"])
    if window is None:
        raise ParameterError("model definition needs a window")
    p = dict(d.get("params", {}))
    ruelle = p.pop("ruelle", None)
    if kind == "Poisson":
        return Poisson(window, p["beta"])
    if kind == "Strauss":
        m = Strauss(window, p["beta"], p["gamma"], p["R"])
    elif kind == "BiScaleStrauss":
        m = BiScaleStrauss(window, p["beta"], p["gamma"], p["C"], p["r"], p["R"])
    elif kind == "HardCorePIP":
        m = HardCorePIP(window, p["beta"], p["delta"], p.get("gamma", 1.0), p.get("R"))
    elif kind == "PIP":
        m = PairwiseInteraction(window, p["beta"], PiecewiseRadial(p["radii"], p["values"]))
    elif kind == "LennardJones":
        m = LennardJones(window, p["beta"], p["b"], p["R"])
    elif kind == "AreaInteraction":
        return AreaInteraction(window, p["beta"], p["gamma"], p["R"])
    elif kind == "Conditioned":
        base = model_from_dict(p["base"], window)
        return Conditioned(base, p["k"], p["delta"])
    else:
        raise ParameterError(f"unknown model kind {kind!r}")
    if ruelle is not None:
        m.ruelle = ruelle
    return m


def model_to_dict(m):
    out = m.to_dict()
    if getattr(m, "ruelle", None) is not None:
        out["params"]["ruelle"] = m.ruelle
    return out


__all__ = [
    "AreaInteraction",
    "BiScaleStrauss",
    "Conditioned",
    "ConstantActivity",
    "GeneralPair",
    "HardCorePIP",
    "LennardJones",
    "LennardJonesRadial",
    "Model",
    "PairwiseInteraction",
    "PiecewiseRadial",
    "PointConfig",
    "Poisson",
    "Strauss",
    "TabulatedActivity",
    "ValidationReport",
    "in_Ak",
    "log_Mk",
    "miniball_radius",
    "mk_exponent",
    "model_from_dict",
    "model_to_dict",
    "restrict_to_Ak",
    "validate",
]
