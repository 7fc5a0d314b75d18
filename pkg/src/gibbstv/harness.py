"""End-to-end verification: scenarios, empirical lower estimates, GNZ residuals and bound-vs-simulation reports."""

from __future__ import annotations

import copy
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds as B
from .discretize import (
    DiscretizedPIP,
    build_grid_partition,
    d2_bound_discrete,
    default_d2_family,
    empirical_d2_lower,
    lattice_points,
    project,
)
from .errors import GibbsError, ParameterError, StabilityError
from .geometry import PointConfig
from .models import AreaInteraction, Conditioned, Poisson, model_from_dict
from .rng import stream
from .sbdp import Samples, mean_coupling_time, sample_equilibrium, simulate
from .stats import empirical_lower, tv_family
from .stein import series_tolerance, stein_params

TASKS = ("bound", "couple", "verify", "discretize", "simulate")

# stream keys, so that each sampling job has its own generator
KEY_XI, KEY_H, KEY_GNZ, KEY_COUPLE, KEY_START, KEY_DISC = 1, 2, 3, 4, 5, 6


# ---------------------------------------------------------------------------
# scenarios


@dataclass
class Scenario:
    """A JSON-described run.

    Fields: name; task (bound, couple, verify, discretize, simulate);
    theorem (one of bounds.THEOREMS); model_xi / model_h (model dicts);
    bound (theorem keywords: intensity_mode, regime, k, delta, moments,
    cstar_star, mc_moments, R0, condition); mc (reps, burn_in, spacing,
    seed, tol); gnz (n, per_axis, radius); coupling (reps); discretize
    (n_per_dim, annulus, lipschitz, occupancy); simulate (horizon); sweep
    (dotted parameter path -> list of values).
    """

    name: str
    task: str
    model_xi: dict
    model_h: dict | None = None
    theorem: str | None = None
    bound: dict = field(default_factory=dict)
    mc: dict = field(default_factory=dict)
    gnz: dict | None = None
    coupling: dict | None = None
    discretize: dict | None = None
    simulate: dict | None = None
    sweep: dict | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ParameterError(f"task must be one of {TASKS}, got {self.task!r}")
        mc = {"reps": 1000, "burn_in": 10.0, "spacing": 1.0, "seed": 0, "tol": 1e-12}
        mc.update(self.mc or {})
        if int(mc["reps"]) < 1:
            raise ParameterError("mc.reps must be >= 1")
        if not mc["tol"] > 0:
            raise ParameterError("mc.tol must be positive")
        self.mc = mc
        if self.task in ("bound", "verify"):
            if self.theorem not in B.THEOREMS:
                raise ParameterError(f"theorem must be one of {B.THEOREMS}, got {self.theorem!r}")
            if self.model_h is None:
                raise ParameterError(f"task {self.task} needs model_h")

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ParameterError(f"unknown scenario fields {sorted(extra)}")
        return cls(**copy.deepcopy(d))

    @classmethod
    def from_file(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def to_dict(self):
        return {k: copy.deepcopy(getattr(self, k)) for k in self.__dataclass_fields__ if getattr(self, k) is not None}

    def with_overrides(self, seed=None, reps=None, tol=None):
        d = self.to_dict()
        for key, v in (("seed", seed), ("reps", reps), ("tol", tol)):
            if v is not None:
                d["mc"][key] = v
        if reps is not None and d.get("coupling"):
            d["coupling"]["reps"] = reps
        return Scenario.from_dict(d)

    def models(self):
        xi = model_from_dict(self.model_xi)
        h = model_from_dict(self.model_h) if self.model_h is not None else None
        return xi, h


def _set_path(d, path, value):
    keys = path.split(".")
    for k in keys[:-1]:
        d = d.setdefault(k, {})
    d[keys[-1]] = value


def sweep_points(s):
    """Scenarios for every point of the sweep grid (the scenario itself when there is none)."""
    if not s.sweep:
        return [({}, s)]
    paths = sorted(s.sweep)
    out = []
    for combo in itertools.product(*[s.sweep[p] for p in paths]):
        d = s.to_dict()
        d.pop("sweep")
        for p, v in zip(paths, combo):
            _set_path(d, p, v)
        out.append((dict(zip(paths, combo)), Scenario.from_dict(d)))
    return out


# ---------------------------------------------------------------------------
# sampling


def draw_samples(m, n, seed, key, burn_in=10.0, spacing=1.0):
    """n equilibrium configurations of m; direct simulation for constant-beta Poisson, SBDP otherwise."""
    if isinstance(m, Poisson) and m.beta.is_constant:
        gen = stream(seed, key)
        w = m.window
        counts = gen.poisson(m.beta.value * w.volume, n)
        out = Samples(PointConfig(w.uniform(gen, int(c)), w.dim) for c in counts)
        out.meta = {"method": "direct", "mean_count": float(counts.mean()) if n else math.nan}
        return out
    if not m.has_envelope():
        raise StabilityError(f"{m.kind} cannot be simulated without conditioning on A_k")
    out = sample_equilibrium(m, burn_in, n, spacing, seed, replica=key)
    out.meta["method"] = "sbdp"
    return out


def simulable(m, condition):
    """m itself if it has an envelope, otherwise its A_k-conditioned surrogate."""
    if m.has_envelope():
        return m, False
    if not condition:
        raise StabilityError(f"{m.kind} needs bound.condition = {{k, delta}} to be simulated")
    return Conditioned(m, condition["k"], condition["delta"]), True


# ---------------------------------------------------------------------------
# empirical total variation


def default_tv_family(a, b):
    env = max(_envelope_count(a), _envelope_count(b))
    return tv_family(a.window, env)


def _envelope_count(m):
    try:
        return m.envelope_integral()
    except StabilityError:
        return m.beta.integral(m.window)


def empirical_tv_lower(a, b, stats=None, n=1000, seed=0, burn_in=10.0, spacing=1.0, samples_a=None, samples_b=None):
    """max over a fixed [0,1] statistic family of |mean_a - mean_b|, with its standard error.

    Returns an EmpiricalLower (lower, se, best statistic, family size).
    """
    stats = stats or default_tv_family(a, b)
    if samples_a is None:
        samples_a = draw_samples(a, n, seed, KEY_XI, burn_in, spacing)
    if samples_b is None:
        samples_b = draw_samples(b, n, seed, KEY_H, burn_in, spacing)
    return empirical_lower(samples_a, samples_b, stats)


# ---------------------------------------------------------------------------
# GNZ residuals


class HFunction:
    """h(x, xi) in [0, 1], vectorized over the rows of X."""

    name = "h"

    def __call__(self, X, pts, w):
        raise NotImplementedError


class HOne(HFunction):
    name = "one"

    def __call__(self, X, pts, w):
        return np.ones(len(X))


class HEmptyBall(HFunction):
    """1{xi(B(x, r)) = 0}."""

    def __init__(self, r):
        self.r = float(r)
        self.name = f"empty_ball({self.r:g})"

    def __call__(self, X, pts, w):
        if not len(pts):
            return np.ones(len(X))
        return (w.cross_distances(X, pts).min(axis=1) > self.r).astype(float)


h_one = HOne()


def h_empty_ball(r):
    return HEmptyBall(r)


@dataclass
class GnzResult:
    test: str
    lhs: float
    rhs: float
    residual: float
    se: float
    n: int

    @property
    def ok(self):
        return abs(self.residual) <= 3 * self.se

    def to_dict(self):
        return {"test": self.test, "lhs": self.lhs, "rhs": self.rhs, "residual": self.residual,
                "se": self.se, "n": self.n, "within_3se": self.ok}


def _batch_se(v, batches=50):
    """Standard error of the mean by batch means (robust to serial correlation along one trajectory)."""
    n = len(v)
    if n < 2:
        return math.inf
    if n < 4 * batches:
        return float(v.std(ddof=1) / math.sqrt(n))
    size = n // batches
    means = v[: size * batches].reshape(batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(batches))


def gnz_residual(m, h, n=1000, seed=0, samples=None, per_axis=None, burn_in=10.0, spacing=1.0):
    """Both sides of E sum_{x in Xi} h(x, Xi - x) = ∫ E h(x, Xi) lambda(x | Xi) dx.

    The right-hand side uses a randomly shifted grid per sample, which is an
    unbiased quadrature; the residual's error is estimated by batch means of
    the per-sample differences.
    """
    if samples is None:
        samples = draw_samples(m, n, seed, KEY_GNZ, burn_in, spacing)
    w = m.window
    per_axis = per_axis or max(2, int(round(1024 ** (1 / w.dim))))
    gen = stream(seed, KEY_GNZ, 1)
    lhs = np.empty(len(samples))
    rhs = np.empty(len(samples))
    for i, s in enumerate(samples):
        pts = np.asarray(s, float).reshape(-1, w.dim)
        tot = 0.0
        for j in range(len(pts)):
            rest = np.delete(pts, j, axis=0)
            tot += float(h(pts[j:j + 1], rest, w)[0])
        lhs[i] = tot
        X = B._random_shift_grid(w, gen, per_axis)
        rhs[i] = w.volume * float(np.mean(h(X, pts, w) * m.cond_intensity_many(X, pts)))
    d = lhs - rhs
    return GnzResult(h.name, float(lhs.mean()), float(rhs.mean()), float(d.mean()), _batch_se(d), len(samples))


# ---------------------------------------------------------------------------
# theorem dispatch


def compute_bound(s, samples_xi=None, samples_moments=None):
    """Run the scenario's theorem; samples feed the Monte Carlo intensity/moment modes."""
    xi, h = s.models()
    b = dict(s.bound)
    mode = b.get("intensity_mode", "envelope")
    regime = b.get("regime", "optimal")
    smp = samples_xi if mode == "monte_carlo" else None
    with series_tolerance(s.mc["tol"]):
        th = s.theorem
        if th == "main":
            return B.tv_bound_main(xi, h, samples=smp, seed=s.mc["seed"])
        if th == "inhibitory_pip":
            return B.tv_bound_inhibitory_pip(xi, h, mode, smp, regime)
        if th == "hardcore_pip":
            return B.tv_bound_hardcore_pip(xi, h, mode, smp, regime)
        if th == "general_pip":
            return B.tv_bound_general_pip(
                xi, h, b["k"], b["delta"], mode, smp, moments=b.get("moments"),
                cstar_star=b.get("cstar_star"), samples_moments=samples_moments, regime=regime,
            )
        if th == "lennard_jones":
            return B.tv_bound_lennard_jones(xi, h, b["k"], b["delta"], mode, smp, regime)
        if th == "area_vs_hardcore":
            if not isinstance(xi, AreaInteraction):
                raise ParameterError("area_vs_hardcore needs an AreaInteraction model_xi")
            hp = s.model_h["params"]
            mean_xi = float(np.mean([len(c) for c in samples_xi])) if (smp is not None) else None
            rep = B.tv_bound_area_vs_hardcore(
                xi.beta.value, xi.gamma, xi.R, hp["beta"], mean_xi=mean_xi, window=xi.window, regime=regime
            )
            if "R0" in b:
                low = B.tv_lower_area(hp["beta"], xi.gamma, xi.R, b["R0"], xi.window)
                rep.intermediates["tv_lower"] = low
                rep.intermediates["R0"] = b["R0"]
            return rep
    raise ParameterError(f"unknown theorem {s.theorem!r}")


def _ks(s):
    k = s.bound.get("k")
    if k is None:
        return []
    return [int(k)] if np.isscalar(k) else [int(v) for v in k]


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerifyReport:
    theoretical: B.BoundReport
    empirical_lower: float
    empirical_se: float
    ordering_ok: bool
    gnz_residuals: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "theoretical": self.theoretical.to_dict(),
            "empirical_lower": self.empirical_lower,
            "empirical_se": self.empirical_se,
            "ordering_ok": self.ordering_ok,
            "gnz_residuals": [g.to_dict() for g in self.gnz_residuals],
            "details": B._jsonable(self.details),
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)


def _one_point_starts(pool, reps, seed, w):
    gen = stream(seed, KEY_START)
    xis, etas = [], []
    for i in range(reps):
        base = np.asarray(pool[i % len(pool)], float).reshape(-1, w.dim)
        extra = w.uniform(gen, 1)
        xis.append(PointConfig(np.concatenate([base, extra])))
        etas.append(PointConfig(base.copy(), w.dim))
    return xis, etas


def coupling_check(h, pool, reps, seed, regime="optimal", tol=None):
    """Mean coupling time from one-point-difference starts against the c1 bound of h."""
    xis, etas = _one_point_starts(pool, reps, seed, h.window)
    mean, se, frac = mean_coupling_time(h, xis, etas, reps, stream_seed(seed, KEY_COUPLE))
    sp = stein_params(h, regime, tol)
    return {
        "reps": reps,
        "mean_tau": mean,
        "se": se,
        "timeout_fraction": frac,
        "c1": sp.c1,
        "ok": bool(mean <= sp.c1 + 3 * se),
    }


def _tail_for_k(rep, k):
    """The bound's A_k tail term at a given k (from the k sweep when there is one)."""
    for row in rep.intermediates.get("k_sweep", []):
        if row["k"] == k and "tail" in row:
            return row["tail"]
    if rep.intermediates.get("k") == k:
        return rep.tail
    raise ParameterError(f"bound.condition.k={k} must be one of the bound's k values")


def stream_seed(seed, key):
    """A derived integer seed for routines that take a plain seed."""
    return int(stream(seed, key).integers(0, 2**63 - 1))


def verify_bounds_report(s):
    """Theorem bound, empirical lower estimate, coupling check and GNZ residuals for one scenario."""
    xi, h = s.models()
    mc = s.mc
    n, seed, burn, spacing = int(mc["reps"]), int(mc["seed"]), float(mc["burn_in"]), float(mc["spacing"])
    details = {"scenario": s.name, "theorem": s.theorem}
    cond = s.bound.get("condition")
    try:
        a, a_cond = simulable(xi, cond)
        b, b_cond = simulable(h, cond)
    except GibbsError as e:
        raise type(e)(f"scenario {s.name}: {e}") from e
    details["simulated_xi"] = a.kind + (" (A_k surrogate)" if a_cond else "")
    details["simulated_h"] = b.kind + (" (A_k surrogate)" if b_cond else "")
    smp_a = draw_samples(a, n, seed, KEY_XI, burn, spacing)
    smp_b = draw_samples(b, n, seed, KEY_H, burn, spacing)
    details["mean_count_xi"] = smp_a.meta.get("mean_count")
    details["mean_count_h"] = smp_b.meta.get("mean_count")

    # samples for Monte Carlo intensities and moments
    samples_xi = smp_a
    samples_moments = None
    mode = s.bound.get("intensity_mode", "envelope")
    ks = _ks(s)
    if s.theorem in ("general_pip", "lennard_jones") and (mode == "monte_carlo" or s.bound.get("mc_moments")):
        delta = s.bound["delta"]
        per_k = {}
        mom = {}
        for kk in ks:
            cx = Conditioned(xi, kk, delta)
            sx = draw_samples(cx, n, seed, 100 + kk, burn, spacing)
            per_k[kk] = sx
            if s.bound.get("mc_moments"):
                ch = Conditioned(h, kk, delta)
                mom[kk] = {"xi": sx, "h": draw_samples(ch, n, seed, 200 + kk, burn, spacing)}
        samples_xi = per_k
        if s.bound.get("mc_moments"):
            # the tail moment E|Xi| C^(k|Xi|) is estimated per k
            samples_moments = mom
    if isinstance(samples_moments, dict) and len(ks) > 1:
        reps = []
        for kk in ks:
            sk = Scenario.from_dict({**s.to_dict(), "bound": {**s.bound, "k": kk}})
            reps.append(compute_bound(sk, samples_xi, samples_moments[kk]))
        rep = min(reps, key=lambda r: r.bound)
        rep.intermediates["k_sweep"] = [
            {"k": r.intermediates["k"], "bound": r.bound, "first_term": r.first_term, "tail": r.tail} for r in reps
        ]
        rep.notes.append(f"minimum over k in {ks}")
    else:
        sm = samples_moments[ks[0]] if isinstance(samples_moments, dict) else None
        rep = compute_bound(s, samples_xi, sm)

    emp = empirical_tv_lower(a, b, samples_a=smp_a, samples_b=smp_b)
    lower = emp.lower
    details["empirical"] = emp.to_dict()
    if a_cond or b_cond:
        # |d_TV(Xi, H) - d_TV(Xi_A, H_A)| <= P(Xi not in A_k) + P(H not in A_k)
        adj = _tail_for_k(rep, int(cond["k"]))
        lower = max(0.0, emp.lower - adj)
        details["surrogate_adjustment"] = adj
    ordering_ok = bool(lower - 3 * emp.se <= rep.bound)

    if s.theorem == "area_vs_hardcore" and "tv_lower" in rep.intermediates:
        details["sandwich"] = {
            "theoretical_lower": rep.intermediates["tv_lower"],
            "empirical_lower": lower,
            "empirical_upper_3se": lower + 3 * emp.se,
            "theoretical_upper": rep.bound,
            "bounds_ordered": bool(rep.intermediates["tv_lower"] <= rep.bound),
        }

    if s.coupling and b.has_envelope() and not b_cond:
        details["coupling"] = coupling_check(b, smp_b, int(s.coupling.get("reps", n)), seed,
                                             s.bound.get("regime", "optimal"), mc["tol"])

    gnz = []
    g = s.gnz or {}
    if g.get("n", 1):
        ng = min(int(g.get("n", n)), n)
        tests = [h_one]
        if "radius" in g:
            tests.append(h_empty_ball(g["radius"]))
        for label, m, smp in (("xi", a, smp_a), ("h", b, smp_b)):
            for t in tests:
                r = gnz_residual(m, t, samples=smp[:ng], seed=seed + (0 if label == "xi" else 1),
                                 per_axis=g.get("per_axis"))
                r.test = f"{label}:{r.test}"
                gnz.append(r)
    return VerifyReport(rep, lower, emp.se, ordering_ok, gnz, details)


# ---------------------------------------------------------------------------
# other tasks


def run_bound(s):
    """(list of (sweep params, BoundReport)) for a bound task."""
    out = []
    for params, sp in sweep_points(s):
        out.append((params, compute_bound(sp)))
    return out


def run_simulate(s):
    xi, _ = s.models()
    m, _ = simulable(xi, s.bound.get("condition"))
    mc = s.mc
    cfg = s.simulate or {}
    if "horizon" in cfg:
        st = simulate(m, PointConfig.empty(m.window.dim), cfg["horizon"], mc["seed"])
        return {"model": m.to_dict(), "horizon": cfg["horizon"], "count": len(st.config),
                "jumps": st.jump_count, "meta": st.meta, "points": st.config.to_list()}
    smp = draw_samples(m, int(mc["reps"]), mc["seed"], KEY_XI, mc["burn_in"], mc["spacing"])
    counts = np.array([len(c) for c in smp])
    return {
        "model": m.to_dict(),
        "n": len(smp),
        "mean_count": float(counts.mean()),
        "var_count": float(counts.var(ddof=1)) if len(counts) > 1 else 0.0,
        "meta": {k: v for k, v in smp.meta.items() if k != "burn_in_trace"},
        "burn_in_trace": smp.meta.get("burn_in_trace", []),
    }


def run_couple(s):
    xi, h = s.models()
    m = h if h is not None else xi
    mc = s.mc
    reps = int((s.coupling or {}).get("reps", mc["reps"]))
    pool = draw_samples(m, min(reps, 1000), mc["seed"], KEY_H, mc["burn_in"], mc["spacing"])
    out = coupling_check(m, pool, reps, mc["seed"], s.bound.get("regime", "optimal"), mc["tol"])
    out["model"] = m.to_dict()
    return out


def run_discretize(s):
    """d2 bounds over the n_per_dim list, with an empirical lower estimate at each n."""
    xi, _ = s.models()
    cfg = s.discretize or {}
    ns = cfg.get("n_per_dim", [10])
    ns = [ns] if np.isscalar(ns) else list(ns)
    mc = s.mc
    n, seed = int(mc["reps"]), int(mc["seed"])
    cont = draw_samples(xi, n, seed, KEY_XI, mc["burn_in"], mc["spacing"]) if cfg.get("empirical", True) else None
    fam = default_d2_family(xi)
    rows = []
    with series_tolerance(mc["tol"]):
        for k, npd in enumerate(ns):
            p = build_grid_partition(xi.window, npd)
            rep = d2_bound_discrete(xi, p, s.bound.get("intensity_mode", "envelope"),
                                    annulus=cfg.get("annulus", "exact"), lipschitz=cfg.get("lipschitz"),
                                    occupancy=cfg.get("occupancy", False), regime=s.bound.get("regime", "optimal"))
            row = {"n_per_dim": npd, "r_V": p.r_V, "report": rep}
            if cont is not None:
                dm = DiscretizedPIP(xi, p)
                smp = draw_samples(dm, n, seed, KEY_DISC + 10 * k, mc["burn_in"], mc["spacing"])
                lat = [lattice_points(p, project(p, c)) for c in smp]
                emp = empirical_d2_lower(lat, cont, fam)
                row["empirical"] = emp.to_dict()
                row["ordering_ok"] = bool(emp.lower - 3 * emp.se <= rep.bound)
            rows.append(row)
    r = np.array([row["r_V"] for row in rows])
    ex = np.array([row["report"].bound - row["r_V"] for row in rows])
    slope = float(np.polyfit(np.log(r), np.log(ex), 1)[0]) if len(rows) > 1 and np.all(ex > 0) else math.nan
    return rows, slope


__all__ = [
    "GnzResult",
    "HEmptyBall",
    "HOne",
    "Scenario",
    "TASKS",
    "HFunction",
    "VerifyReport",
    "compute_bound",
    "coupling_check",
    "default_tv_family",
    "draw_samples",
    "empirical_tv_lower",
    "gnz_residual",
    "h_empty_ball",
    "h_one",
    "run_bound",
    "run_couple",
    "run_discretize",
    "run_simulate",
    "simulable",
    "sweep_points",
    "verify_bounds_report",
]
