"""Stein factor inputs (eps, c), the choice of n*, the c1 series and a Monte Carlo oracle.

The series bounds the expected absorption time e1 of a birth-death chain on
{0, 1, 2, ...} started at 1 that moves down with probability p_n,
p_n = 1/(1+eps) below n* and n/(n+c) from n* on, and holds an Exp(n) time
at level n.  That chain dominates the number of unmatched points in the
coupled birth-death processes.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, ExplosionError, ParameterError, StabilityError
from .geometry import ball_measure, integrate_window
from .models import (
    AreaInteraction,
    Conditioned,
    LennardJonesRadial,
    PairwiseInteraction,
    PiecewiseRadial,
    Poisson,
)
from .rng import stream

SERIES_TOL = 1e-12
SERIES_CAP = 10_000
LEVEL_CAP = 1_000_000

_tol_stack = [SERIES_TOL]


@contextmanager
def series_tolerance(tol):
    """Temporarily change the default tolerance used by stein_params."""
    if not tol > 0:
        raise ParameterError("tol must be positive")
    _tol_stack.append(float(tol))
    try:
        yield
    finally:
        _tol_stack.pop()


@dataclass
class SteinParams:
    eps: float
    c: float
    nstar: float  # int or math.inf
    c1: float
    truncation_error: float = 0.0
    terms: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "eps": self.eps,
            "c": self.c,
            "nstar": "inf" if self.nstar == math.inf else int(self.nstar),
            "c1": self.c1,
            "truncation_error": self.truncation_error,
            "terms": self.terms,
            "notes": list(self.notes),
        }


def choose_nstar(eps, c, regime="optimal"):
    """n* = ceil(c/eps); 1 when eps = 0; infinity for the eps-only regime when eps < 1."""
    if eps < 0 or c < 0:
        raise ParameterError("eps and c must be non-negative")
    if eps == 0:
        return 1
    if regime == "eps_only":
        if eps < 1:
            return math.inf
        raise DivergenceError(f"the eps-only regime needs eps < 1, got {eps}")
    if regime != "optimal":
        raise ParameterError(f"unknown n* regime {regime!r}")
    q = c / eps
    n = math.ceil(q)
    # guard against q landing a rounding error above an integer
    if n - q > 1 - 1e-12 * max(q, 1.0):
        n -= 1
    return max(1, n)


def _tail_series(c, n, tol=SERIES_TOL, cap=SERIES_CAP):
    """log S with S = sum_{i>=0} c^i / prod_{k=0}^i (n+k) * (1 + c/(n+i)); returns (logS, rel_err, terms)."""
    log_c = math.log(c) if c > 0 else -math.inf
    log_prod = math.log(n)
    log_terms = []
    logS = -math.inf
    for i in range(cap):
        if i > 0:
            log_prod += math.log(n + i)
        lt = (i * log_c if i > 0 else 0.0) - log_prod + math.log1p(c / (n + i))
        log_terms.append(lt)
        logS = np.logaddexp(logS, lt)
        ratio = c / (n + i + 1)
        if c == 0:
            return float(logS), 0.0, i + 1
        if ratio < 1 and lt - logS < math.log(tol):
            # remaining terms shrink at least geometrically with this ratio
            rest = math.exp(lt - logS) * ratio / (1 - ratio)
            return float(logS), rest, i + 1
    ratio = c / (n + cap)
    rest = math.inf if ratio >= 1 else math.exp(log_terms[-1] - logS) * ratio / (1 - ratio)
    return float(logS), rest, cap


def _log_sum_powers(eps, n, tol=SERIES_TOL):
    """sum_{j=1}^{n-1} eps^j / j and its truncation error (n may be inf)."""
    if n <= 1:
        return 0.0, 0.0
    if eps < 1:
        total, err = 0.0, 0.0
        term = 1.0
        j = 1
        while j < n:
            term *= eps
            t = term / j
            total += t
            if t < tol * total:
                err = term * eps / ((j + 1) * (1 - eps))
                break
            j += 1
        return total, err
    if n == math.inf:
        return math.inf, 0.0
    j = np.arange(1, int(n))
    logs = j * math.log(eps) - np.log(j)
    return float(np.exp(np.logaddexp.reduce(logs))), 0.0


def c1_upper(eps, c, nstar, tol=SERIES_TOL):
    """Evaluate the Stein factor bound e1 for given (eps, c, n*)."""
    if eps < 0 or c < 0:
        raise ParameterError("eps and c must be non-negative")
    if tol <= 0:
        raise ParameterError("tol must be positive")
    if eps == 0:
        return SteinParams(eps, c, nstar, 1.0, 0.0, 0, ["eps = 0: c1 = 1 exactly"])
    if nstar == math.inf:
        if eps >= 1:
            raise DivergenceError(f"n* = inf needs eps < 1, got eps = {eps}")
        val = (1 + eps) / eps * -math.log1p(-eps)
        return SteinParams(eps, c, math.inf, val, 0.0, 0, ["n* = inf: closed form"])
    nstar = int(nstar)
    if nstar < 1:
        raise ParameterError("n* must be a positive integer or inf")
    logS, rel, terms = _tail_series(c, nstar, tol)
    log_first = (nstar - 1) * math.log(eps) + logS
    first = math.exp(log_first) if log_first < 709 else math.inf
    second, err2 = _log_sum_powers(eps, nstar, tol)
    second *= (1 + eps) / eps
    err2 *= (1 + eps) / eps
    val = first + second
    return SteinParams(eps, c, nstar, val, first * rel + err2, terms)


def e1_mc_oracle(eps, c, nstar, reps, seed, block=20_000, level_cap=LEVEL_CAP):
    """Mean and standard error of the absorption time of the dominating chain.

    Replicas are simulated in vectorized blocks; block b uses the stream
    keyed by (seed, b), so the output only depends on (seed, reps, block).
    """
    if reps < 1:
        raise ParameterError("reps must be >= 1")
    if eps == 0:
        c = 0.0  # eps = 0 forces c = 0 (a configuration-free intensity)
    times = np.empty(reps)
    for b, start in enumerate(range(0, reps, block)):
        m = min(block, reps - start)
        gen = stream(seed, b)
        level = np.ones(m, dtype=np.int64)
        t = np.zeros(m)
        active = np.arange(m)
        while active.size:
            n = level[active]
            t[active] += gen.standard_exponential(active.size) / n
            p = np.where(n < nstar, 1.0 / (1.0 + eps), n / (n + c))
            down = gen.random(active.size) < p
            n = n + np.where(down, -1, 1)
            level[active] = n
            if n.max() > level_cap:
                raise ExplosionError(f"dominating chain exceeded level {level_cap} (eps={eps}, c={c}, n*={nstar})")
            active = active[n > 0]
        times[start:start + m] = t
    mean = float(times.mean())
    se = float(times.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.inf
    return mean, se


# ---------------------------------------------------------------------------
# model-specific eps and c


def _grid_sup(g, w, rel=1e-4, n0=5, max_rounds=40):
    """Maximise g over the window on a deterministic grid refined around the best node."""
    d = w.dim
    axes = [np.linspace(w.lo[i], w.hi[i], n0) for i in range(d)]
    nodes = np.array(np.meshgrid(*axes, indexing="ij")).reshape(d, -1).T
    vals = np.array([g(y) for y in nodes])
    best = int(np.argmax(vals))
    y, v = nodes[best], vals[best]
    step = w.sides / (n0 - 1)
    for _ in range(max_rounds):
        step = step / 2
        offs = np.array(np.meshgrid(*[[-1, 0, 1]] * d, indexing="ij")).reshape(d, -1).T
        cand = np.clip(y + offs * step, w.lo, w.hi)
        cv = np.array([g(p) for p in cand])
        j = int(np.argmax(cv))
        improved = cv[j] - v
        if cv[j] > v:
            y, v = cand[j], cv[j]
        if improved <= rel * abs(v) and np.all(step < w.sides * 1e-3):
            break
    return float(v), y


def _translation_invariant(m, reach):
    """True when integrals of radius <= reach around y do not depend on y (for the sup)."""
    w = m.window
    if not m.beta.is_constant:
        return False
    if w.torus:
        return True
    return bool(np.all(w.sides >= 2 * reach))


def _shell_measure(m, y, inner, outer):
    w = m.window
    if outer <= inner:
        return 0.0
    if m.beta.is_constant:
        return m.beta.value * (ball_measure(w, y, outer) - ball_measure(w, y, inner))
    return m.beta.ball_integral(w, y, outer) - m.beta.ball_integral(w, y, inner)


def _radial_eps_integrand(m, phi, delta):
    """y -> ∫_{X minus B(y,delta)} beta |phi - 1| + ∫_{B(y,delta)} beta, for piecewise phi (delta = 0: no ball)."""

    def g(y):
        tot = _shell_measure(m, y, 0.0, delta) if delta > 0 else 0.0
        for s, e, v in phi.shells():
            s = max(s, delta)
            if e > s and v != 1.0:
                tot += abs(v - 1.0) * _shell_measure(m, y, s, e)
        return tot

    return g


def _sup_y(m, g, reach):
    if _translation_invariant(m, reach):
        return float(g(m.window.center))
    return _grid_sup(g, m.window)[0]


def stein_eps(h):
    """Model-specific bound on eps = sup over one-point differences of ∫ |lambda(x|xi) - lambda(x|eta)| dx."""
    if isinstance(h, Poisson):
        return 0.0
    if isinstance(h, Conditioned):
        base = h.base
        delta = h.delta
        if isinstance(base, Poisson):
            inner = _sup_y(h, lambda y: _shell_measure(h, y, 0.0, delta), delta)
        elif isinstance(base, PairwiseInteraction) and isinstance(base.interaction, PiecewiseRadial):
            phi = base.interaction
            inner = _sup_y(h, _radial_eps_integrand(h, phi, delta), max(phi.support, delta))
        elif isinstance(base, PairwiseInteraction) and isinstance(base.interaction, LennardJonesRadial):
            phi = base.interaction
            # the R^D integral of |phi - 1| outside B(0, delta) dominates the window integral
            far = h.beta.max * phi.integral_abs_minus_one(lower=delta, dim=h.window.dim)
            near = _sup_y(h, lambda y: _shell_measure(h, y, 0.0, delta), delta)
            inner = far + near
        else:
            raise ParameterError(f"no eps formula for a conditioned {base.kind} model")
        return h.M_k * inner
    if isinstance(h, PairwiseInteraction):
        if not h.inhibitory:
            raise StabilityError(
                f"{h.kind} is not inhibitory: eps has no closed form without conditioning, use restrict_to_Ak"
            )
        phi = h.interaction
        if isinstance(phi, PiecewiseRadial):
            return _sup_y(h, _radial_eps_integrand(h, phi, 0.0), phi.support)
        w = h.window

        def g(y):
            f = lambda X: np.asarray(h.beta(X)) * (1.0 - phi.factors(y, X))  # noqa: E731
            return integrate_window(f, w, tol=1e-6 * max(h.beta.max, 1.0) * w.volume)

        return _grid_sup(g, w)[0]
    if isinstance(h, AreaInteraction):
        raise ParameterError("no eps formula for an area-interaction target")
    raise ParameterError(f"no eps formula for {h.kind}")


def stein_c(h):
    """n*-independent bound on c."""
    if isinstance(h, Poisson):
        return 0.0
    if isinstance(h, Conditioned):
        return h.M_k * h.beta.integral(h.window)
    if isinstance(h, PairwiseInteraction):
        if not h.inhibitory:
            raise StabilityError(f"{h.kind} is not inhibitory: use restrict_to_Ak")
        return h.beta.integral(h.window)
    raise ParameterError(f"no c formula for {h.kind}")


def stein_params(h, regime="optimal", tol=None):
    """(eps, c, n*) for the model and the resulting c1 bound."""
    tol = _tol_stack[-1] if tol is None else tol
    eps = stein_eps(h)
    c = stein_c(h)
    if eps == 0:
        return c1_upper(0.0, c, 1, tol)
    nstar = choose_nstar(eps, c, regime)
    return c1_upper(eps, c, nstar, tol)


__all__ = [
    "SteinParams",
    "c1_upper",
    "choose_nstar",
    "e1_mc_oracle",
    "series_tolerance",
    "stein_c",
    "stein_eps",
    "stein_params",
]
