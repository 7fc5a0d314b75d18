"""Spatial birth-death processes with unit per-capita death rate, and the two-chain coupling.

Births are realized by thinning: candidate births arrive at the total rate
of a dominating birth intensity (``Model.birth_bound``) and a candidate at
x with local bound level q is kept with probability lambda(x | xi) / q.
This gives the exact jump law of the process without evaluating the
integral of lambda(. | xi).
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, StabilityError
from .geometry import PointConfig, as_points, symdiff_norm
from .rng import Draws, stream

MAX_JUMPS = 1_000_000
LOW_ACCEPTANCE = 1e-6


class _Pts:
    """Growable point buffer with O(1) swap-removal."""

    def __init__(self, pts, dim):
        pts = np.asarray(pts, float).reshape(-1, dim)
        self.buf = np.empty((max(16, 2 * len(pts)), dim))
        self.buf[: len(pts)] = pts
        self.n = len(pts)

    def __len__(self):
        return self.n

    def view(self):
        return self.buf[: self.n]

    def __array__(self, dtype=None, copy=None):
        return self.view()

    def add(self, x):
        if self.n == len(self.buf):
            self.buf = np.concatenate([self.buf, np.empty_like(self.buf)])
        self.buf[self.n] = x
        self.n += 1

    def remove(self, i):
        y = self.buf[i].copy()
        self.n -= 1
        self.buf[i] = self.buf[self.n]
        return y


class _Union:
    """Array view over several point buffers (what a dominating birth bound must see)."""

    def __init__(self, *parts):
        self.parts = parts

    def __array__(self, dtype=None, copy=None):
        return np.concatenate([p.view() for p in self.parts])


class _Trace:
    def __init__(self, sink):
        self._own = isinstance(sink, str)
        self.f = open(sink, "w") if self._own else sink

    def write(self, t, kind, point, chain):
        rec = {"t": t, "kind": kind, "point": [float(v) for v in point], "chain": chain}
        self.f.write(json.dumps(rec) + "\n")

    def close(self):
        if self._own:
            self.f.close()


@dataclass
class SbdpState:
    config: PointConfig
    time: float
    jump_count: int
    meta: dict = field(default_factory=dict)


@dataclass
class CouplingRecord:
    tau: float  # math.inf marks a timeout
    jumps: int
    good_deaths: int
    bad_births: int
    final_symdiff: int

    @property
    def coupled(self):
        return self.final_symdiff == 0

    def to_dict(self):
        return {
            "tau": "timeout" if self.tau == math.inf else self.tau,
            "jumps": self.jumps,
            "good_deaths": self.good_deaths,
            "bad_births": self.bad_births,
            "final_symdiff": self.final_symdiff,
        }


class _Chain:
    """One SBDP trajectory that can be advanced in time."""

    def __init__(self, m, xi0, seed, replica=0, trace=None):
        self.m = m
        self.w = m.window
        pts = as_points(xi0, self.w.dim)
        if len(pts) and not np.all(self.w.contains(pts)):
            raise ParameterError("starting configuration must lie in the window")
        self.bound = m.birth_bound()
        self.pts = _Pts(pts, self.w.dim)
        self.bound.reset(self.pts)
        self.draws = Draws(stream(seed, replica))
        self.t = 0.0
        self.jumps = 0
        self.proposals = 0
        self.accepted = 0
        self.trace = _Trace(trace) if trace is not None else None
        # the first holding time is drawn lazily so that advance() can stop in between
        self._next = None

    def _draw_next(self):
        rate = self.bound.total() + len(self.pts)
        self._rate = rate
        self._next = math.inf if rate == 0 else self.t + self.draws.exponential() / rate

    def advance(self, until):
        m, pts, bound, d = self.m, self.pts, self.bound, self.draws
        if self._next is None:
            self._draw_next()
        while self._next <= until:
            self.t = self._next
            btot = bound.total()
            if d.uniform() * self._rate < btot:
                x, level = bound.propose(d)
                self.proposals += 1
                lam = m.papangelou(x, pts.view())
                if lam > level * (1 + 1e-9):
                    raise StabilityError(f"birth bound {level:.6g} exceeded by lambda={lam:.6g} at {x}")
                if d.uniform() * level < lam:
                    pts.add(x)
                    bound.add(x)
                    self.jumps += 1
                    self.accepted += 1
                    if self.trace:
                        self.trace.write(self.t, "birth", x, "xi")
            else:
                y = pts.remove(int(d.uniform() * len(pts)))
                bound.remove(y)
                self.jumps += 1
                if self.trace:
                    self.trace.write(self.t, "death", y, "xi")
            self._draw_next()
        self.t = until

    def state(self):
        meta = {"proposals": self.proposals, "accepted_births": self.accepted}
        if self.proposals:
            rate = self.accepted / self.proposals
            meta["acceptance"] = rate
            if rate < LOW_ACCEPTANCE:
                meta["warning"] = f"birth acceptance {rate:.3g} below {LOW_ACCEPTANCE:g}"
        return SbdpState(PointConfig(self.pts.view().copy()), self.t, self.jumps, meta)


def simulate(m, xi0, horizon, seed, replica=0, trace=None):
    """Run the SBDP of ``m`` from ``xi0`` up to time ``horizon``."""
    if horizon < 0:
        raise ParameterError("horizon must be non-negative")
    ch = _Chain(m, xi0, seed, replica, trace)
    try:
        ch.advance(horizon)
    finally:
        if ch.trace:
            ch.trace.close()
    return ch.state()


class Samples(list):
    """List of PointConfig with run metadata in ``.meta``."""

    meta: dict


def sample_equilibrium(m, burn_in, n, spacing, seed, start=None, replica=0):
    """n snapshots of one trajectory at times burn_in + i*spacing."""
    if n < 0 or burn_in < 0 or spacing <= 0:
        raise ParameterError("need n >= 0, burn_in >= 0 and spacing > 0")
    out = Samples()
    out.meta = {}
    if n == 0:
        return out
    start = PointConfig.empty(m.window.dim) if start is None else start
    ch = _Chain(m, start, seed, replica)
    burn_trace = []
    steps = 20
    for i in range(1, steps + 1):
        ch.advance(burn_in * i / steps)
        burn_trace.append((ch.t, len(ch.pts)))
    for i in range(n):
        ch.advance(burn_in + i * spacing)
        out.append(PointConfig(ch.pts.view().copy()))
    st = ch.state()
    counts = np.array([len(c) for c in out])
    half = len(burn_trace) // 2
    out.meta = {
        "burn_in_trace": burn_trace,
        "burn_in_first_half_mean": float(np.mean([c for _, c in burn_trace[:half]])) if half else math.nan,
        "burn_in_second_half_mean": float(np.mean([c for _, c in burn_trace[half:]])),
        "mean_count": float(counts.mean()),
        **st.meta,
    }
    return out


def couple(m, xi, eta, seed, max_jumps=MAX_JUMPS, replica=0, trace=None):
    """Run the coupled pair started from (xi, eta) until the two configurations agree."""
    return _run_coupled(m, xi, eta, seed, max_jumps, replica, trace, None)[0]


def coupled_pair(m, xi, eta, horizon, seed, replica=0, max_jumps=MAX_JUMPS, trace=None):
    """Run the coupled pair up to time ``horizon`` (moving together once they agree).

    Returns (xi_t, eta_t, record); record.tau is the coupling time, or inf
    if the pair had not met by the horizon.
    """
    if horizon < 0:
        raise ParameterError("horizon must be non-negative")
    rec, S, A, B = _run_coupled(m, xi, eta, seed, max_jumps, replica, trace, float(horizon))
    s = S.view()
    return PointConfig(np.concatenate([s, A.view()])), PointConfig(np.concatenate([s, B.view()])), rec


def _run_coupled(m, xi, eta, seed, max_jumps, replica, trace, horizon):
    w = m.window
    dim = w.dim
    a = as_points(xi, dim)
    b = as_points(eta, dim)
    # common points are matched bit-exactly
    pool = {}
    for p in a:
        pool.setdefault(p.tobytes(), []).append(p)
    common, only_b = [], []
    for p in b:
        lst = pool.get(p.tobytes())
        if lst:
            common.append(lst.pop())
        else:
            only_b.append(p)
    only_a = [p for lst in pool.values() for p in lst]
    S, A, B = (_Pts(np.array(v).reshape(-1, dim), dim) for v in (common, only_a, only_b))
    if horizon is None and len(A) == 0 and len(B) == 0:
        return CouplingRecord(0.0, 0, 0, 0, 0), S, A, B
    bound = m.birth_bound()
    bound.reset(_Union(S, A, B))
    d = Draws(stream(seed, replica))
    tr = _Trace(trace) if trace is not None else None
    t = 0.0
    jumps = good = bad = 0
    iters = 0
    cap_iters = 50 * max_jumps
    tau = 0.0 if not (len(A) or len(B)) else math.inf
    try:
        while horizon is not None or len(A) or len(B):
            if jumps >= max_jumps or iters >= cap_iters:
                return CouplingRecord(tau, jumps, good, bad, len(A) + len(B)), S, A, B
            iters += 1
            btot = bound.total()
            nS, nA, nB = len(S), len(A), len(B)
            rate = btot + nS + nA + nB
            if rate == 0:
                break
            t += d.exponential() / rate
            if horizon is not None and t > horizon:
                break
            if d.uniform() * rate < btot:
                x, level = bound.propose(d)
                s = S.view()
                la = m.papangelou(x, np.concatenate([s, A.view()]))
                lb = m.papangelou(x, np.concatenate([s, B.view()]))
                hi = max(la, lb)
                if hi > level * (1 + 1e-9):
                    raise StabilityError(f"birth bound {level:.6g} exceeded by lambda={hi:.6g}")
                v = d.uniform() * level
                if v < min(la, lb):
                    S.add(x)
                    kind, chain = "common", "both"
                elif v < hi:
                    if la > lb:
                        A.add(x)
                        chain = "xi"
                    else:
                        B.add(x)
                        chain = "eta"
                    kind = "birth"
                    bad += 1
                else:
                    continue
                bound.add(x)
                jumps += 1
                if tr:
                    tr.write(t, kind, x, chain)
            else:
                i = int(d.uniform() * (nS + nA + nB))
                if i < nS:
                    y = S.remove(i)
                    kind, chain = "common", "both"
                elif i < nS + nA:
                    y = A.remove(i - nS)
                    kind, chain = "death", "xi"
                    good += 1
                else:
                    y = B.remove(i - nS - nA)
                    kind, chain = "death", "eta"
                    good += 1
                bound.remove(y)
                jumps += 1
                if tr:
                    tr.write(t, kind, y, chain)
            if tau == math.inf and not (len(A) or len(B)):
                tau = t
    finally:
        if tr:
            tr.close()
    return CouplingRecord(tau, jumps, good, bad, len(A) + len(B)), S, A, B


def _couple_chunk(args):
    m, pairs, seed, max_jumps, first = args
    return [couple(m, x, e, seed, max_jumps, replica=first + j) for j, (x, e) in enumerate(pairs)]


def coupling_records(m, xi, eta, reps, seed, max_jumps=MAX_JUMPS, n_jobs=1):
    """CouplingRecord per replica; xi / eta may be single configurations or per-replica lists."""
    if reps < 1:
        raise ParameterError("reps must be >= 1")

    def pick(v, i):
        # a list of PointConfig with one entry per replica, otherwise one shared start
        if isinstance(v, list) and len(v) == reps and v and isinstance(v[0], PointConfig):
            return v[i]
        return v

    pairs = [(pick(xi, i), pick(eta, i)) for i in range(reps)]
    if n_jobs == 1:
        return _couple_chunk((m, pairs, seed, max_jumps, 0))
    size = math.ceil(reps / n_jobs)
    chunks = [(m, pairs[i:i + size], seed, max_jumps, i) for i in range(0, reps, size)]
    with ProcessPoolExecutor(n_jobs) as ex:
        parts = list(ex.map(_couple_chunk, chunks))
    return [r for part in parts for r in part]


def mean_coupling_time(m, xi, eta, reps, seed, max_jumps=MAX_JUMPS, n_jobs=1):
    """(mean, stderr, timeout_fraction) of tau over independent replicas; timeouts are excluded."""
    recs = coupling_records(m, xi, eta, reps, seed, max_jumps, n_jobs)
    taus = np.array([r.tau for r in recs])
    ok = np.isfinite(taus)
    frac = 1.0 - ok.mean()
    if frac > 0.01:
        warnings.warn(f"{frac:.1%} of coupling runs timed out", RuntimeWarning, stacklevel=2)
    t = taus[ok]
    if not len(t):
        return math.nan, math.nan, frac
    se = float(t.std(ddof=1) / math.sqrt(len(t))) if len(t) > 1 else 0.0
    return float(t.mean()), se, float(frac)


def check_bookkeeping(xi, eta, rec):
    """final_symdiff = |xi - eta| + bad_births - good_deaths (holds for every finished or timed-out run)."""
    return rec.final_symdiff == symdiff_norm(xi, eta) + rec.bad_births - rec.good_deaths


__all__ = [
    "CouplingRecord",
    "Samples",
    "SbdpState",
    "check_bookkeeping",
    "couple",
    "coupled_pair",
    "coupling_records",
    "mean_coupling_time",
    "sample_equilibrium",
    "simulate",
]
