"""Look-around random walks: samplers, exact oracles, and statistical checks.

A step law is a finite-support distribution over triples (zeta, nu, R): the
spatial displacement of a step, the time it took, and the radius within
which the walk can detect a target while standing at the pre-step position.
The walk S_n = s0 + zeta_1 + ... + zeta_n paired with the radius sequence
models a process that at time n "sees" everything within R_{n+1} of S_n.

The checks estimate the tail laws such walks obey in the three structural
regimes (positive drift, zero drift, degenerate steps) and report
PASS/FAIL verdicts against the expected shapes.  Verdicts are consistency
statements about finite samples, not proofs.  An exact forward dynamic
program over rational arithmetic provides the independent oracle for every
event with integer displacements.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from . import streams
from .errors import BudgetExceededError, PreconditionError
from .tails import (InsufficientDataError, SurvivalCurve, TailFit,
                    fit_tail, wilson_interval)

_DP_CELL_BUDGET = 8_000_000
_CHUNK = 4096


# ---------------------------------------------------------------------------
# step laws


@dataclass(frozen=True)
class LawOutcome:
    probability: Fraction | float
    zeta: int | float
    nu: int = 1
    radius: float = 1.0


@dataclass(frozen=True)
class StepLaw:
    """Finite-support law of (displacement, duration, look radius) triples."""

    outcomes: tuple[LawOutcome, ...]

    def __post_init__(self):
        if not self.outcomes:
            raise ValueError("a step law needs at least one outcome")
        total = 0.0
        for o in self.outcomes:
            if float(o.probability) < 0:
                raise ValueError("negative probability")
            if int(o.nu) != o.nu or o.nu < 1:
                raise ValueError("nu must be a positive integer")
            if float(o.radius) < 1:
                raise ValueError("radius must be >= 1")
            total += float(o.probability)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"outcome probabilities sum to {total!r}, not 1")

    @property
    def is_exact(self) -> bool:
        return all(isinstance(o.probability, Fraction) for o in self.outcomes)

    @property
    def integer_zeta(self) -> bool:
        return all(float(o.zeta).is_integer() for o in self.outcomes)

    @property
    def mean_zeta(self):
        if self.is_exact and self.integer_zeta:
            return sum((o.probability * int(o.zeta) for o in self.outcomes), Fraction(0))
        return float(sum(float(o.probability) * float(o.zeta) for o in self.outcomes))

    @property
    def mean_nu(self):
        if self.is_exact:
            return sum((o.probability * int(o.nu) for o in self.outcomes), Fraction(0))
        return float(sum(float(o.probability) * float(o.nu) for o in self.outcomes))

    @property
    def zeta_identically_zero(self) -> bool:
        return all(o.zeta == 0 for o in self.outcomes if float(o.probability) > 0)

    @property
    def unit_time(self) -> bool:
        return all(o.nu == 1 for o in self.outcomes)

    @property
    def max_reach(self) -> float:
        return max(abs(float(o.zeta)) + float(o.radius) for o in self.outcomes)

    def effective_drift(self):
        """Mean displacement per unit time, E[zeta] / E[nu]."""
        mz, mn = self.mean_zeta, self.mean_nu
        if isinstance(mz, Fraction) and isinstance(mn, Fraction):
            return mz / mn
        return float(mz) / float(mn)

    def envelope_delta(self) -> float:
        """A delta for which P(|zeta|+R > u) <= (1/delta) exp(-u**delta) holds.

        Finite support makes the tail vanish beyond max reach, so a valid
        delta always exists; this returns (a lower bound on) the largest one
        found by bisection.
        """
        B = max(self.max_reach, 1.0)
        lo, hi = 1e-9, 4.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if mid * math.exp(B**mid) <= 1.0:
                lo = mid
            else:
                hi = mid
        return lo


def make_law(entries: Sequence[tuple], require_envelope: bool = False) -> StepLaw:
    """Law from (probability, zeta[, nu[, radius]]) tuples.

    Probabilities given as strings or Fractions stay exact.  With
    ``require_envelope`` the stretched-exponential tail envelope is checked
    explicitly (finite-support laws always satisfy it).
    """
    outs = []
    for e in entries:
        prob = e[0]
        if isinstance(prob, str):
            prob = Fraction(prob)
        elif isinstance(prob, (int,)):
            prob = Fraction(prob)
        zeta = e[1]
        nu = e[2] if len(e) > 2 else 1
        radius = e[3] if len(e) > 3 else 1.0
        outs.append(LawOutcome(prob, zeta, int(nu), float(radius)))
    law = StepLaw(tuple(outs))
    if require_envelope and law.envelope_delta() <= 0:
        raise ValueError("law violates the stretched-exponential envelope")
    return law


NAMED_LAWS: dict[str, Callable[[], StepLaw]] = {
    "srw": lambda: make_law([("1/2", 1), ("1/2", -1)]),
    "lazy": lambda: make_law([("1/4", 1), ("1/4", -1), ("1/2", 0)]),
    "up": lambda: make_law([(1, 1)]),
    "zero": lambda: make_law([(1, 0)]),
    "drift34": lambda: make_law([("3/4", 1), ("1/4", -1)]),
}


def parse_law(text: str) -> StepLaw:
    """Named law or literal ``p:zeta[,nu[,R]];p:zeta...``."""
    if text in NAMED_LAWS:
        return NAMED_LAWS[text]()
    entries = []
    for chunk in text.split(";"):
        prob_s, _, rest = chunk.partition(":")
        if not rest:
            raise ValueError(f"bad law outcome {chunk!r}")
        parts = rest.split(",")
        zeta = float(parts[0]) if "." in parts[0] else int(parts[0])
        nu = int(parts[1]) if len(parts) > 1 else 1
        rad = float(parts[2]) if len(parts) > 2 else 1.0
        entries.append((Fraction(prob_s), zeta, nu, rad))
    return make_law(entries)


@dataclass(frozen=True)
class LookAroundWalk:
    law: StepLaw
    s0: float = 0.0


@dataclass
class WalkPath:
    """One sampled trajectory: S_0..S_h, radii R_1..R_{h+1}, times T_0..T_h."""

    positions: np.ndarray
    radii: np.ndarray
    times: np.ndarray


def _law_tables(law: StepLaw):
    k = len(law.outcomes)
    cum = np.empty(k)
    acc = Fraction(0) if law.is_exact else 0.0
    zeta = np.empty(k)
    nu = np.empty(k, dtype=np.int64)
    rad = np.empty(k)
    for j, o in enumerate(law.outcomes):
        acc = acc + o.probability
        cum[j] = float(acc)
        zeta[j] = float(o.zeta)
        nu[j] = int(o.nu)
        rad[j] = float(o.radius)
    if law.integer_zeta:
        zeta = zeta.astype(np.int64)
    return cum, zeta, nu, rad


def _branches(law_cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    b = (law_cum[(None,) * u.ndim] <= u[..., None]).sum(-1)
    return np.minimum(b, len(law_cum) - 1)


def sample_walk(w: LookAroundWalk, horizon: int, seed_root: int,
                trial: int = 0, walk_id: int = 0) -> WalkPath:
    """Deterministic single path: draw indices are (seed_root, trial, walk_id, step)."""
    cum, zeta, nu, rad = _law_tables(w.law)
    u = streams.uniforms(seed_root, np.int64(trial), np.int64(walk_id),
                         np.arange(horizon + 1, dtype=np.int64))
    b = _branches(cum, u)
    S = np.empty(horizon + 1, dtype=zeta.dtype)
    S[0] = w.s0
    if horizon:
        S[1:] = w.s0 + np.cumsum(zeta[b[:-1]])
    T = np.zeros(horizon + 1, dtype=np.int64)
    if horizon:
        T[1:] = np.cumsum(nu[b[:-1]])
    return WalkPath(S, rad[b], T)


def _sample_block(law_tables, root_seed, trials_idx, walk_id, t0, B, s_prev):
    """Positions after steps t0+1..t0+B plus the radii paired with those steps.

    Returns (S_block, R_block, b) where S_block[:, k] = S_{t0+k+1} and
    R_block[:, k] = R_{t0+k+1}; s_prev is updated by the caller from
    S_block[:, -1].
    """
    cum, zeta, nu, rad = law_tables
    u = streams.uniforms(root_seed, trials_idx[:, None], np.int64(walk_id),
                         t0 + np.arange(B, dtype=np.int64)[None, :])
    b = _branches(cum, u)
    S = s_prev[:, None] + np.cumsum(zeta[b], axis=1)
    return S, rad[b], b


# ---------------------------------------------------------------------------
# exact dynamic-programming oracles


def _exact_outcomes(law: StepLaw):
    if not law.integer_zeta:
        raise PreconditionError("the exact oracle requires integer displacements")
    outs = []
    total = Fraction(0)
    for o in law.outcomes:
        p = o.probability if isinstance(o.probability, Fraction) else Fraction(o.probability)
        total += p
        outs.append((p, int(o.zeta), int(o.nu), Fraction(o.radius).limit_denominator(10**9)))
    if total != 1:
        raise PreconditionError("exact oracle needs probabilities summing exactly to 1")
    return outs


def _budget_check(law: StepLaw, horizon: int, factor: int = 1) -> None:
    span = max(1, int(max(abs(float(o.zeta)) for o in law.outcomes)))
    cells = (2 * span * horizon + 1) * max(horizon, 1) * len(law.outcomes) * factor
    if cells > _DP_CELL_BUDGET:
        raise BudgetExceededError(f"DP would touch ~{cells} cells")


def _dp_survival_radius(law: StepLaw, s0: int, horizon: int, cond) -> Fraction:
    """P(for all n in [0, horizon]: not cond(S_n, R_{n+1})).

    The check at time n is paired with the radius of the outcome performing
    step n+1, including one final unmoved draw at n = horizon.
    """
    _budget_check(law, horizon + 1)
    outs = _exact_outcomes(law)
    dist = {int(s0): Fraction(1)}
    for _ in range(horizon):
        new: dict[int, Fraction] = defaultdict(Fraction)
        for s, w in dist.items():
            for p, z, _nu, r in outs:
                if not cond(s, r):
                    new[s + z] += w * p
        dist = new
        if not dist:
            return Fraction(0)
    total = Fraction(0)
    for s, w in dist.items():
        for p, _z, _nu, r in outs:
            if not cond(s, r):
                total += w * p
    return total


def _dp_survival_position(law: StepLaw, s0: int, horizon: int, cond,
                          check_from: int = 0) -> Fraction:
    """P(for all n in [check_from, horizon]: not cond(S_n))."""
    _budget_check(law, horizon + 1)
    outs = _exact_outcomes(law)
    dist = {int(s0): Fraction(1)}
    for n in range(horizon):
        filtered = dist if n < check_from else \
            {s: w for s, w in dist.items() if not cond(s)}
        new: dict[int, Fraction] = defaultdict(Fraction)
        for s, w in filtered.items():
            for p, z, _nu, _r in outs:
                new[s + z] += w * p
        dist = new
        if not dist:
            return Fraction(0)
    return sum((w for s, w in dist.items() if horizon < check_from or not cond(s)),
               Fraction(0))


def oracle_exact_hit_survival(law: StepLaw, s0: int, target: int, horizon: int) -> Fraction:
    """P(S_n != target for all n <= horizon)."""
    return _dp_survival_position(law, s0, horizon, lambda s: s == target)


def oracle_lookaround_survival(law: StepLaw, s0: int, target: int, horizon: int) -> Fraction:
    """P(|S_n - target| > R_{n+1} for all n <= horizon)."""
    return _dp_survival_radius(law, s0, horizon, lambda s, r: abs(s - target) <= r)


def oracle_reach_survival(law: StepLaw, s0: int, x: int, horizon: int) -> Fraction:
    """P(S_n + R_{n+1} < x for all n <= horizon)."""
    return _dp_survival_radius(law, s0, horizon, lambda s, r: s + r >= x)


def oracle_interval_survival(law: StepLaw, s0: int, lo: int, hi: int, horizon: int) -> Fraction:
    """P(dist(S_n, [lo, hi]) > R_{n+1} for all n <= horizon)."""
    if hi < lo:
        raise ValueError("empty interval")

    def cond(s, r):
        d = lo - s if s < lo else (s - hi if s > hi else 0)
        return d <= r

    return _dp_survival_radius(law, s0, horizon, cond)


def oracle_exit_survival(law: StepLaw, s0: int, rho: int, horizon: int) -> Fraction:
    """P(tau_rho > horizon) with the exit set chosen by the drift sign."""
    drift = law.mean_zeta
    if float(drift) == 0:
        cond = lambda s: abs(s) > rho
    elif float(drift) > 0:
        cond = lambda s: s > rho
    else:
        cond = lambda s: s < -rho
    return _dp_survival_position(law, s0, horizon, cond)


def oracle_position_probability(law: StepLaw, s0: int, horizon: int, y: int) -> Fraction:
    """P(S_horizon = y)."""
    _budget_check(law, horizon + 1)
    outs = _exact_outcomes(law)
    dist = {int(s0): Fraction(1)}
    for _ in range(horizon):
        new: dict[int, Fraction] = defaultdict(Fraction)
        for s, w in dist.items():
            for p, z, _nu, _r in outs:
                new[s + z] += w * p
        dist = new
    return dist.get(int(y), Fraction(0))


def _difference_law(law1: StepLaw, law2: StepLaw, sum_radii: bool) -> StepLaw:
    if not (law1.unit_time and law2.unit_time):
        raise PreconditionError("two-walk oracles need unit-time laws")
    outs = []
    for o1 in law1.outcomes:
        for o2 in law2.outcomes:
            p1 = o1.probability if isinstance(o1.probability, Fraction) else Fraction(o1.probability)
            p2 = o2.probability if isinstance(o2.probability, Fraction) else Fraction(o2.probability)
            r = float(o1.radius) + float(o2.radius) if sum_radii else 1.0
            outs.append(LawOutcome(p1 * p2, o1.zeta - o2.zeta, 1, max(r, 1.0)))
    return StepLaw(tuple(outs))


def oracle_meeting_survival(law1: StepLaw, law2: StepLaw, s01: int, s02: int,
                            horizon: int) -> Fraction:
    """P(S1_n != S2_n for all 1 <= n <= horizon) for independent unit-time walks."""
    diff = _difference_law(law1, law2, sum_radii=False)
    return _dp_survival_position(diff, s01 - s02, horizon, lambda s: s == 0,
                                 check_from=1)


def oracle_ball_meeting_survival(law1: StepLaw, law2: StepLaw, s01: int, s02: int,
                                 horizon: int) -> Fraction:
    """P(|S1_n - S2_n| > R1_{n+1} + R2_{n+1} for all n <= horizon)."""
    diff = _difference_law(law1, law2, sum_radii=True)
    return _dp_survival_radius(diff, s01 - s02, horizon, lambda s, r: abs(s) <= r)


_EVENT_ORACLES = {
    "hit": lambda law, s0, horizon, arg: oracle_exact_hit_survival(law, s0, int(arg), horizon),
    "lookaround": lambda law, s0, horizon, arg: oracle_lookaround_survival(law, s0, int(arg), horizon),
    "reach": lambda law, s0, horizon, arg: oracle_reach_survival(law, s0, int(arg), horizon),
    "exit": lambda law, s0, horizon, arg: oracle_exit_survival(law, s0, int(arg), horizon),
    "position": lambda law, s0, horizon, arg: oracle_position_probability(law, s0, horizon, int(arg)),
}


def exact_dp_oracle(law: StepLaw, s0: int, horizon: int, event: str,
                    law2: StepLaw | None = None, s02: int | None = None) -> Fraction:
    """Dispatch an event spec like ``hit:3``, ``reach:10``, ``meeting``.

    Single-walk events: hit, lookaround, reach, exit, position (survival
    forms; ``position`` is a point probability).  With a second law,
    ``meeting`` and ``ballmeeting`` act on the difference walk.
    """
    name, _, arg = event.partition(":")
    if name in ("meeting", "ballmeeting"):
        if law2 is None or s02 is None:
            raise ValueError(f"event {name!r} needs a second walk")
        fn = oracle_meeting_survival if name == "meeting" else oracle_ball_meeting_survival
        return fn(law, law2, s0, s02, horizon)
    if name not in _EVENT_ORACLES:
        raise ValueError(f"unknown oracle event {name!r}")
    if not arg:
        raise ValueError(f"event {name!r} needs an argument, e.g. {name}:3")
    return _EVENT_ORACLES[name](law, s0, horizon, arg)


# ---------------------------------------------------------------------------
# Monte-Carlo event estimation


def mc_event_frequency(law: StepLaw, s0: int, horizon: int, event: str,
                       trials: int, root_seed: int, law2: StepLaw | None = None,
                       s02: int | None = None) -> float:
    """Empirical frequency of the oracle events, using the same conventions."""
    name, _, arg = event.partition(":")
    hits = 0
    tables1 = _law_tables(law)
    tables2 = _law_tables(law2) if law2 is not None else None
    for start in range(0, trials, _CHUNK):
        n = min(_CHUNK, trials - start)
        idx = np.arange(start, start + n, dtype=np.int64)
        u1 = streams.uniforms(root_seed, idx[:, None], np.int64(0),
                              np.arange(horizon + 1, dtype=np.int64)[None, :])
        b1 = _branches(tables1[0], u1)
        Z1 = tables1[1][b1]
        R1 = tables1[3][b1]
        S1 = np.empty((n, horizon + 1))
        S1[:, 0] = s0
        if horizon:
            S1[:, 1:] = s0 + np.cumsum(Z1[:, :-1], axis=1)
        if name in ("meeting", "ballmeeting"):
            u2 = streams.uniforms(root_seed, idx[:, None], np.int64(1),
                                  np.arange(horizon + 1, dtype=np.int64)[None, :])
            b2 = _branches(tables2[0], u2)
            Z2 = tables2[1][b2]
            R2 = tables2[3][b2]
            S2 = np.empty((n, horizon + 1))
            S2[:, 0] = s02
            if horizon:
                S2[:, 1:] = s02 + np.cumsum(Z2[:, :-1], axis=1)
            if name == "meeting":
                ok = (S1[:, 1:] != S2[:, 1:]).all(axis=1)
            else:
                ok = (np.abs(S1 - S2) > R1 + R2).all(axis=1)
            hits += int(ok.sum())
            continue
        target = int(arg)
        if name == "hit":
            ok = (S1 != target).all(axis=1)
        elif name == "lookaround":
            ok = (np.abs(S1 - target) > R1).all(axis=1)
        elif name == "reach":
            ok = (S1 + R1 < target).all(axis=1)
        elif name == "exit":
            drift = float(law.mean_zeta)
            if drift == 0:
                inside = np.abs(S1) <= target
            elif drift > 0:
                inside = S1 <= target
            else:
                inside = S1 >= -target
            ok = inside.all(axis=1)
        elif name == "position":
            ok = S1[:, horizon] == target
        else:
            raise ValueError(f"unknown event {name!r}")
        hits += int(ok.sum())
    return hits / trials


# ---------------------------------------------------------------------------
# check results


@dataclass
class CheckResult:
    check: str
    passed: bool
    params: dict
    seed: int
    estimate: float | None = None
    ci: tuple[float, float] | None = None
    fit: TailFit | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "lemma": self.check,
            "parameters": self.params,
            "estimate": self.estimate,
            "CI": None if self.ci is None else [self.ci[0], self.ci[1]],
            "fit": None if self.fit is None else self.fit.to_json(),
            "verdict": "PASS" if self.passed else "FAIL",
            "seed": self.seed,
            "details": self.details,
        }


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise PreconditionError(message)


# ---------------------------------------------------------------------------
# drifted walks escape backward targets


def check_escape_under_drift(w: LookAroundWalk, x: float, trials: int = 20000,
                             horizon: int = 2048, root_seed: int = 0) -> CheckResult:
    """Estimate P(the walk never comes within look distance of x).

    Requires positive drift and a target behind the start.  PASS means the
    95% interval excludes zero and the estimate is stable under doubling
    the horizon (the probability of a late first approach is negligible).
    """
    drift = w.law.mean_zeta
    _require(float(drift) > 0, "escape check requires E[zeta] > 0")
    _require(x < w.s0, "escape check requires a target x < s0")
    tables = _law_tables(w.law)
    h2 = 2 * horizon
    alive_h = 0
    alive_2h = 0
    block = 512
    for start in range(0, trials, _CHUNK):
        n = min(_CHUNK, trials - start)
        idx = np.arange(start, start + n, dtype=np.int64)
        s_prev = np.full(n, float(w.s0))
        alive = np.ones(n, dtype=bool)
        at_h = None
        t0 = 0
        while t0 <= h2:
            # never straddle the horizon boundary: the half-horizon snapshot
            # must be taken after exactly horizon+1 checks
            limit = horizon + 1 if t0 <= horizon else h2 + 1
            B = min(block, limit - t0)
            S_blk, R_blk, _ = _sample_block(tables, root_seed, idx, 0, t0, B, s_prev)
            # check at times t0..t0+B-1 pairs (S_n, R_{n+1})
            S_check = np.concatenate([s_prev[:, None], S_blk[:, :-1]], axis=1)
            ok = np.abs(S_check - x) > R_blk
            alive &= ok.all(axis=1)
            s_prev = S_blk[:, -1].astype(float)
            t0 += B
            if at_h is None and t0 == horizon + 1:
                at_h = alive.copy()
        alive_h += int(at_h.sum())
        alive_2h += int(alive.sum())
    est_h = alive_h / trials
    est_2h = alive_2h / trials
    lo, hi = wilson_interval(alive_2h, trials)
    passed = lo > 0 and (est_h - est_2h) < max(hi - lo, 1e-12)
    return CheckResult(
        "escape-under-drift", passed,
        {"x": x, "s0": w.s0, "trials": trials, "horizon": horizon},
        root_seed, estimate=est_2h, ci=(lo, hi),
        details={"estimate_at_horizon": est_h, "estimate_at_double_horizon": est_2h})


# ---------------------------------------------------------------------------
# zero-drift reach-time tail


def _restrict(curve: SurvivalCurve, u_min: float) -> SurvivalCurve:
    keep = curve.thresholds >= u_min
    return SurvivalCurve(curve.thresholds[keep], curve.survivors[keep],
                         curve.total, curve.censor_cap)


def check_zero_drift_reach_tail(w: LookAroundWalk, x: float, trials: int = 30000,
                                cap: int = 1 << 14, root_seed: int = 0,
                                x_offsets: Sequence[float] = (2, 4, 6, 8),
                                slope_tol: float = 0.07,
                                r2_min: float = 0.95) -> CheckResult:
    """Tail of the first time S_n + R_{n+1} reaches level x, for E[zeta] = 0.

    Fits a power law on dyadic thresholds from the asymptotic window
    u >= 2 (x - s0)^2 upward (below it the curve still carries the
    distance-to-level transient).  PASS requires slope -1/2 within
    tolerance, fit quality, and survival at a deep common threshold scaling
    linearly across the offset grid.  Also reports the smallest offset at
    which the -1/2 law already holds, and the dyadic tail-mass blocks whose
    growth signals a divergent mean.
    """
    drift = w.law.mean_zeta
    _require(float(drift) == 0, "reach-tail check requires E[zeta] = 0")
    offsets = sorted(set(float(o) for o in x_offsets) | {float(x) - float(w.s0)})
    _require(all(o > 0 for o in offsets), "offsets must be positive")
    levels = np.array([w.s0 + o for o in offsets])
    tables = _law_tables(w.law)
    T = np.full((trials, len(levels)), cap + 1, dtype=np.int64)
    block = 1024
    for start in range(0, trials, _CHUNK):
        n = min(_CHUNK, trials - start)
        idx = np.arange(start, start + n, dtype=np.int64)
        s_prev = np.full(n, float(w.s0))
        t0 = 0
        Tc = T[start:start + n]
        while t0 <= cap:
            B = min(block, cap + 1 - t0)
            S_blk, R_blk, _ = _sample_block(tables, root_seed, idx, 0, t0, B, s_prev)
            S_check = np.concatenate([s_prev[:, None], S_blk[:, :-1]], axis=1)
            w_vals = S_check + R_blk
            for k, level in enumerate(levels):
                unset = Tc[:, k] > cap
                if not unset.any():
                    continue
                reach = w_vals >= level
                has = reach.any(axis=1) & unset
                if has.any():
                    Tc[has, k] = t0 + reach[has].argmax(axis=1)
            s_prev = S_blk[:, -1].astype(float)
            t0 += B
            if (Tc <= cap).all():
                break
    main_k = offsets.index(float(x) - float(w.s0))
    curves = [SurvivalCurve.from_samples(T[:, k], cap) for k in range(len(levels))]
    main_curve = curves[main_k]

    def asymptotic_fit(curve, offset):
        fitted = _restrict(curve, 2.0 * offset * offset)
        if fitted.thresholds.size < 4:
            fitted = curve
        return fit_tail(fitted, "power")

    try:
        fit = asymptotic_fit(main_curve, offsets[main_k])
    except InsufficientDataError:
        return CheckResult("zero-drift-reach-tail", False,
                           {"x": x, "trials": trials, "cap": cap}, root_seed,
                           details={"reason": "insufficient tail data"})
    slope_ok = abs(fit.slope + 0.5) <= slope_tol
    r2_ok = fit.r_squared >= r2_min

    # linear scaling of survival in the offset, read at a deep common threshold
    probe_u = None
    for u in reversed(main_curve.thresholds):
        col = [c.survivors[list(c.thresholds).index(u)] for c in curves]
        if all(s >= 30 for s in col):
            probe_u = int(u)
            probe = np.array([s / trials for s in col])
            break
    if probe_u is None:
        scaling_ok = False
        scaling_r2 = 0.0
    else:
        xs = np.array(offsets)
        A = np.stack([xs, np.ones_like(xs)], axis=1)
        coef, *_ = np.linalg.lstsq(A, probe, rcond=None)
        resid = probe - A @ coef
        ss_tot = float(((probe - probe.mean()) ** 2).sum())
        scaling_r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
        scaling_ok = scaling_r2 >= 0.85 and coef[0] > 0

    r_estimate = None
    for k, off in enumerate(offsets):
        try:
            f = asymptotic_fit(curves[k], off)
        except InsufficientDataError:
            continue
        if abs(f.slope + 0.5) <= slope_tol and f.r_squared >= r2_min:
            r_estimate = off
            break

    probs = main_curve.probabilities()
    tail_blocks = [float(p) * int(u) for p, u in zip(probs, main_curve.thresholds)]

    passed = slope_ok and r2_ok and scaling_ok
    return CheckResult(
        "zero-drift-reach-tail", passed,
        {"x": x, "trials": trials, "cap": cap, "offsets": offsets},
        root_seed, estimate=fit.slope, fit=fit,
        details={"scaling_r2": scaling_r2, "probe_threshold": probe_u,
                 "r_estimate": r_estimate, "tail_mass_blocks": tail_blocks,
                 "offset_survival_at_probe": None if probe_u is None else probe.tolist()})


# ---------------------------------------------------------------------------
# interval exit times


def check_exit_time_tail(w: LookAroundWalk, rho: float, trials: int = 20000,
                         root_seed: int = 0, u_max: int | None = None,
                         n_points: int = 12) -> CheckResult:
    """Exponential tail of the first exit past distance rho.

    The exit set follows the drift sign: two-sided for centered walks,
    one-sided in the drift direction otherwise.  PASS needs a negative
    slope on semi-log axes with fit quality at least 0.95.
    """
    _require(not w.law.zeta_identically_zero,
             "exit-time check requires P(zeta = 0) < 1")
    drift = float(w.law.mean_zeta)
    if u_max is None:
        u_max = max(64, int(8 * max(1.0, rho) ** 2))
    tables = _law_tables(w.law)
    tau = np.full(trials, u_max + 1, dtype=np.int64)
    block = 512
    for start in range(0, trials, _CHUNK):
        n = min(_CHUNK, trials - start)
        idx = np.arange(start, start + n, dtype=np.int64)
        s_prev = np.full(n, float(w.s0))
        t0 = 0
        tc = tau[start:start + n]
        if drift == 0:
            out0 = abs(float(w.s0)) > rho
        elif drift > 0:
            out0 = float(w.s0) > rho
        else:
            out0 = float(w.s0) < -rho
        if out0:
            tc[:] = 0
            continue
        while t0 < u_max:
            B = min(block, u_max - t0)
            S_blk, _, _ = _sample_block(tables, root_seed, idx, 0, t0, B, s_prev)
            if drift == 0:
                outside = np.abs(S_blk) > rho
            elif drift > 0:
                outside = S_blk > rho
            else:
                outside = S_blk < -rho
            unset = tc > u_max
            has = outside.any(axis=1) & unset
            if has.any():
                tc[has] = t0 + 1 + outside[has].argmax(axis=1)
            s_prev = S_blk[:, -1].astype(float)
            t0 += B
            if (tc <= u_max).all():
                break
    grid = np.unique(np.linspace(1, u_max, n_points).astype(np.int64))
    counts = (tau[None, :] > grid[:, None]).sum(axis=1).astype(np.float64)
    curve = SurvivalCurve(grid, counts, float(trials), censor_cap=u_max)
    mean_exit = float(np.minimum(tau, u_max).mean())
    try:
        fit = fit_tail(curve, "exponential")
    except InsufficientDataError:
        return CheckResult("exit-time-tail", False,
                           {"rho": rho, "trials": trials, "u_max": u_max},
                           root_seed,
                           details={"reason": "insufficient tail data",
                                    "mean_exit": mean_exit,
                                    "curve": curve.to_json()})
    passed = fit.slope < 0 and fit.r_squared >= 0.95
    return CheckResult("exit-time-tail", passed,
                       {"rho": rho, "trials": trials, "u_max": u_max},
                       root_seed, estimate=fit.slope, fit=fit,
                       details={"mean_exit": mean_exit})


# ---------------------------------------------------------------------------
# upper deviations of a centered walk


def check_upper_deviation_bound(w: LookAroundWalk, mu: float, n: int, y: float,
                                trials: int = 100000, root_seed: int = 0) -> CheckResult:
    """Empirical P(S_n >= y) against the optimized exponential-moment bound.

    The bound exp(min_t [n log E e^(t zeta) - t y]) is computed from the
    law's exact moment generating function; PASS means the frequency does
    not exceed it.
    """
    _require(float(w.law.mean_zeta) == 0, "deviation check requires E[zeta] = 0")
    _require(float(w.s0) == 0, "deviation check requires s0 = 0")
    _require(mu > 0, "mu must be positive")
    _require(y >= mu * n, "requires y >= mu * n")
    logp = np.log([float(o.probability) for o in w.law.outcomes])
    zs = np.array([float(o.zeta) for o in w.law.outcomes])

    def objective(t: float) -> float:
        return n * float(logsumexp(logp + t * zs)) - t * y

    zmax = max(1.0, float(np.abs(zs).max()))
    res = minimize_scalar(objective, bounds=(1e-9, 60.0 / zmax), method="bounded")
    bound = min(1.0, math.exp(res.fun))

    tables = _law_tables(w.law)
    count = 0
    for start in range(0, trials, _CHUNK):
        m = min(_CHUNK, trials - start)
        idx = np.arange(start, start + m, dtype=np.int64)
        u = streams.uniforms(root_seed, idx[:, None], np.int64(0),
                             np.arange(n, dtype=np.int64)[None, :])
        b = _branches(tables[0], u)
        S_n = tables[1][b].sum(axis=1)
        count += int((S_n >= y).sum())
    freq = count / trials
    lo, hi = wilson_interval(count, trials)
    return CheckResult("upper-deviation", freq <= bound,
                       {"mu": mu, "n": n, "y": y, "trials": trials},
                       root_seed, estimate=freq, ci=(lo, hi),
                       details={"chernoff_bound": bound,
                                "optimal_t": float(res.x)})


# ---------------------------------------------------------------------------
# two walks avoiding a separating corridor


def _joint_min_times_unit(w1: LookAroundWalk, w2: LookAroundWalk, lo: float, hi: float,
                          trials: int, cap: int, root_seed: int) -> np.ndarray:
    t1 = _law_tables(w1.law)
    t2 = _law_tables(w2.law)
    out = np.full(trials, cap + 1, dtype=np.int64)
    block = 512
    for start in range(0, trials, _CHUNK):
        n = min(_CHUNK, trials - start)
        idx = np.arange(start, start + n, dtype=np.int64)
        s1 = np.full(n, float(w1.s0))
        s2 = np.full(n, float(w2.s0))
        t0 = 0
        while t0 <= cap and idx.size:
            B = min(block, cap + 1 - t0)
            S1, R1, _ = _sample_block(t1, root_seed, idx, 0, t0, B, s1)
            S2, R2, _ = _sample_block(t2, root_seed, idx, 1, t0, B, s2)
            C1 = np.concatenate([s1[:, None], S1[:, :-1]], axis=1)
            C2 = np.concatenate([s2[:, None], S2[:, :-1]], axis=1)
            sigma_hit = np.abs(C1 - C2) <= R1 + R2
            d1 = np.maximum(lo - C1, C1 - hi).clip(min=0)
            d2 = np.maximum(lo - C2, C2 - hi).clip(min=0)
            any_hit = sigma_hit | (d1 <= R1) | (d2 <= R2)
            has = any_hit.any(axis=1)
            if has.any():
                out[idx[has]] = t0 + any_hit[has].argmax(axis=1)
                keep = ~has
                idx = idx[keep]
                S1, S2 = S1[keep], S2[keep]
            s1 = S1[:, -1].astype(float)
            s2 = S2[:, -1].astype(float)
            t0 += B
    return out


def _joint_min_times_general(w1: LookAroundWalk, w2: LookAroundWalk, lo: float, hi: float,
                             trials: int, cap: int, root_seed: int) -> np.ndarray:
    out = np.full(trials, cap + 1, dtype=np.int64)
    for trial in range(trials):
        t_min = cap + 1
        paths = []
        for wid, w in ((0, w1), (1, w2)):
            steps_needed = cap + 2
            path = sample_walk(w, steps_needed, root_seed, trial=trial, walk_id=wid)
            paths.append(path)
        p1, p2 = paths

        def k_of(path, m):
            return int(np.searchsorted(path.times, m, side="right") - 1)

        def interval_dist(s):
            return max(lo - s, s - hi, 0.0)

        # tau events trigger at each walk's own step times
        for path in (p1, p2):
            for k in range(len(path.times)):
                m = int(path.times[k])
                if m > cap:
                    break
                if interval_dist(float(path.positions[k])) <= float(path.radii[k]):
                    t_min = min(t_min, m)
                    break
        # sigma evaluated at merged jump times
        jumps = np.unique(np.concatenate([p1.times, p2.times, [0]]))
        for m in jumps:
            m = int(m)
            if m > cap or m >= t_min:
                break
            k1 = k_of(p1, m)
            k2 = k_of(p2, m)
            if abs(float(p1.positions[k1]) - float(p2.positions[k2])) <= \
                    float(p1.radii[k1]) + float(p2.radii[k2]):
                t_min = min(t_min, m)
                break
        out[trial] = t_min
    return out


def check_joint_corridor_avoidance(w1: LookAroundWalk, w2: LookAroundWalk,
                                   interval: tuple[float, float],
                                   trials: int = 20000, cap: int = 1 << 13,
                                   root_seed: int = 0,
                                   slope_floor: float = -1.15,
                                   fit_u_min: float | None = None) -> CheckResult:
    """Tail of min(sigma, tau1, tau2): ball contact or corridor detection.

    sigma is the first time the look-around balls intersect, tau_i the
    first time walk i detects the corridor [x, y].  All three clocks run in
    time units (step durations accumulate).  The power law is fitted from
    the asymptotic window past the initial-separation transient.  PASS
    means the fitted slope stays at or above the floor, the signature of a
    divergent mean.
    """
    lo, hi = float(interval[0]), float(interval[1])
    _require(hi - lo > 2, "corridor needs y - x > 2")
    if w1.law.unit_time and w2.law.unit_time:
        times = _joint_min_times_unit(w1, w2, lo, hi, trials, cap, root_seed)
    else:
        times = _joint_min_times_general(w1, w2, lo, hi, trials, cap, root_seed)
    curve = SurvivalCurve.from_samples(times, cap)
    if fit_u_min is None:
        d1 = max(lo - w1.s0, w1.s0 - hi, 1.0)
        d2 = max(lo - w2.s0, w2.s0 - hi, 1.0)
        fit_u_min = 2.0 * max(d1, d2) ** 2
    restricted = _restrict(curve, fit_u_min)
    if restricted.thresholds.size < 4:
        restricted = curve
    try:
        fit = fit_tail(restricted, "power")
    except InsufficientDataError:
        zero_at_one = float(curve.survivors[0]) == 0.0
        return CheckResult("joint-corridor-avoidance", False,
                           {"interval": [lo, hi], "trials": trials, "cap": cap},
                           root_seed, estimate=0.0,
                           details={"reason": "no survivors" if zero_at_one
                                    else "insufficient tail data"})
    passed = fit.slope >= slope_floor
    return CheckResult("joint-corridor-avoidance", passed,
                       {"interval": [lo, hi], "trials": trials, "cap": cap,
                        "s0": [w1.s0, w2.s0]},
                       root_seed, estimate=fit.slope, fit=fit,
                       details={"censored_fraction": float((times > cap).mean())})


CHECKS = {
    "lemma6": check_escape_under_drift,
    "escape": check_escape_under_drift,
    "lemma7": check_zero_drift_reach_tail,
    "reach-tail": check_zero_drift_reach_tail,
    "lemma17": check_exit_time_tail,
    "exit-time": check_exit_time_tail,
    "lemma50": check_upper_deviation_bound,
    "deviation": check_upper_deviation_bound,
    "prop22": check_joint_corridor_avoidance,
    "corridor": check_joint_corridor_avoidance,
}
