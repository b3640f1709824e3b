"""Meeting renewals of two-scout processes and derived diagnostics.

Sampling a two-scout trace at the times the scouts share a grid point
yields a renewal sequence (Y_k, A_k, R_k): the meeting point, the state
pair there, and the gap since the previous meeting.  The gap dominates how
far either scout strayed in between, which makes the sequence a faithful
coarse view of the joint process: diagnostics on it (gap tails, trapping,
coverage indices, divergence of hitting-time means) are packaged here as
falsifiable checks on concrete protocols, never as proofs.  Verdicts use
"consistent with" vocabulary throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from .engine import Trace, meeting_times
from .errors import PreconditionError
from .protocol import ScoutProtocol, protocol_hash
from .tails import (CensoredSummary, InsufficientDataError, SurvivalCurve,
                    TailFit, fit_tail)

FINITE_CENSORED_MAX = 0.01
FINITE_TAIL_INCREMENT_MAX = 0.01
INFINITE_SLOPE_MIN = -1.0
FIT_R2_MIN = 0.95


class EnvelopeViolation(AssertionError):
    """A trace violated the gap-dominates-excursion invariant: simulator bug."""


@dataclass
class MeetingRenewal:
    """Renewal view of one two-scout trace, sampled at meetings."""

    meeting_times: np.ndarray          # N_k, starting at N_0 = 0
    points: np.ndarray                 # Y_k, shape (K+1, d)
    state_pairs: list[tuple[str, str]]  # A_k
    gaps: np.ndarray                   # R_k = N_k - N_{k-1}, R_0 = 0

    @property
    def count(self) -> int:
        return int(self.meeting_times.size)

    def csv_rows(self) -> list[tuple]:
        rows = []
        for k in range(self.count):
            y = ",".join(str(int(v)) for v in self.points[k])
            a = "|".join(self.state_pairs[k])
            rows.append((k, y, a, int(self.gaps[k])))
        return rows


def extract_renewal(t: Trace, pair: tuple[int, int] | None = None) -> MeetingRenewal:
    """Meetings of a two-scout trace, with the envelope invariant enforced.

    For every k and every n between consecutive meetings, each watched
    scout's sup-norm distance to both endpoints Y_{k-1} and Y_k must be at
    most the gap R_k; a violation raises EnvelopeViolation (it cannot
    happen under unit moves and indicates a corrupted trace).

    A trace with more than two scouts needs an explicit ``pair`` of 1-based
    scout indices to watch; for two scouts the pair defaults to (1, 2).
    """
    c = t.positions.shape[1]
    if pair is None:
        if c != 2:
            raise ValueError("renewal extraction needs a two-scout trace "
                             "(or an explicit scout pair)")
        pair = (1, 2)
    i, j = pair[0] - 1, pair[1] - 1
    if not (0 <= i < c and 0 <= j < c and i != j):
        raise ValueError(f"bad scout pair {pair} for {c} scouts")
    eq = (t.positions[:, i, :] == t.positions[:, j, :]).all(axis=1)
    eq[0] = True
    times = np.flatnonzero(eq).astype(np.int64)
    pts = t.positions[times, i, :]
    names = t.protocol.state_names
    pairs = [(names[t.state_idx[n, i]], names[t.state_idx[n, j]]) for n in times]
    gaps = np.zeros(times.size, dtype=np.int64)
    gaps[1:] = np.diff(times)
    watched = t.positions[:, (i, j), :]
    for k in range(1, times.size):
        seg = watched[times[k - 1]:times[k] + 1]  # (len, 2, d)
        for endpoint in (pts[k - 1], pts[k]):
            dist = np.abs(seg - endpoint[None, None, :]).max(axis=2)
            if int(dist.max()) > gaps[k]:
                raise EnvelopeViolation(
                    f"scout strayed {int(dist.max())} > gap {int(gaps[k])} "
                    f"between meetings {k-1} and {k}")
    return MeetingRenewal(times, pts, pairs, gaps)


# ---------------------------------------------------------------------------
# gap tails


@dataclass
class MeetingTailResult:
    curve: SurvivalCurve | None
    fit: TailFit | None
    passed: bool
    verdict: str
    n_gaps: int
    fitted_decay: float | None
    protocol_hash: str
    root_seed: int

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "passed": self.passed,
            "n_gaps": self.n_gaps,
            "fitted_decay": self.fitted_decay,
            "fit": None if self.fit is None else self.fit.to_json(),
            "curve": None if self.curve is None else self.curve.to_json(),
            "protocol_hash": self.protocol_hash,
            "seed": self.root_seed,
        }


def meeting_tail(p: ScoutProtocol, k_range: tuple[int, int] = (1, 64),
                 trials: int = 2000, cap: int = 1 << 14,
                 root_seed: int = 0, r2_min: float = FIT_R2_MIN) -> MeetingTailResult:
    """Fit of the inter-meeting gap tail in sqrt(u) coordinates.

    Gaps with meeting index k in ``k_range`` are pooled across replicas.
    PASS means the log-survival is well described by a line in sqrt(u)
    (quality >= 0.95): consistent with a stretched-exponential or faster
    gap decay.  Heavier (power-law) gap tails bend the plot and fail.  When
    no meeting beyond time 0 occurs in any replica, the result reports that
    as evidence against frequent meetings instead of a fit.
    """
    from .engine import meeting_gap_samples

    if p.scouts != 2:
        raise PreconditionError("meeting tails need a two-scout protocol")
    gaps = meeting_gap_samples(p, trials, cap, root_seed,
                               k_min=k_range[0], k_max=k_range[1])
    phash = protocol_hash(p)
    if gaps.size == 0:
        return MeetingTailResult(None, None, False, "no-meetings-within-cap",
                                 0, None, phash, root_seed)
    curve = SurvivalCurve.from_samples(gaps, cap)
    try:
        fit = fit_tail(curve, "stretched")
    except InsufficientDataError:
        return MeetingTailResult(curve, None, False, "insufficient-gap-data",
                                 int(gaps.size), None, phash, root_seed)
    passed = fit.r_squared >= r2_min and fit.slope < 0
    verdict = ("consistent with stretched-exponential gap decay" if passed
               else "not consistent with stretched-exponential gap decay")
    return MeetingTailResult(curve, fit, passed, verdict, int(gaps.size),
                             -fit.slope, phash, root_seed)


# ---------------------------------------------------------------------------
# trapping


@dataclass
class TrapReport:
    found: bool
    settle_index: int | None = None
    center: tuple[int, ...] | None = None
    radius: int | None = None
    horizon: int = 0

    def to_json(self) -> dict:
        return {"found": self.found, "settle_index": self.settle_index,
                "center": None if self.center is None else list(self.center),
                "radius": self.radius, "horizon": self.horizon}


def trap_detect(positions: np.ndarray, r_grid: list[int] | None = None) -> TrapReport:
    """Smallest grid radius and earliest index confining the whole suffix.

    Scans radii in ascending order; for each, the earliest settle index is
    found from suffix coordinate extrema (linear time).  Confinement only
    counts as trapping when the suffix outlasts the crossing time of the
    box it actually fills (at least 2*spread+2 steps): the tail of any path
    fits in a ball vacuously, which is evidence of nothing.  found at
    radius r implies found at any larger radius with an earlier-or-equal
    settle index.
    """
    positions = np.asarray(positions)
    if positions.ndim == 1:
        positions = positions[:, None]
    if positions.size == 0:
        raise ValueError("empty position sequence")
    if r_grid is None:
        r_grid = [1 << j for j in range(11)]
    n = positions.shape[0]
    suf_max = np.maximum.accumulate(positions[::-1], axis=0)[::-1]
    suf_min = np.minimum.accumulate(positions[::-1], axis=0)[::-1]
    spread = np.maximum(suf_max - positions, positions - suf_min).max(axis=1)
    remaining = (n - 1) - np.arange(n)
    dwells = np.maximum(2 * spread + 2, 8)
    qualifies = remaining >= dwells
    for r in sorted(r_grid):
        ok = (spread < r) & qualifies
        if ok.any():
            tau = int(np.argmax(ok))
            return TrapReport(True, tau, tuple(int(v) for v in positions[tau]),
                              int(r), n - 1)
    return TrapReport(False, horizon=n - 1)


# ---------------------------------------------------------------------------
# explorer coverage


def explorer_cover_time(mr: MeetingRenewal, x) -> int | None:
    """First k with |Y_k - x| <= R_{k+1} in sup norm; None when censored.

    Only k up to the second-to-last renewal is decidable (the test needs
    the following gap).  Enlarging the renewal never increases the result.
    """
    if mr.count == 0:
        raise PreconditionError("empty renewal")
    x = np.asarray(x, dtype=np.int64)
    usable = mr.count - 1
    if usable <= 0:
        return None
    dist = np.abs(mr.points[:usable] - x[None, :]).max(axis=1)
    hits = dist <= mr.gaps[1:usable + 1]
    if not hits.any():
        return None
    return int(np.argmax(hits))


# ---------------------------------------------------------------------------
# divergence flag


FINITE = "finite-mean-consistent"
INFINITE = "infinite-mean-consistent"
INCONCLUSIVE = "inconclusive"


def divergence_flag(curve: SurvivalCurve | CensoredSummary) -> str:
    """Classify a stopping-time tail as finite- or infinite-mean consistent.

    Finite: censoring below 1% and the last threshold-doubling adds less
    than 1% to the accumulated tail mass (the mean estimate has stopped
    moving).  Infinite: a good power-law fit with slope >= -1, whose tail
    integral diverges.  Anything else is inconclusive.
    """
    if isinstance(curve, CensoredSummary):
        curve = curve.curve
    if curve.total <= 0:
        raise InsufficientDataError("empty survival curve")
    probs = curve.probabilities()
    censored_frac = float(probs[-1]) if curve.censor_cap is not None else 0.0
    blocks = probs * curve.thresholds
    total_mass = float(blocks.sum())
    last_increment = float(blocks[-1]) / total_mass if total_mass > 0 else 0.0
    if censored_frac < FINITE_CENSORED_MAX and last_increment < FINITE_TAIL_INCREMENT_MAX:
        return FINITE
    try:
        fit = fit_tail(curve, "power")
    except InsufficientDataError:
        return INCONCLUSIVE
    if fit.slope >= INFINITE_SLOPE_MIN - 1e-12 and fit.r_squared >= FIT_R2_MIN:
        return INFINITE
    return INCONCLUSIVE


def divergence_report(curve: SurvivalCurve | CensoredSummary) -> dict:
    summary = curve if isinstance(curve, CensoredSummary) else None
    c = curve.curve if isinstance(curve, CensoredSummary) else curve
    verdict = divergence_flag(c)
    probs = c.probabilities()
    blocks = probs * c.thresholds
    body = {
        "verdict": verdict,
        "censored_fraction": float(probs[-1]),
        "tail_mass_last_increment": float(blocks[-1] / blocks.sum()) if blocks.sum() > 0 else 0.0,
    }
    try:
        fit = fit_tail(c, "power")
        body["power_fit"] = fit.to_json()
    except InsufficientDataError:
        body["power_fit"] = None
    if summary is not None:
        body["mean"] = summary.mean
        body["mean_is_lower_bound"] = summary.mean_is_lower_bound
    return body


# ---------------------------------------------------------------------------
# homogeneity of the renewal chain


def _bucket_gap(r: int) -> int:
    return min(int(r).bit_length(), 6)


def _bucket_move(dy: np.ndarray) -> int:
    return min(int(np.abs(dy).max()), 3)


def markov_homogeneity(mrs: list[MeetingRenewal], min_expected: float = 5.0) -> float:
    """p-value of early-vs-late homogeneity of the renewal transition law.

    For each state pair A_k, the empirical law of (Y_{k+1}-Y_k, A_{k+1},
    R_{k+1}) over the first half of indices is compared with the second
    half by a pooled chi-square; cells with small expectation are merged.
    A small p-value indicates the conditional law drifts with k, which the
    homogeneity of the underlying process forbids.
    """
    table: dict[tuple, dict[tuple, list[int]]] = {}
    for mr in mrs:
        K = mr.count
        for k in range(K - 1):
            half = 0 if k < (K - 1) / 2 else 1
            cond = mr.state_pairs[k]
            out = (_bucket_move(mr.points[k + 1] - mr.points[k]),
                   mr.state_pairs[k + 1], _bucket_gap(int(mr.gaps[k + 1])))
            cell = table.setdefault(cond, {}).setdefault(out, [0, 0])
            cell[half] += 1
    stat = 0.0
    dof = 0
    for cond, outcomes in table.items():
        counts = np.array([v for v in outcomes.values()], dtype=np.float64)
        if counts.sum() < 2 * min_expected or counts.shape[0] < 2:
            continue
        col = counts.sum(axis=0)
        if (col == 0).any():
            continue
        # merge rows whose expected counts fall short
        order = np.argsort(counts.sum(axis=1))
        merged = []
        acc = np.zeros(2)
        total = counts.sum()
        for i in order:
            acc = acc + counts[i]
            expected = acc.sum() * col / total
            if (expected >= min_expected).all():
                merged.append(acc.copy())
                acc = np.zeros(2)
        if merged and acc.sum() > 0:
            merged[-1] += acc
        counts = np.array(merged)
        if counts.shape[0] < 2:
            continue
        row = counts.sum(axis=1, keepdims=True)
        colf = counts.sum(axis=0, keepdims=True)
        expected = row * colf / counts.sum()
        mask = expected > 0
        stat += float((((counts - expected) ** 2)[mask] / expected[mask]).sum())
        dof += (counts.shape[0] - 1) * (counts.shape[1] - 1)
    if dof == 0:
        return 1.0
    return float(chi2.sf(stat, dof))
