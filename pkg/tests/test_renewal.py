"""Meeting renewals, gap tails, traps, coverage, divergence verdicts."""

import numpy as np
import pytest

from scoutsim import SeedSpec, builtin, parse_protocol, run
from scoutsim.engine import first_meeting_times, monte_carlo_hitting
from scoutsim.errors import PreconditionError
from scoutsim.renewal import (FINITE, INFINITE,
                              EnvelopeViolation, MeetingRenewal,
                              divergence_flag, divergence_report,
                              explorer_cover_time, extract_renewal,
                              markov_homogeneity, meeting_tail, trap_detect)
from scoutsim.tails import SurvivalCurve, summarize_censored

STAY_PUT = ("dim 1\nscouts 2\nstates a b\ninit 1 a\ninit 2 b\n"
            "trans a * -> 1 a (0)\ntrans b * -> 1 b (0)\n")
CO_MOVING = ("dim 1\nscouts 2\nstates a b\ninit 1 a\ninit 2 b\n"
             "trans a * -> 1 a (+1)\ntrans b * -> 1 b (+1)\n")
SEPARATING = ("dim 1\nscouts 2\nstates a b\ninit 1 a\ninit 2 b\n"
              "trans a * -> 1 a (+1)\ntrans b * -> 1 b (-1)\n")


def test_extract_stay_put():
    mr = extract_renewal(run(parse_protocol(STAY_PUT), 12, SeedSpec(0)))
    assert list(mr.gaps[:4]) == [0, 1, 1, 1]
    assert np.all(mr.points == 0)
    assert mr.state_pairs[0] == ("a", "b")


def test_extract_co_moving():
    mr = extract_renewal(run(parse_protocol(CO_MOVING), 6, SeedSpec(0)))
    assert list(mr.points[:4, 0]) == [0, 1, 2, 3]
    assert list(mr.gaps[1:4]) == [1, 1, 1]


def test_extract_needs_two_scouts():
    with pytest.raises(ValueError, match="two-scout"):
        extract_renewal(run(builtin("srw", d=1), 5, SeedSpec(0)))


def test_envelope_holds_on_srw_pair():
    p = builtin("independent_walks", d=2, c=2)
    for rep in range(5):
        mr = extract_renewal(run(p, 2000, SeedSpec(3, rep)))  # raises on violation
        assert np.all(mr.gaps[1:] >= 1)


def test_envelope_violation_detected_on_corrupted_trace():
    tr = run(parse_protocol(CO_MOVING), 6, SeedSpec(0))
    tr.positions[3, 0, 0] = 50  # teleport: breaks the unit-move envelope
    tr.positions[3, 1, 0] = 50
    with pytest.raises(EnvelopeViolation):
        extract_renewal(tr)


# meeting tails


def test_meeting_tail_anchored_passes():
    res = meeting_tail(builtin("anchored_geometric", d=1, p="1/2"),
                       trials=400, cap=1 << 12, root_seed=5)
    assert res.passed
    assert res.fit.r_squared >= 0.95
    assert res.fitted_decay > 0
    assert "consistent" in res.verdict


def test_meeting_tail_srw_pair_fails():
    res = meeting_tail(builtin("independent_walks", d=1, c=2),
                       trials=1200, cap=1 << 14, root_seed=5)
    assert not res.passed
    assert res.fit.r_squared < 0.95


def test_meeting_tail_no_meetings():
    res = meeting_tail(parse_protocol(SEPARATING), trials=40, cap=256, root_seed=1)
    assert not res.passed
    assert res.verdict == "no-meetings-within-cap"
    assert res.n_gaps == 0


def test_meeting_tail_needs_two_scouts():
    with pytest.raises(PreconditionError):
        meeting_tail(builtin("srw", d=1), trials=10, cap=64)


def test_gap_k_range_drops_burn_in():
    from scoutsim.engine import meeting_gap_samples
    p = builtin("anchored_geometric", d=1, p="1/2")
    all_gaps = meeting_gap_samples(p, 50, 1 << 10, 3, k_min=1, k_max=40)
    late_gaps = meeting_gap_samples(p, 50, 1 << 10, 3, k_min=6, k_max=40)
    assert late_gaps.size < all_gaps.size
    # identical trajectories: the late gaps are a subsequence per replica
    assert late_gaps.size > 0


def test_engine_meeting_survival_matches_difference_oracle():
    # the engine simulates two interactionless scouts; the oracle runs the
    # difference walk: P(N_1 > 1) = 1/2, P(N_1 > 2) = 3/8
    from scoutsim.engine import first_meeting_times as fmt
    from scoutsim.walks import NAMED_LAWS, oracle_meeting_survival
    srw = NAMED_LAWS["srw"]()
    p = builtin("independent_walks", d=1, c=2)
    times = fmt(p, 30000, 64, root_seed=17)
    for u in (1, 2, 4, 8):
        want = float(oracle_meeting_survival(srw, srw, 0, 0, u))
        got = float((times > u).mean())
        sigma = (want * (1 - want) / 30000) ** 0.5
        assert abs(got - want) <= 4 * sigma, (u, got, want)


# traps


def test_trap_constant_sequence():
    rep = trap_detect(np.zeros((50, 1), dtype=np.int64))
    assert rep.found and rep.settle_index == 0 and rep.radius == 1


def test_trap_drift_path_not_found():
    rep = trap_detect(np.arange(3000)[:, None])
    assert not rep.found


def test_trap_frozen_tail():
    rng = np.random.default_rng(0)
    path = np.cumsum(rng.choice([-1, 1], size=100))
    path = np.concatenate([path, np.full(150, path[-1])])
    rep = trap_detect(path)
    assert rep.found and rep.settle_index <= 100


def test_trap_monotinicity_in_radius():
    rng = np.random.default_rng(2)
    path = np.cumsum(rng.choice([-1, 0, 1], size=400))
    found = {}
    for r in (1, 2, 4, 8, 16, 32, 64):
        rep = trap_detect(path, r_grid=[r])
        if rep.found:
            found[r] = rep.settle_index
    radii = sorted(found)
    for r1, r2 in zip(radii, radii[1:]):
        assert found[r2] <= found[r1]


# explorer coverage


def test_cover_time_at_start():
    mr = extract_renewal(run(parse_protocol(STAY_PUT), 10, SeedSpec(0)))
    assert explorer_cover_time(mr, (0,)) == 0


def test_cover_time_censored():
    mr = extract_renewal(run(parse_protocol(STAY_PUT), 10, SeedSpec(0)))
    assert explorer_cover_time(mr, (5,)) is None


def test_cover_time_planar_sweep_stabilizes():
    # anchor/column-scout renewal of the planar sweep protocol: the cover
    # index of (2,1) needs a gap of at least 2, which every excursion epoch
    # provides; the empirical mean settles as replicas double
    p = builtin("anchored_geometric", d=2, p="1/2")
    target = (2, 1)

    def mean_cover(n_replicas):
        vals = []
        for rep in range(n_replicas):
            mr = extract_renewal(run(p, 600, SeedSpec(33, rep)), pair=(1, 2))
            k = explorer_cover_time(mr, target)
            if k is not None:
                vals.append(k)
        assert len(vals) >= 0.95 * n_replicas
        arr = np.array(vals, dtype=float)
        half = 1.96 * arr.std(ddof=1) / np.sqrt(arr.size)
        return arr.mean(), half

    m1, h1 = mean_cover(60)
    m2, h2 = mean_cover(120)
    assert np.isfinite(m2)
    assert abs(m1 - m2) <= h1 + h2


def test_extract_pair_selection_validates():
    p = builtin("anchored_geometric", d=2, p="1/2")
    tr = run(p, 50, SeedSpec(1))
    with pytest.raises(ValueError, match="explicit scout pair"):
        extract_renewal(tr)
    with pytest.raises(ValueError, match="bad scout pair"):
        extract_renewal(tr, pair=(1, 4))


def test_cover_time_monotone_in_renewal_length():
    p = builtin("independent_walks", d=1, c=2)
    long = extract_renewal(run(p, 4000, SeedSpec(9)))
    short = MeetingRenewal(long.meeting_times[:10], long.points[:10],
                           long.state_pairs[:10], long.gaps[:10])
    for x in ((2,), (5,), (9,)):
        k_long = explorer_cover_time(long, x)
        k_short = explorer_cover_time(short, x)
        if k_short is not None:
            assert k_long is not None and k_long <= k_short


# divergence verdicts


def _power_curve(slope, cap=1 << 20, total=2 ** 40):
    thresholds = np.array([1 << j for j in range(int(np.log2(cap)) + 1)],
                          dtype=np.int64)
    surv = np.array([total * u ** slope for u in thresholds])
    return SurvivalCurve(thresholds, surv, float(total), censor_cap=cap)


def test_divergence_power_half_infinite():
    assert divergence_flag(_power_curve(-0.5)) == INFINITE


def test_divergence_steep_tail_finite():
    assert divergence_flag(_power_curve(-1.5)) == FINITE


def test_divergence_flag_on_simulated_controls():
    srw = builtin("srw", d=1)
    s = monte_carlo_hitting(srw, (1,), replicas=8000, cap=1 << 14, root_seed=3)
    assert divergence_flag(s.summary) == INFINITE

    det = parse_protocol("dim 1\nscouts 1\nstates A\ninit 1 A\ntrans A * -> 1 A (+1)\n")
    d = monte_carlo_hitting(det, (7,), replicas=100, cap=1 << 9, root_seed=3)
    assert divergence_flag(d.summary) == FINITE
    assert d.summary.mean == 7.0

    trip = builtin("independent_walks", d=1, c=3)
    t = monte_carlo_hitting(trip, (3,), replicas=6000, cap=1 << 16, root_seed=3)
    assert divergence_flag(t.summary) == FINITE

    pair = builtin("independent_walks", d=1, c=2)
    mt = first_meeting_times(pair, 8000, 1 << 14, 3)
    ms = summarize_censored("meeting", mt, 1 << 14, 3)
    assert divergence_flag(ms) == INFINITE


def test_divergence_report_fields():
    rep = divergence_report(_power_curve(-0.5))
    assert rep["verdict"] == INFINITE
    assert rep["power_fit"]["slope"] == pytest.approx(-0.5, abs=1e-9)


def test_divergence_origin_target_degenerate():
    det = parse_protocol("dim 1\nscouts 1\nstates A\ninit 1 A\ntrans A * -> 1 A (+1)\n")
    s = monte_carlo_hitting(det, (0,), replicas=50, cap=64, root_seed=1)
    assert s.summary.mean == 0.0
    assert divergence_flag(s.summary) == FINITE


# homogeneity


def test_homogeneity_srw_pair():
    p = builtin("independent_walks", d=1, c=2)
    mrs = [extract_renewal(run(p, 1 << 12, SeedSpec(21, rep))) for rep in range(8)]
    assert markov_homogeneity(mrs) > 0.01


def test_homogeneity_degenerate_single_cell():
    mrs = [extract_renewal(run(parse_protocol(STAY_PUT), 200, SeedSpec(0)))]
    assert markov_homogeneity(mrs) == 1.0
