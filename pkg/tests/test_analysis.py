"""Exact automaton analysis: classes, drift, degeneracy, products, rays."""

from fractions import Fraction

import numpy as np
import pytest

from scoutsim import builtin, parse_protocol
from scoutsim.analysis import (PreconditionError, ThickRay,
                               analyze_protocol, classes, degeneracy_check,
                               difference_drift, effective_drift,
                               joint_product_chain, kernel_renewal_samples,
                               product_kernel, ray_domain, reduce_kernel,
                               renewal_samples, stationary_distribution)
from scoutsim.engine import SeedSpec
from scoutsim.tails import SurvivalCurve, fit_tail

from conftest import random_rational_kernel

HALF_DRIFT = ("dim 1\nscouts 1\nstates a b\ninit 1 a\n"
              "trans a * -> 1 b (+1)\ntrans b * -> 1 a (0)\n")


def _kernel(text):
    return reduce_kernel(parse_protocol(text))


def test_reduce_srw():
    k = reduce_kernel(builtin("srw", d=1))
    assert k.n_states == 1
    assert sorted(float(e.probability) for e in k.rows[0]) == [0.5, 0.5]


def test_reduce_ignores_colocation_rules():
    text = ("dim 1\nscouts 2\nstates a b\ninit 1 a\ninit 2 b\n"
            "trans a {b} -> 1 a (+1)\ntrans a * -> 1 a (0)\n"
            "trans b * -> 1 b (0)\n")
    k = reduce_kernel(parse_protocol(text), scout=1)
    entry = k.rows[k.states.index("a")][0]
    assert entry.move == (0,)


def test_reduce_anchored_sweeper():
    # the co-location reset is invisible under the empty environment: the
    # return states become absorbing drifts
    k = reduce_kernel(builtin("anchored_geometric", d=1, p="1/2"), scout=2)
    rep = classes(k)
    rec = {c.states: c.recurrent for c in rep.classes}
    assert rec[("b-home-",)] and rec[("b-home+",)]
    assert not rec[("b-out+",)] and not rec[("b-out-",)]
    assert effective_drift(k, ("b-home-",)) == (Fraction(-1),)
    assert effective_drift(k, ("b-home+",)) == (Fraction(1),)


def test_classes_single_selfloop():
    k = _kernel("dim 1\nscouts 1\nstates a\ninit 1 a\ntrans a * -> 1 a (0)\n")
    rep = classes(k)
    assert len(rep.classes) == 1 and rep.classes[0].recurrent


def test_classes_chain_transient():
    k = _kernel("dim 1\nscouts 1\nstates a b\ninit 1 a\n"
                "trans a * -> 1 b (0)\ntrans b * -> 1 b (0)\n")
    rep = classes(k)
    flags = {c.states: c.recurrent for c in rep.classes}
    assert flags == {("a",): False, ("b",): True}


def test_classes_two_closed():
    k = _kernel("dim 1\nscouts 1\nstates a b\ninit 1 a\n"
                "trans a * -> 1 a (0)\ntrans b * -> 1 b (0)\n")
    rep = classes(k)
    assert all(c.recurrent for c in rep.classes)
    assert len(rep.classes) == 2


def test_stationary_exact_two_state():
    k = _kernel(HALF_DRIFT)
    pi = stationary_distribution(k, ("a", "b"))
    assert pi == [Fraction(1, 2), Fraction(1, 2)]


def test_stationary_float_fallback():
    # float probabilities route through the least-squares path with a
    # residual check; values match the exact solution of the same chain
    from scoutsim.analysis import KernelEntry, ReducedKernel
    rows = (
        (KernelEntry(0.25, 0, (1,)), KernelEntry(0.75, 1, (-1,))),
        (KernelEntry(1.0, 0, (0,)),),
    )
    k = ReducedKernel(1, ("a", "b"), rows)
    assert not k.is_exact
    pi = stationary_distribution(k, ("a", "b"))
    assert pi[0] == pytest.approx(4 / 7, abs=1e-12)
    assert pi[1] == pytest.approx(3 / 7, abs=1e-12)
    drift = effective_drift(k, ("a", "b"))
    assert drift[0] == pytest.approx(4 / 7 * (0.25 - 0.75) + 3 / 7 * 0.0, abs=1e-12)


def test_stationary_residual_on_random_kernels():
    rng = np.random.default_rng(5)
    for _ in range(10):
        k = random_rational_kernel(rng, int(rng.integers(2, 6)), 1)
        rep = classes(k)
        for info in rep.recurrent_classes():
            pi = stationary_distribution(k, info.states)
            P = k.state_matrix()
            idx = [k.states.index(s) for s in info.states]
            for j2, q2 in enumerate(idx):
                acc = sum(pi[j] * P[q][q2] for j, q in enumerate(idx))
                assert acc == pi[j2]  # exact rational stationarity


def test_drift_deterministic_plus():
    k = _kernel("dim 1\nscouts 1\nstates a\ninit 1 a\ntrans a * -> 1 a (+1)\n")
    assert effective_drift(k, ("a",)) == (Fraction(1),)


def test_drift_zero_cycle():
    k = _kernel("dim 1\nscouts 1\nstates a b\ninit 1 a\n"
                "trans a * -> 1 b (+1)\ntrans b * -> 1 a (-1)\n")
    assert effective_drift(k, ("a", "b")) == (Fraction(0),)


def test_drift_half():
    k = _kernel(HALF_DRIFT)
    assert effective_drift(k, ("a", "b")) == (Fraction(1, 2),)


def test_drift_requires_recurrent():
    k = _kernel("dim 1\nscouts 1\nstates a b\ninit 1 a\n"
                "trans a * -> 1 b (0)\ntrans b * -> 1 b (0)\n")
    with pytest.raises(PreconditionError, match="transient"):
        effective_drift(k, ("a",))


# degeneracy


def test_degenerate_offsets():
    k = _kernel("dim 1\nscouts 1\nstates a b\ninit 1 a\n"
                "trans a * -> 1 b (+1)\ntrans b * -> 1 a (-1)\n")
    v = degeneracy_check(k, ("a", "b"))
    assert v.degenerate
    assert v.offsets == {"a": (0,), "b": (1,)}
    assert v.radius == 1


def test_nondegenerate_witness_cycle():
    k = _kernel("dim 1\nscouts 1\nstates a b\ninit 1 a\n"
                "trans a * -> 1 b (+1)\ntrans b * -> 1 a (+1)\n")
    v = degeneracy_check(k, ("a", "b"))
    assert not v.degenerate
    disp = sum(m[0] for _, m, _ in v.witness_cycle)
    assert disp != 0
    assert v.witness_cycle[0][0] == v.witness_cycle[-1][2]  # closed cycle


def test_nondegenerate_selfloop_conflict():
    k = reduce_kernel(builtin("srw", d=1))
    v = degeneracy_check(k, ("walk",))
    assert not v.degenerate
    assert sum(m[0] for _, m, _ in v.witness_cycle) != 0


def test_degeneracy_matches_simulated_confinement():
    from conftest import random_degenerate_kernel
    from scoutsim.analysis import _kernel_tables
    from scoutsim import streams
    rng = np.random.default_rng(8)
    k = random_degenerate_kernel(rng, 4, 2)
    v = degeneracy_check(k, k.states)
    assert v.degenerate
    # simulate from the BFS root: position must always equal the offset
    cum, to, mv, length = _kernel_tables(k)
    root = k.states.index(next(iter(v.offsets)))
    q = root
    pos = np.zeros(2, dtype=np.int64)
    base = np.array(v.offsets[k.states[root]])
    for t in range(3000):
        u = streams.uniform_scalar(77, 0, 0, t)
        b = min(int((cum[q] <= u).sum()), int(length[q]) - 1)
        pos += mv[q, b]
        q = int(to[q, b])
        assert tuple(pos + base) == v.offsets[k.states[q]]


# renewal samples


def test_renewal_deterministic_selfloop():
    p = parse_protocol("dim 1\nscouts 1\nstates a\ninit 1 a\ntrans a * -> 1 a (+1)\n")
    rs = renewal_samples(p, 1, "a", 20, SeedSpec(1))
    assert np.all(rs.zeta[:, 0] == 1)
    assert np.all(rs.nu == 1)
    assert np.all(rs.R == 2)


def test_renewal_two_cycle():
    p = parse_protocol(HALF_DRIFT)
    rs = renewal_samples(p, 1, "a", 20, SeedSpec(1))
    assert np.all(rs.zeta[:, 0] == 1)
    assert np.all(rs.nu == 2)
    assert np.all(rs.R == 4)


def test_renewal_unreachable_state():
    text = ("dim 1\nscouts 1\nstates a b\ninit 1 a\n"
            "trans a * -> 1 a (0)\ntrans b * -> 1 b (0)\n")
    with pytest.raises(PreconditionError, match="unreachable"):
        renewal_samples(parse_protocol(text), 1, "b", 5, SeedSpec(0))


def test_renewal_reward_identity_on_random_kernels():
    # E[zeta - d * nu] = 0 exactly; a 3-sigma t-test on sampled returns
    rng = np.random.default_rng(11)
    for trial in range(5):
        k = random_rational_kernel(rng, int(rng.integers(2, 7)), 1)
        rep = classes(k)
        info = rep.recurrent_classes()[0]
        d = effective_drift(k, info.states)[0]
        rs = kernel_renewal_samples(k, info.states[0], 4000, root_seed=trial)
        resid = rs.zeta[:, 0] - float(d) * rs.nu
        m = resid.mean()
        s = resid.std(ddof=1) / np.sqrt(resid.size)
        assert abs(m) <= 3 * s + 1e-12


def test_srw_renewal_drift_zero():
    k = reduce_kernel(builtin("srw", d=1))
    rs = kernel_renewal_samples(k, "walk", 30000, root_seed=3)
    assert abs(rs.zeta[:, 0].mean()) <= 4 * rs.zeta[:, 0].std(ddof=1) / np.sqrt(rs.n)
    assert effective_drift(k, ("walk",)) == (Fraction(0),)


def test_return_time_exponential_tail():
    # irreducible kernels have geometric-type return tails: semi-log linear
    k = _kernel("dim 1\nscouts 1\nstates a b\ninit 1 a\n"
                "trans a * -> 1 b (0)\ntrans b * -> 0.5 a (0) | 0.5 b (0)\n")
    rs = kernel_renewal_samples(k, "a", 20000, root_seed=9)
    grid = np.arange(1, 16, dtype=np.int64)
    counts = (rs.nu[None, :] > grid[:, None]).sum(axis=1).astype(float)
    curve = SurvivalCurve(grid, counts, float(rs.n))
    fit = fit_tail(curve, "exponential")
    assert fit.r_squared >= 0.95
    assert fit.slope < 0


# product chains


def test_product_two_deterministic():
    up = _kernel("dim 1\nscouts 1\nstates a\ninit 1 a\ntrans a * -> 1 a (+1)\n")
    assert difference_drift((up, up)) == (Fraction(0),)


def test_product_difference_drift_example():
    half = _kernel(HALF_DRIFT)
    up = _kernel("dim 1\nscouts 1\nstates a\ninit 1 a\ntrans a * -> 1 a (+1)\n")
    assert difference_drift((up, half)) == (Fraction(1, 2),)


def test_product_srw_pair():
    k = reduce_kernel(builtin("srw", d=1))
    assert difference_drift((k, k)) == (Fraction(0),)


def test_joint_product_chain_protocol():
    text = ("dim 1\nscouts 2\nstates a b\ninit 1 a\ninit 2 b\n"
            "trans a * -> 1 a (+1)\ntrans b * -> 0.5 b (+1) | 0.5 b (-1)\n")
    p = parse_protocol(text)
    kd = joint_product_chain(p, difference=True)
    assert kd.dim == 1
    assert difference_drift(p) == (Fraction(1),)
    full = joint_product_chain(p)
    assert full.dim == 2


def test_difference_drift_identity_random_pairs():
    rng = np.random.default_rng(13)
    for _ in range(10):
        k1 = random_rational_kernel(rng, int(rng.integers(1, 5)), 1)
        k2 = random_rational_kernel(rng, int(rng.integers(1, 5)), 1)
        rep1 = classes(k1).recurrent_classes()[0]
        rep2 = classes(k2).recurrent_classes()[0]
        # restrict both to one recurrent class to make them irreducible
        d1 = effective_drift(k1, rep1.states)[0]
        d2 = effective_drift(k2, rep2.states)[0]
        kd = product_kernel(k1, k2, difference=True)
        repd = classes(kd)
        for info in repd.recurrent_classes():
            dd = effective_drift(kd, info.states)[0]
            if rep1.states == tuple(k1.states) and rep2.states == tuple(k2.states):
                assert dd == d1 - d2
                assert abs(float(dd) - (float(d1) - float(d2))) <= 1e-12


# rays


def test_ray_membership_examples():
    ray = ThickRay((1.0, 0.0), 5.0)
    assert ray.contains((10, 2))
    assert not ray.contains((10, 7))
    assert not ray.contains((-6, 0))


def test_ray_domain_drifted_class():
    text = ("dim 2\nscouts 1\nstates a\ninit 1 a\ntrans a * -> 1 a (+1,0)\n")
    dom = ray_domain(parse_protocol(text), M=5.0)
    assert len(dom.rays) == 1
    r = dom.rays[0]
    assert r.ray.direction == (1.0, 0.0)
    assert r.width_source == "user"
    assert dom.contains((100, 0))
    assert not dom.contains((0, 100))


def test_ray_domain_degenerate_class():
    text = ("dim 2\nscouts 1\nstates a b\ninit 1 a\n"
            "trans a * -> 1 b (+1,0)\ntrans b * -> 1 a (-1,0)\n")
    p = parse_protocol(text)
    dom = ray_domain(p)
    r = dom.rays[0]
    assert r.ray.direction is None
    assert r.width_source == "exact-offsets"
    assert r.ray.width == 1 + 2  # offset radius + state count
    assert r.ray.contains((0, 0)) and not r.ray.contains((5, 0))


def test_ray_domain_zero_drift_flagged():
    dom = ray_domain(builtin("srw", d=2), root_seed=4)
    r = dom.rays[0]
    assert r.ray.direction is None
    assert r.ambiguous_zero_drift
    assert r.width_source == "estimate"
    assert r.ray.width > 1


def test_ray_domain_needs_plane():
    with pytest.raises(PreconditionError, match="plane"):
        ray_domain(builtin("srw", d=1))


def test_analyze_protocol_report():
    rep = analyze_protocol(builtin("srw", d=1))
    info = rep.classes[0]
    assert info.recurrent
    assert info.drift == (Fraction(0),)
    assert info.pi == [Fraction(1)]
    assert not info.degeneracy.degenerate
    body = rep.to_json()
    assert body["classes"][0]["pi"] == ["1"]


def test_analyze_deterministic_plus_ray_direction():
    p = parse_protocol("dim 1\nscouts 1\nstates a\ninit 1 a\ntrans a * -> 1 a (+1)\n")
    rep = analyze_protocol(p)
    assert rep.classes[0].ray_direction == (1.0,)
