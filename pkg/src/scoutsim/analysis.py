"""Exact structural analysis of a scout's underlying automaton.

Under the empty environment a single scout's state marginal is a finite
Markov chain.  This module reduces a protocol to that chain, decomposes it
into strongly connected classes, solves stationary distributions exactly
(rational arithmetic whenever the rule probabilities are rational), and
derives the quantities the structural dichotomies hinge on: per-class drift
vectors, displacement degeneracy with explicit potential offsets or a
witness cycle, product chains of scout pairs, and thick-ray domains.

Exactness matters here: whether a drift is zero, and whether return
displacements vanish identically, are sign/support questions that floating
point cannot settle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import streams
from .errors import PreconditionError
from .protocol import ProtocolError, ScoutProtocol
from .engine import _compile

STATIONARY_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class KernelEntry:
    probability: Fraction | float
    to: int
    move: tuple[int, ...]


@dataclass(frozen=True)
class ReducedKernel:
    """Empty-environment transition kernel of one scout."""

    dim: int
    states: tuple[str, ...]
    rows: tuple[tuple[KernelEntry, ...], ...]
    initial_state: int = 0

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def is_exact(self) -> bool:
        for row in self.rows:
            total = Fraction(0)
            for e in row:
                if not isinstance(e.probability, Fraction):
                    return False
                total += e.probability
            if total != 1:
                return False
        return True

    def state_matrix(self):
        """State-marginal transition probabilities P[q][q'], exact when possible."""
        n = self.n_states
        zero = Fraction(0) if self.is_exact else 0.0
        P = [[zero for _ in range(n)] for _ in range(n)]
        for q, row in enumerate(self.rows):
            for e in row:
                P[q][e.to] = P[q][e.to] + e.probability
        return P


def reduce_kernel(p: ScoutProtocol, scout: int = 1) -> ReducedKernel:
    """Kernel rows a scout would follow if it never sensed anyone (1-based scout)."""
    if not 1 <= scout <= p.scouts:
        raise ValueError(f"scout index {scout} out of range 1..{p.scouts}")
    comp = _compile(p)
    rows = []
    for q in range(comp.n_states):
        row_idx = comp.dispatch_row(q, 0)
        if row_idx < 0:
            raise ProtocolError(
                f"state {p.state_names[q]!r} has no empty-environment rule")
        rule = p.rules[row_idx]
        rows.append(tuple(KernelEntry(o.probability, comp.state_index[o.state], o.move)
                          for o in rule.outcomes))
    return ReducedKernel(p.dim, p.state_names, tuple(rows),
                         initial_state=comp.state_index[p.initial_states[scout - 1]])


# ---------------------------------------------------------------------------
# class decomposition


@dataclass
class DegeneracyVerdict:
    """Outcome of the displacement-potential check on one recurrent class.

    Degenerate means every support cycle has zero net displacement; the
    offsets then pin each state to a single point relative to the class
    anchor.  Otherwise some cycle with nonzero net displacement exists and
    is returned as a witness.
    """

    degenerate: bool
    offsets: dict[str, tuple[int, ...]] | None = None
    witness_cycle: tuple[tuple[str, tuple[int, ...], str], ...] | None = None
    radius: float = 0.0

    def to_json(self) -> dict:
        return {
            "degenerate": self.degenerate,
            "offsets": None if self.offsets is None else
                {k: list(v) for k, v in self.offsets.items()},
            "witness_cycle": None if self.witness_cycle is None else
                [[a, list(m), b] for a, m, b in self.witness_cycle],
            "radius": self.radius,
        }


@dataclass
class ClassInfo:
    states: tuple[str, ...]
    recurrent: bool
    pi: list | None = None                      # stationary distribution (Fraction or float)
    mean_step: tuple | None = None              # per-step expected displacement
    drift: tuple | None = None                  # equal to mean_step (renewal ratio)
    degeneracy: DegeneracyVerdict | None = None
    ray_direction: tuple[float, ...] | None = None
    ray_zero_flag: bool = False

    def to_json(self) -> dict:
        def num(x):
            if isinstance(x, Fraction):
                return str(x)
            return None if x is None else float(x)
        return {
            "states": list(self.states),
            "recurrent": self.recurrent,
            "pi": None if self.pi is None else [num(v) for v in self.pi],
            "mean_step": None if self.mean_step is None else [num(v) for v in self.mean_step],
            "drift": None if self.drift is None else [num(v) for v in self.drift],
            "degeneracy": None if self.degeneracy is None else self.degeneracy.to_json(),
            "ray_direction": None if self.ray_direction is None else list(self.ray_direction),
            "ray_zero_flag": self.ray_zero_flag,
        }


@dataclass
class ClassReport:
    kernel: ReducedKernel
    classes: list[ClassInfo]

    def recurrent_classes(self) -> list[ClassInfo]:
        return [c for c in self.classes if c.recurrent]

    def to_json(self) -> dict:
        return {"states": list(self.kernel.states),
                "classes": [c.to_json() for c in self.classes]}


def classes(k: ReducedKernel) -> ClassReport:
    """Strongly connected classes of the support digraph with recurrence flags.

    A class is recurrent exactly when no support edge leaves it.
    """
    n = k.n_states
    rows_idx = []
    cols_idx = []
    for q, row in enumerate(k.rows):
        for e in row:
            if float(e.probability) > 0:
                rows_idx.append(q)
                cols_idx.append(e.to)
    graph = csr_matrix((np.ones(len(rows_idx)), (rows_idx, cols_idx)), shape=(n, n))
    n_comp, labels = connected_components(graph, directed=True, connection="strong")
    members: dict[int, list[int]] = {}
    for q, lab in enumerate(labels):
        members.setdefault(int(lab), []).append(q)
    ordered = sorted(members.values(), key=min)
    infos = []
    for mem in ordered:
        mem_set = set(mem)
        closed = True
        for q in mem:
            for e in k.rows[q]:
                if float(e.probability) > 0 and e.to not in mem_set:
                    closed = False
                    break
            if not closed:
                break
        infos.append(ClassInfo(tuple(k.states[q] for q in mem), closed))
    return ClassReport(k, infos)


# ---------------------------------------------------------------------------
# stationary distributions and drift


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    col = 0
    for row_i in range(n):
        pivot = next((r for r in range(row_i, n) if M[r][col] != 0), None)
        while pivot is None and col < n - 1:
            col += 1
            pivot = next((r for r in range(row_i, n) if M[r][col] != 0), None)
        if pivot is None:
            raise ArithmeticError("singular system")
        M[row_i], M[pivot] = M[pivot], M[row_i]
        inv = 1 / M[row_i][col]
        M[row_i] = [x * inv for x in M[row_i]]
        for r in range(n):
            if r != row_i and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[row_i])]
        col += 1
        if col > n:
            break
    return [M[i][n] for i in range(n)]


def stationary_distribution(k: ReducedKernel, cls: Sequence[str]):
    """Stationary law of the chain restricted to a recurrent class.

    Exact rationals when the kernel is rational; otherwise a float solve
    checked to residual 1e-12.
    """
    idx = [k.states.index(s) for s in cls]
    pos = {q: j for j, q in enumerate(idx)}
    m = len(idx)
    P = k.state_matrix()
    if k.is_exact:
        A = [[Fraction(0)] * m for _ in range(m)]
        for j, q in enumerate(idx):
            for e in k.rows[q]:
                if e.to not in pos:
                    raise PreconditionError(f"class {cls} is not closed")
            for j2, q2 in enumerate(idx):
                A[j2][j] += P[q][q2]          # transpose: columns index source
            A[j][j] -= 1
        # replace last equation by normalization
        A[m - 1] = [Fraction(1)] * m
        b = [Fraction(0)] * (m - 1) + [Fraction(1)]
        pi = _solve_exact(A, b)
        # exact residual check
        for j2, q2 in enumerate(idx):
            acc = Fraction(0)
            for j, q in enumerate(idx):
                acc += pi[j] * P[q][q2]
            if acc != pi[j2]:
                raise ArithmeticError("exact stationarity failed")
        return pi
    A = np.zeros((m + 1, m))
    for j, q in enumerate(idx):
        for e in k.rows[q]:
            if e.to not in pos:
                raise PreconditionError(f"class {cls} is not closed")
            A[pos[e.to], j] += float(e.probability)
        A[j, j] -= 1.0
    A[m, :] = 1.0
    b = np.zeros(m + 1)
    b[m] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    Pm = np.zeros((m, m))
    for j, q in enumerate(idx):
        for e in k.rows[q]:
            Pm[j, pos[e.to]] += float(e.probability)
    resid = float(np.max(np.abs(pi @ Pm - pi)))
    if resid > STATIONARY_RESIDUAL_TOL:
        raise ArithmeticError(f"stationary residual {resid} exceeds tolerance")
    return [float(x) for x in pi]


def effective_drift(k: ReducedKernel, cls: Sequence[str]):
    """Mean displacement per unit time on a recurrent class.

    Computed as sum_q pi(q) * E[move | q]; by the renewal-reward identity
    this equals the displacement-per-return over return-time ratio at any
    state of the class.  Exact rationals on the rational path.
    """
    rep = classes(k)
    cls_set = frozenset(cls)
    info = next((c for c in rep.classes if frozenset(c.states) == cls_set), None)
    if info is None:
        raise PreconditionError(f"{sorted(cls)} is not a class of the kernel")
    if not info.recurrent:
        raise PreconditionError(f"class {sorted(cls)} is transient")
    pi = stationary_distribution(k, info.states)
    zero = Fraction(0) if k.is_exact else 0.0
    drift = [zero] * k.dim
    for weight, name in zip(pi, info.states):
        q = k.states.index(name)
        for e in k.rows[q]:
            for a in range(k.dim):
                drift[a] = drift[a] + weight * e.probability * e.move[a]
    return tuple(drift)


# ---------------------------------------------------------------------------
# degeneracy (displacement potentials)


def degeneracy_check(k: ReducedKernel, cls: Sequence[str]) -> DegeneracyVerdict:
    """Decide whether return displacements vanish identically on a class.

    Breadth-first potential propagation over support edges: x[root] = 0 and
    every support edge q -> q' with move m must satisfy x[q'] = x[q] + m.
    Any conflict yields a cycle with nonzero net displacement.
    """
    rep = classes(k)
    cls_set = frozenset(cls)
    info = next((c for c in rep.classes if frozenset(c.states) == cls_set), None)
    if info is None:
        raise PreconditionError(f"{sorted(cls)} is not a class of the kernel")
    if not info.recurrent:
        raise PreconditionError(f"class {sorted(cls)} is transient")

    idx = sorted(k.states.index(s) for s in info.states)
    inside = set(idx)
    edges: dict[int, list[tuple[int, tuple[int, ...]]]] = {q: [] for q in idx}
    for q in idx:
        for e in k.rows[q]:
            if float(e.probability) > 0:
                edges[q].append((e.to, e.move))

    root = idx[0]
    x: dict[int, tuple[int, ...]] = {root: (0,) * k.dim}
    parent: dict[int, tuple[int, tuple[int, ...]]] = {}
    order = [root]
    head = 0
    conflict: tuple[int, int, tuple[int, ...]] | None = None
    while head < len(order) and conflict is None:
        q = order[head]
        head += 1
        for to, move in edges[q]:
            expected = tuple(a + m for a, m in zip(x[q], move))
            if to not in x:
                x[to] = expected
                parent[to] = (q, move)
                order.append(to)
            elif x[to] != expected:
                conflict = (q, to, move)
                break

    if conflict is None:
        offsets = {k.states[q]: x[q] for q in idx}
        radius = max((max(abs(c) for c in v) for v in offsets.values()), default=0)
        return DegeneracyVerdict(True, offsets=offsets, radius=float(radius))

    q, to, move = conflict

    def tree_path(node: int) -> list[tuple[int, tuple[int, ...], int]]:
        rev = []
        while node != root:
            par, mv = parent[node]
            rev.append((par, mv, node))
            node = par
        return list(reversed(rev))

    back = _bfs_path(edges, to, root)
    back_disp = tuple(sum(m[a] for _, m, _ in back) for a in range(k.dim))
    net1 = tuple(xa + ma + ba for xa, ma, ba in zip(x[q], move, back_disp))
    if any(net1):
        cycle = tree_path(q) + [(q, move, to)] + back
    else:
        # the all-tree route to `to` closes to a different (hence nonzero) sum
        cycle = tree_path(to) + back
    named = tuple((k.states[a], m, k.states[b]) for a, m, b in cycle)
    return DegeneracyVerdict(False, witness_cycle=named)


def _bfs_path(edges, src: int, dst: int):
    if src == dst:
        return []
    seen = {src: None}
    frontier = [src]
    while frontier:
        nxt = []
        for q in frontier:
            for to, move in edges[q]:
                if to not in seen:
                    seen[to] = (q, move)
                    if to == dst:
                        path = []
                        node = to
                        while node != src:
                            par, mv = seen[node]
                            path.append((par, mv, node))
                            node = par
                        return list(reversed(path))
                    nxt.append(to)
        frontier = nxt
    raise PreconditionError("class is not strongly connected")


# ---------------------------------------------------------------------------
# renewal sampling


@dataclass
class RenewalSamples:
    """Return-time triples at a marked state: displacement, duration, 2*duration."""

    zeta: np.ndarray   # (n, d) displacements over a return
    nu: np.ndarray     # (n,) return times
    R: np.ndarray      # (n,) look-around radii, 2 * nu

    @property
    def n(self) -> int:
        return int(self.nu.size)


def kernel_renewal_samples(k: ReducedKernel, q0: str, count: int,
                           root_seed: int, max_steps: int = 10**7) -> RenewalSamples:
    """Sample i.i.d. return triples of the reduced chain observed at q0.

    The triples' law does not depend on history before the first visit to
    q0, so chains start at q0 directly.  Vectorized across samples; every
    draw is keyed by (root_seed, sample, 0, step).
    """
    rep = classes(k)
    home = next((c for c in rep.classes if q0 in c.states), None)
    if home is None or not home.recurrent:
        raise PreconditionError(f"state {q0!r} is not in a recurrent class")

    cum, to, mv, length = _kernel_tables(k)
    q0_idx = k.states.index(q0)
    reps = np.arange(count, dtype=np.int64)
    state = np.full(count, q0_idx, dtype=np.int64)
    disp = np.zeros((count, k.dim), dtype=np.int64)
    zeta = np.zeros((count, k.dim), dtype=np.int64)
    nu = np.zeros(count, dtype=np.int64)
    t = 0
    active = np.arange(count)
    while active.size:
        if t >= max_steps:
            raise RuntimeError("return sampling exceeded the step budget")
        u = streams.uniforms(root_seed, reps[active], np.int64(0), np.int64(t))
        s = state[active]
        branch = (cum[s] <= u[:, None]).sum(axis=1)
        np.minimum(branch, length[s] - 1, out=branch)
        state[active] = to[s, branch]
        disp[active] += mv[s, branch]
        t += 1
        back = state[active] == q0_idx
        if back.any():
            done = active[back]
            zeta[done] = disp[done]
            nu[done] = t  # all chains started at q0 at step 0
            active = active[~back]
    return RenewalSamples(zeta, nu, 2 * nu)


def renewal_samples(p: ScoutProtocol, scout: int, q0: str, count: int,
                    seed: SeedSpec) -> RenewalSamples:
    """Return triples (zeta, nu, R=2*nu) of a scout's reduced chain at q0.

    Precondition: q0 lies in a recurrent class reachable from the scout's
    initial state.
    """
    k = reduce_kernel(p, scout)
    _require_reachable(k, k.initial_state, k.states.index(q0))
    return kernel_renewal_samples(k, q0, count, seed.root_seed)


def _require_reachable(k: ReducedKernel, src: int, dst: int) -> None:
    seen = {src}
    frontier = [src]
    while frontier:
        nxt = []
        for q in frontier:
            for e in k.rows[q]:
                if float(e.probability) > 0 and e.to not in seen:
                    seen.add(e.to)
                    nxt.append(e.to)
        frontier = nxt
    if dst not in seen:
        raise PreconditionError(
            f"state {k.states[dst]!r} unreachable from {k.states[src]!r}")


# ---------------------------------------------------------------------------
# product chains


def product_kernel(k1: ReducedKernel, k2: ReducedKernel,
                   difference: bool = False) -> ReducedKernel:
    """Kernel of two independent scouts run jointly.

    Moves are concatenated, or reduced to scout1 - scout2 per axis when
    ``difference`` is set (the chain of the difference walk).
    """
    if k1.dim != k2.dim:
        raise ValueError("kernels must share a dimension")
    names = tuple(f"{a}|{b}" for a in k1.states for b in k2.states)
    n2 = k2.n_states
    rows = []
    for q1, row1 in enumerate(k1.rows):
        for q2, row2 in enumerate(k2.rows):
            entries = []
            for e1 in row1:
                for e2 in row2:
                    prob = e1.probability * e2.probability
                    if difference:
                        move = tuple(a - b for a, b in zip(e1.move, e2.move))
                    else:
                        move = e1.move + e2.move
                    entries.append(KernelEntry(prob, e1.to * n2 + e2.to, move))
            rows.append(tuple(entries))
    dim = k1.dim if difference else k1.dim + k2.dim
    init = k1.initial_state * n2 + k2.initial_state
    return ReducedKernel(dim, names, tuple(rows), initial_state=init)


def joint_product_chain(p: ScoutProtocol, difference: bool = False) -> ReducedKernel:
    """Product chain of a two-scout protocol's reduced kernels."""
    if p.scouts != 2:
        raise PreconditionError("joint product chain needs exactly two scouts")
    return product_kernel(reduce_kernel(p, 1), reduce_kernel(p, 2),
                          difference=difference)


def difference_drift(p_or_pair, cls: Sequence[str] | None = None):
    """Drift vector of the difference walk of two independent scouts.

    Accepts a two-scout protocol or a (kernel, kernel) pair.  The class
    defaults to the recurrent class reachable from the joint initial state;
    by independence every recurrent class gives drift1 - drift2.
    """
    if isinstance(p_or_pair, ScoutProtocol):
        kd = joint_product_chain(p_or_pair, difference=True)
    else:
        k1, k2 = p_or_pair
        kd = product_kernel(k1, k2, difference=True)
    if cls is None:
        reachable = _reachable_set(kd, kd.initial_state)
        rep = classes(kd)
        rec = [c for c in rep.classes
               if c.recurrent and kd.states.index(c.states[0]) in reachable]
        if not rec:
            raise PreconditionError("no recurrent class reachable from the start")
        cls = rec[0].states
    return effective_drift(kd, cls)


def _reachable_set(k: ReducedKernel, src: int) -> set[int]:
    seen = {src}
    frontier = [src]
    while frontier:
        nxt = []
        for q in frontier:
            for e in k.rows[q]:
                if float(e.probability) > 0 and e.to not in seen:
                    seen.add(e.to)
                    nxt.append(e.to)
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# thick rays


@dataclass(frozen=True)
class ThickRay:
    """Half-strip of width M: |<x, a_perp>| < M and <x, a> > -M.

    ``direction None`` is the zero-drift flag; membership then degenerates
    to the sup-norm ball of radius M.
    """

    direction: tuple[float, float] | None
    width: float

    def contains(self, x: Sequence[float]) -> bool:
        if self.direction is None:
            return max(abs(float(v)) for v in x) < self.width
        ax, ay = self.direction
        along = float(x[0]) * ax + float(x[1]) * ay
        perp = -float(x[0]) * ay + float(x[1]) * ax
        return abs(perp) < self.width and along > -self.width

    def to_json(self) -> dict:
        return {"direction": None if self.direction is None else list(self.direction),
                "width": self.width,
                "zero_flag": self.direction is None}


@dataclass
class ClassRay:
    states: tuple[str, ...]
    ray: ThickRay
    width_source: str          # "user" | "estimate" | "exact-offsets"
    ambiguous_zero_drift: bool = False

    def to_json(self) -> dict:
        body = self.ray.to_json()
        body.update({"states": list(self.states), "width_source": self.width_source,
                     "ambiguous_zero_drift": self.ambiguous_zero_drift})
        return body


@dataclass
class RayDomain:
    rays: list[ClassRay]

    def contains(self, x: Sequence[float]) -> bool:
        """Membership in the union of the per-class rays."""
        return any(r.ray.contains(x) for r in self.rays)

    def to_json(self) -> dict:
        return {"rays": [r.to_json() for r in self.rays]}


def _kernel_tables(k: ReducedKernel):
    n_states = k.n_states
    max_o = max(len(r) for r in k.rows)
    cum = np.full((n_states, max_o), 2.0)
    to = np.zeros((n_states, max_o), dtype=np.int64)
    mv = np.zeros((n_states, max_o, k.dim), dtype=np.int64)
    length = np.zeros(n_states, dtype=np.int64)
    for q, row in enumerate(k.rows):
        acc = Fraction(0) if k.is_exact else 0.0
        for j, e in enumerate(row):
            acc = acc + e.probability
            cum[q, j] = float(acc)
            to[q, j] = e.to
            mv[q, j] = e.move
        length[q] = len(row)
    return cum, to, mv, length


def _estimate_half_width(k: ReducedKernel, cls: Sequence[str], direction,
                         root_seed: int, pilot_runs: int = 200,
                         pilot_steps: int = 512) -> float:
    """99th-percentile excursion perpendicular to the drift over pilot runs."""
    cum, to, mv, length = _kernel_tables(k)
    start = k.states.index(cls[0])
    reps = np.arange(pilot_runs, dtype=np.int64)
    state = np.full(pilot_runs, start, dtype=np.int64)
    pos = np.zeros((pilot_runs, k.dim), dtype=np.int64)
    worst = np.zeros(pilot_runs)
    for t in range(pilot_steps):
        u = streams.uniforms(root_seed, reps, np.int64(1), np.int64(t))
        branch = (cum[state] <= u[:, None]).sum(axis=1)
        np.minimum(branch, length[state] - 1, out=branch)
        pos += mv[state, branch]
        state = to[state, branch]
        if direction is None:
            cur = np.abs(pos).max(axis=1)
        else:
            ax, ay = direction
            cur = np.abs(-pos[:, 0] * ay + pos[:, 1] * ax)
        np.maximum(worst, cur, out=worst)
    return float(np.quantile(worst, 0.99)) + 1.0


def ray_domain(p: ScoutProtocol, M: float | None = None, root_seed: int = 0,
               scout: int = 1) -> RayDomain:
    """Per-recurrent-class thick rays of a single-scout planar protocol.

    Directions come from exact drifts.  The width is user-supplied or
    estimated from pilot runs (and labeled accordingly); for a degenerate
    class the exact offset radius plus the state count is used.  Zero-drift
    classes carry the zero flag: the intended region is a bounded set whose
    canonical shape is not pinned down, so membership falls back to a
    sup-norm ball and the ray is marked ambiguous.
    """
    if p.dim != 2:
        raise PreconditionError("ray domains are defined on the plane")
    k = reduce_kernel(p, scout)
    rep = classes(k)
    rays = []
    for info in rep.recurrent_classes():
        drift = effective_drift(k, info.states)
        norm = math.hypot(float(drift[0]), float(drift[1]))
        if norm > 0:
            direction = (float(drift[0]) / norm, float(drift[1]) / norm)
            if M is not None:
                rays.append(ClassRay(info.states, ThickRay(direction, float(M)), "user"))
            else:
                w = _estimate_half_width(k, info.states, direction, root_seed)
                rays.append(ClassRay(info.states, ThickRay(direction, w), "estimate"))
            continue
        verdict = degeneracy_check(k, info.states)
        if verdict.degenerate:
            width = float(M) if M is not None else verdict.radius + k.n_states
            rays.append(ClassRay(info.states, ThickRay(None, width),
                                 "user" if M is not None else "exact-offsets"))
        else:
            width = float(M) if M is not None else \
                _estimate_half_width(k, info.states, None, root_seed)
            rays.append(ClassRay(info.states, ThickRay(None, width),
                                 "user" if M is not None else "estimate",
                                 ambiguous_zero_drift=True))
    return RayDomain(rays)


# ---------------------------------------------------------------------------
# full report


def analyze_kernel(k: ReducedKernel) -> ClassReport:
    """Class decomposition with stationary laws, drifts, and degeneracy verdicts."""
    rep = classes(k)
    for info in rep.classes:
        if not info.recurrent:
            continue
        info.pi = stationary_distribution(k, info.states)
        drift = effective_drift(k, info.states)
        info.mean_step = drift
        info.drift = drift
        info.degeneracy = degeneracy_check(k, info.states)
        fl = [float(v) for v in drift]
        norm = math.sqrt(sum(v * v for v in fl))
        if norm > 0:
            info.ray_direction = tuple(v / norm for v in fl)
        else:
            info.ray_zero_flag = True
    return rep


def analyze_protocol(p: ScoutProtocol, scout: int = 1) -> ClassReport:
    return analyze_kernel(reduce_kernel(p, scout))
