"""Seeded simulation of scout processes.

Stepping follows the synchronous product law: every scout's environment is
read from the current configuration, then each scout independently draws a
(state, move) pair from its matching rule row.  The variate consumed by
scout i at step n of replica r is ``streams.uniforms(root_seed, r, i, n)``,
so scalar stepping, vectorized batches, and threaded replica chunks all
produce bit-identical trajectories.

Hitting and meeting measurements stream; they never materialize traces, so
caps of 2**24 steps run in bounded memory.
"""

from __future__ import annotations

from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from . import streams
from .protocol import (Configuration, ProtocolError, ScoutProtocol,
                       environment_of, protocol_hash)
from .tails import CensoredSummary, SurvivalCurve, summarize_censored

DEFAULT_CAP = 1 << 20
_MEMORY_LIMIT_BYTES = 1 << 28
_CENSORED_FLAG_FRACTION = 0.01


class ResourceLimitError(RuntimeError):
    """A materializing run would exceed the memory policy."""


@dataclass(frozen=True)
class SeedSpec:
    """Root seed plus replica index; identifies one independent stream family."""

    root_seed: int
    replica: int = 0


@dataclass(frozen=True)
class HittingResult:
    target: tuple[int, ...]
    time: int | None
    cap: int

    @property
    def censored(self) -> bool:
        return self.time is None


# ---------------------------------------------------------------------------
# compiled protocol


class _Compiled:
    """Dispatch tables of a protocol, shared by scalar and vector stepping."""

    def __init__(self, p: ScoutProtocol):
        self.protocol = p
        self.d = p.dim
        self.c = p.scouts
        names = p.state_names
        self.n_states = len(names)
        if self.n_states > 63:
            raise ProtocolError("more than 63 states not supported")
        self.state_index = {n: i for i, n in enumerate(names)}

        cums: list[list[float]] = []
        tos: list[list[int]] = []
        moves: list[list[tuple[int, ...]]] = []
        self.wildcard_row = np.full(self.n_states, -1, dtype=np.int32)
        self.exact_rows: dict[tuple[int, int], int] = {}
        for rule in p.rules:
            si = self.state_index[rule.state]
            acc = Fraction(0)
            acc_f = 0.0
            exact = all(isinstance(o.probability, Fraction) for o in rule.outcomes)
            cum: list[float] = []
            for o in rule.outcomes:
                if exact:
                    acc += o.probability
                    cum.append(float(acc))
                else:
                    acc_f += float(o.probability)
                    cum.append(acc_f)
            row_idx = len(cums)
            cums.append(cum)
            tos.append([self.state_index[o.state] for o in rule.outcomes])
            moves.append([o.move for o in rule.outcomes])
            if rule.pattern.is_wildcard:
                self.wildcard_row[si] = row_idx
            else:
                mask = 0
                for s in rule.pattern.states:
                    mask |= 1 << self.state_index[s]
                self.exact_rows[(si, mask)] = row_idx

        n_rows = len(cums)
        max_o = max(len(c_) for c_ in cums)
        self.row_cum = np.full((n_rows, max_o), 2.0)
        self.row_state = np.zeros((n_rows, max_o), dtype=np.int16)
        self.row_move = np.zeros((n_rows, max_o, self.d), dtype=np.int8)
        self.row_len = np.zeros(n_rows, dtype=np.int64)
        self.row_cum_lists = [list(c_) for c_ in cums]
        for r in range(n_rows):
            k = len(cums[r])
            self.row_len[r] = k
            self.row_cum[r, :k] = cums[r]
            self.row_state[r, :k] = tos[r]
            self.row_move[r, :k] = moves[r]

        self.env_free = not self.exact_rows
        if self.n_states <= 16:
            lut = np.tile(self.wildcard_row[:, None], (1, 1 << self.n_states))
            for (si, mask), ridx in self.exact_rows.items():
                lut[si, mask] = ridx
            self.lut = lut
        else:
            self.lut = None

        self.init_state_idx = np.array(
            [self.state_index[s] for s in p.initial_states], dtype=np.int16)
        self.origin = np.array(p.initial_position, dtype=np.int64)

        # a scout whose initial state is environment-free and self-absorbing
        # performs an i.i.d. walk; protocols where every scout does qualify
        # for block simulation
        self.iid_single = False
        if self.env_free:
            ok = True
            for si in self.init_state_idx:
                row = self.wildcard_row[si]
                if row < 0:
                    ok = False
                    break
                k = int(self.row_len[row])
                if not np.all(self.row_state[row, :k] == si):
                    ok = False
                    break
            self.iid_single = ok

    def dispatch_row(self, state_idx: int, mask: int) -> int:
        row = self.exact_rows.get((state_idx, mask), -1)
        if row < 0:
            row = int(self.wildcard_row[state_idx])
        return row


@lru_cache(maxsize=128)
def _compile(p: ScoutProtocol) -> _Compiled:
    return _Compiled(p)


def _select_branch(cum: Sequence[float], u: float) -> int:
    # branch j iff cum[j-1] <= u < cum[j]; clamp guards float row sums < 1
    return min(bisect_right(cum, u), len(cum) - 1)


# ---------------------------------------------------------------------------
# scalar stepping


def _advance(p: ScoutProtocol, comp: _Compiled, cfg: Configuration, ufn) -> Configuration:
    envs = [environment_of(cfg, i + 1) for i in range(comp.c)]
    new_pos = []
    new_states = []
    for i in range(comp.c):
        si = comp.state_index[cfg.states[i]]
        mask = 0
        for name in envs[i]:
            mask |= 1 << comp.state_index[name]
        row = comp.dispatch_row(si, mask)
        if row < 0:
            raise ProtocolError(
                f"no matching rule for state {cfg.states[i]!r} with environment "
                f"{sorted(envs[i])}")
        branch = _select_branch(comp.row_cum_lists[row], ufn(i, cfg.time))
        new_states.append(p.state_names[comp.row_state[row, branch]])
        move = comp.row_move[row, branch]
        new_pos.append(tuple(int(x) + int(m) for x, m in zip(cfg.positions[i], move)))
    return Configuration(tuple(new_pos), tuple(new_states), cfg.time + 1)


def step(cfg: Configuration, p: ScoutProtocol, seed: SeedSpec) -> Configuration:
    """Advance one synchronous step.

    All environments are computed from ``cfg`` before any scout moves; each
    scout then consumes exactly one stream value keyed by (replica, scout,
    cfg.time).
    """
    comp = _compile(p)
    ufn = lambda i, n: streams.uniform_scalar(seed.root_seed, seed.replica, i, n)
    return _advance(p, comp, cfg, ufn)


def initial_configuration(p: ScoutProtocol) -> Configuration:
    return Configuration(tuple(p.initial_position for _ in range(p.scouts)),
                         p.initial_states, 0)


class _BufferedUniforms:
    """Blockwise prefetch of the per-(scout, step) streams of one replica.

    Purely an efficiency device: values are identical to scalar queries.
    """

    def __init__(self, root_seed: int, replica: int, n_scouts: int, block: int = 1024):
        self.root = root_seed
        self.replica = replica
        self.c = n_scouts
        self.block = block
        self.base = -1
        self.buf: np.ndarray | None = None

    def __call__(self, scout: int, n: int) -> float:
        if self.buf is None or not self.base <= n < self.base + self.block:
            self.base = (n // self.block) * self.block
            steps = np.arange(self.base, self.base + self.block, dtype=np.int64)
            self.buf = streams.uniforms(self.root, np.int64(self.replica),
                                        np.arange(self.c, dtype=np.int64)[:, None],
                                        steps[None, :])
        return float(self.buf[scout, n - self.base])


def iter_run(p: ScoutProtocol, seed: SeedSpec, horizon: int | None = None) -> Iterator[Configuration]:
    """Stream configurations 0, 1, ... without storing them (memory-free run)."""
    comp = _compile(p)
    ufn = _BufferedUniforms(seed.root_seed, seed.replica, comp.c)
    cfg = initial_configuration(p)
    yield cfg
    n = 0
    while horizon is None or n < horizon:
        cfg = _advance(p, comp, cfg, ufn)
        yield cfg
        n += 1


# ---------------------------------------------------------------------------
# traces


class _ConfigSeq(Sequence):
    def __init__(self, trace: "Trace"):
        self._trace = trace

    def __len__(self) -> int:
        return self._trace.positions.shape[0]

    def __getitem__(self, n):
        if isinstance(n, slice):
            return [self[i] for i in range(*n.indices(len(self)))]
        return self._trace.config(n)


@dataclass
class Trace:
    """Time-indexed joint positions and states from one seeded run."""

    protocol: ScoutProtocol
    seed: SeedSpec
    positions: np.ndarray  # (horizon+1, c, d) int64
    state_idx: np.ndarray  # (horizon+1, c) int16

    @property
    def horizon(self) -> int:
        return self.positions.shape[0] - 1

    def config(self, n: int) -> Configuration:
        names = self.protocol.state_names
        return Configuration(
            tuple(tuple(int(x) for x in row) for row in self.positions[n]),
            tuple(names[j] for j in self.state_idx[n]),
            n,
        )

    @property
    def configurations(self) -> Sequence:
        return _ConfigSeq(self)


def run(p: ScoutProtocol, horizon: int, seed: SeedSpec) -> Trace:
    """Materialized trace of length horizon+1; identical for identical inputs."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    comp = _compile(p)
    footprint = (horizon + 1) * comp.c * (8 * comp.d + 2)
    if footprint > _MEMORY_LIMIT_BYTES:
        raise ResourceLimitError(
            f"trace of horizon {horizon} needs ~{footprint >> 20} MiB; "
            "use iter_run for streaming")
    positions = np.empty((horizon + 1, comp.c, comp.d), dtype=np.int64)
    state_idx = np.empty((horizon + 1, comp.c), dtype=np.int16)
    cfg = initial_configuration(p)
    for n, cfg in enumerate(iter_run(p, seed, horizon)):
        positions[n] = cfg.positions
        state_idx[n] = [comp.state_index[s] for s in cfg.states]
    return Trace(p, seed, positions, state_idx)


# ---------------------------------------------------------------------------
# vectorized replica simulation


class VectorSim:
    """Many replicas of one protocol advanced in lockstep.

    Rows can be dropped with :meth:`compact` as replicas finish; remaining
    rows keep their absolute replica indices, so trajectories are unaffected
    by when (or whether) compaction happens.
    """

    def __init__(self, p: ScoutProtocol, n_replicas: int, root_seed: int,
                 replica_start: int = 0):
        comp = _compile(p)
        self.comp = comp
        self.root_seed = root_seed
        self.replicas = np.arange(replica_start, replica_start + n_replicas, dtype=np.int64)
        self.positions = np.tile(comp.origin, (n_replicas, comp.c, 1))
        self.states = np.tile(comp.init_state_idx, (n_replicas, 1))
        self.time = 0
        self._scouts = np.arange(comp.c, dtype=np.int64)

    @property
    def n_active(self) -> int:
        return self.replicas.size

    def compact(self, keep: np.ndarray) -> None:
        self.replicas = self.replicas[keep]
        self.positions = self.positions[keep]
        self.states = self.states[keep]

    def _lookup_rows(self, masks: np.ndarray) -> np.ndarray:
        comp = self.comp
        if comp.lut is not None:
            return comp.lut[self.states.astype(np.int64), masks]
        rows = np.empty(self.states.shape, dtype=np.int32)
        flat_s = self.states.ravel()
        flat_m = masks.ravel()
        flat_r = rows.ravel()
        pairs = np.stack([flat_s.astype(np.int64), flat_m], axis=1)
        uniq, inverse = np.unique(pairs, axis=0, return_inverse=True)
        table = np.array([self.comp.dispatch_row(int(s), int(m)) for s, m in uniq],
                         dtype=np.int32)
        flat_r[:] = table[inverse]
        return rows

    def step(self) -> None:
        comp = self.comp
        R = self.replicas.size
        self.time += 1
        if R == 0:
            return
        c = comp.c
        if comp.env_free or c == 1:
            masks = np.zeros((R, c), dtype=np.int64)
        else:
            masks = np.zeros((R, c), dtype=np.int64)
            bits = np.int64(1) << self.states.astype(np.int64)
            for i in range(c):
                for j in range(c):
                    if i == j:
                        continue
                    co = (self.positions[:, i, :] == self.positions[:, j, :]).all(axis=1)
                    masks[:, i] |= np.where(co, bits[:, j], 0)
        rows = self._lookup_rows(masks)
        if (rows < 0).any():
            bad = np.argwhere(rows < 0)[0]
            name = comp.protocol.state_names[int(self.states[bad[0], bad[1]])]
            raise ProtocolError(f"no matching rule for state {name!r}")
        u = streams.uniforms(self.root_seed, self.replicas[:, None],
                             self._scouts[None, :], np.int64(self.time - 1))
        branch = (comp.row_cum[rows] <= u[..., None]).sum(axis=-1)
        np.minimum(branch, comp.row_len[rows] - 1, out=branch)
        self.states = comp.row_state[rows, branch]
        self.positions += comp.row_move[rows, branch]


def run_batch(p: ScoutProtocol, horizon: int, root_seed: int, replicas: int,
              replica_start: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Positions (R, horizon+1, c, d) and state indices (R, horizon+1, c).

    Bit-identical to stacking :func:`run` over replicas; bounded by the same
    memory policy.
    """
    comp = _compile(p)
    footprint = replicas * (horizon + 1) * comp.c * (8 * comp.d + 2)
    if footprint > _MEMORY_LIMIT_BYTES:
        raise ResourceLimitError("batch too large; chunk the replica range")
    sim = VectorSim(p, replicas, root_seed, replica_start)
    positions = np.empty((replicas, horizon + 1, comp.c, comp.d), dtype=np.int64)
    state_idx = np.empty((replicas, horizon + 1, comp.c), dtype=np.int16)
    for t in range(horizon + 1):
        positions[:, t] = sim.positions
        state_idx[:, t] = sim.states
        if t < horizon:
            sim.step()
    return positions, state_idx


# ---------------------------------------------------------------------------
# hitting times


def _iid_scout_tables(comp: _Compiled) -> list[tuple[np.ndarray, np.ndarray]]:
    tables = []
    for si in comp.init_state_idx:
        row = int(comp.wildcard_row[si])
        k = int(comp.row_len[row])
        tables.append((comp.row_cum[row, :k].copy(),
                       comp.row_move[row, :k].astype(np.int64)))
    return tables


def _hit_times_iid_chunk(p: ScoutProtocol, targets: np.ndarray, n: int, cap: int,
                         root_seed: int, replica_start: int,
                         block: int = 2048) -> np.ndarray:
    comp = _compile(p)
    tables = _iid_scout_tables(comp)
    n_t = targets.shape[0]
    reps = np.arange(replica_start, replica_start + n, dtype=np.int64)
    pos = np.tile(comp.origin, (n, comp.c, 1))
    ht = np.full((n, n_t), cap + 1, dtype=np.int64)
    out = np.full((n, n_t), cap + 1, dtype=np.int64)
    # time-0 check
    at0 = (pos[:, :, None, :] == targets[None, None, :, :]).all(-1).any(1)
    ht[at0] = 0
    t0 = 0
    while t0 < cap and reps.size:
        B = min(block, cap - t0)
        trajs = []
        for i, (cum, moves) in enumerate(tables):
            u = streams.uniforms(root_seed, reps[:, None], np.int64(i),
                                 t0 + np.arange(B, dtype=np.int64)[None, :])
            branch = (cum[None, None, :] <= u[..., None]).sum(-1)
            np.minimum(branch, len(cum) - 1, out=branch)
            traj = pos[:, i, None, :] + np.cumsum(moves[branch], axis=1)
            trajs.append(traj)
        for k in range(n_t):
            unhit = ht[:, k] > cap
            if not unhit.any():
                continue
            seen = np.zeros((reps.size, B), dtype=bool)
            for traj in trajs:
                seen |= (traj == targets[k]).all(-1)
            seen &= unhit[:, None]
            has = seen.any(1)
            ht[has, k] = t0 + 1 + seen[has].argmax(1)
        for i in range(comp.c):
            pos[:, i, :] = trajs[i][:, -1, :]
        t0 += B
        done = (ht <= cap).all(axis=1)
        if done.any():
            out[reps[done] - replica_start] = ht[done]
            keep = ~done
            reps, pos, ht = reps[keep], pos[keep], ht[keep]
    if reps.size:
        out[reps - replica_start] = ht
    return out


def _hit_times_general_chunk(p: ScoutProtocol, targets: np.ndarray, n: int, cap: int,
                             root_seed: int, replica_start: int) -> np.ndarray:
    sim = VectorSim(p, n, root_seed, replica_start)
    n_t = targets.shape[0]
    ht = np.full((n, n_t), cap + 1, dtype=np.int64)
    out = np.full((n, n_t), cap + 1, dtype=np.int64)
    check_every = 64
    while sim.n_active:
        eq = (sim.positions[:, :, None, :] == targets[None, None, :, :]).all(-1).any(1)
        newly = eq & (ht > cap)
        if newly.any():
            ht[newly] = sim.time
        if sim.time >= cap:
            break
        if sim.time % check_every == 0:
            done = (ht <= cap).all(axis=1)
            if done.sum() > sim.n_active // 4:
                out[sim.replicas[done] - replica_start] = ht[done]
                keep = ~done
                sim.compact(keep)
                ht = ht[keep]
                if not sim.n_active:
                    return out
        sim.step()
    if sim.n_active:
        out[sim.replicas - replica_start] = ht
    return out


def hit_times(p: ScoutProtocol, targets: Sequence[Sequence[int]], replicas: int,
              cap: int, root_seed: int, threads: int = 1,
              chunk: int = 8192) -> np.ndarray:
    """First-passage times (replicas, n_targets); cap+1 marks censored.

    Streaming: no trace is stored.  Trajectories depend only on
    (protocol, replica, root_seed) — never on the target set, chunking, or
    thread count — so any execution plan yields the same array.
    """
    comp = _compile(p)
    targets_arr = np.array([tuple(t) for t in targets], dtype=np.int64)
    if targets_arr.ndim != 2 or targets_arr.shape[1] != comp.d:
        raise ValueError("targets must be points of the protocol dimension")
    fn = _hit_times_iid_chunk if comp.iid_single else _hit_times_general_chunk
    ranges = [(s, min(chunk, replicas - s)) for s in range(0, replicas, chunk)]

    def work(rng):
        start, count = rng
        return fn(p, targets_arr, count, cap, root_seed, start)

    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, ranges))
    else:
        parts = [work(r) for r in ranges]
    return np.concatenate(parts, axis=0) if parts else np.zeros((0, len(targets)), np.int64)


def hitting_time(p: ScoutProtocol, x: Sequence[int], cap: int, seed: SeedSpec) -> HittingResult:
    """First n <= cap at which some scout occupies x, else censored."""
    if cap < 0:
        raise ValueError("cap must be >= 0")
    comp = _compile(p)
    fn = _hit_times_iid_chunk if comp.iid_single else _hit_times_general_chunk
    times = fn(p, np.array([tuple(x)], dtype=np.int64), 1, cap,
               seed.root_seed, seed.replica)
    t = int(times[0, 0])
    return HittingResult(tuple(int(v) for v in x), None if t > cap else t, cap)


@dataclass
class HittingSummary:
    """Monte-Carlo hitting estimate for one target."""

    target: tuple[int, ...]
    summary: CensoredSummary
    protocol_hash: str
    cap_is_default: bool = False

    @property
    def curve(self) -> SurvivalCurve:
        return self.summary.curve

    def to_json(self) -> dict:
        body = self.summary.to_json()
        body["target"] = list(self.target)
        body["protocol_hash"] = self.protocol_hash
        body["cap_policy"] = "default" if self.cap_is_default else "user"
        return body


def monte_carlo_hitting(p: ScoutProtocol, x: Sequence[int], replicas: int,
                        cap: int | None = None, root_seed: int = 0,
                        threads: int = 1) -> HittingSummary:
    """Survival curve over dyadic thresholds plus censoring-aware mean estimate."""
    return monte_carlo_hitting_multi(p, [x], replicas, cap, root_seed, threads)[0]


def monte_carlo_hitting_multi(p: ScoutProtocol, targets: Sequence[Sequence[int]],
                              replicas: int, cap: int | None = None,
                              root_seed: int = 0, threads: int = 1) -> list[HittingSummary]:
    """Per-target summaries sharing one set of simulated replicas."""
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    cap_default = cap is None
    if cap is None:
        cap = DEFAULT_CAP
    times = hit_times(p, targets, replicas, cap, root_seed, threads=threads)
    phash = protocol_hash(p)
    out = []
    for k, tgt in enumerate(targets):
        label = "hitting:" + ",".join(str(int(v)) for v in tgt)
        summ = summarize_censored(label, times[:, k], cap, root_seed,
                                  _CENSORED_FLAG_FRACTION)
        out.append(HittingSummary(tuple(int(v) for v in tgt), summ, phash, cap_default))
    return out


# ---------------------------------------------------------------------------
# meetings (two-scout protocols)


def meeting_times(t: Trace) -> list[int]:
    """All meeting times of a two-scout trace, with time 0 included by convention."""
    if t.positions.shape[1] != 2:
        raise ValueError("meeting_times needs a two-scout trace")
    eq = (t.positions[:, 0, :] == t.positions[:, 1, :]).all(axis=1)
    eq[0] = True
    return [int(n) for n in np.flatnonzero(eq)]


def first_meeting_times(p: ScoutProtocol, replicas: int, cap: int, root_seed: int,
                        threads: int = 1, chunk: int = 8192) -> np.ndarray:
    """First n >= 1 with both scouts co-located, per replica; cap+1 censored."""
    comp = _compile(p)
    if comp.c != 2:
        raise ValueError("first_meeting_times needs a two-scout protocol")
    ranges = [(s, min(chunk, replicas - s)) for s in range(0, replicas, chunk)]
    fn = _first_meeting_iid_chunk if comp.iid_single else _first_meeting_general_chunk

    def work(rng):
        return fn(p, rng[1], cap, root_seed, rng[0])

    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, ranges))
    else:
        parts = [work(r) for r in ranges]
    return np.concatenate(parts) if parts else np.zeros(0, np.int64)


def _first_meeting_iid_chunk(p: ScoutProtocol, n: int, cap: int, root_seed: int,
                             replica_start: int, block: int = 2048) -> np.ndarray:
    comp = _compile(p)
    tables = _iid_scout_tables(comp)
    reps = np.arange(replica_start, replica_start + n, dtype=np.int64)
    pos = np.tile(comp.origin, (n, comp.c, 1))
    out = np.full(n, cap + 1, dtype=np.int64)
    t0 = 0
    while t0 < cap and reps.size:
        B = min(block, cap - t0)
        trajs = []
        for i, (cum, moves) in enumerate(tables):
            u = streams.uniforms(root_seed, reps[:, None], np.int64(i),
                                 t0 + np.arange(B, dtype=np.int64)[None, :])
            branch = (cum[None, None, :] <= u[..., None]).sum(-1)
            np.minimum(branch, len(cum) - 1, out=branch)
            trajs.append(pos[:, i, None, :] + np.cumsum(moves[branch], axis=1))
        met = (trajs[0] == trajs[1]).all(-1)
        has = met.any(1)
        hit_time = t0 + 1 + met[has].argmax(1)
        out[reps[has] - replica_start] = hit_time
        keep = ~has
        reps = reps[keep]
        pos = np.stack([trajs[0][keep, -1, :], trajs[1][keep, -1, :]], axis=1)
        t0 += B
    return out


def _first_meeting_general_chunk(p: ScoutProtocol, n: int, cap: int, root_seed: int,
                                 replica_start: int) -> np.ndarray:
    sim = VectorSim(p, n, root_seed, replica_start)
    out = np.full(n, cap + 1, dtype=np.int64)
    while sim.n_active and sim.time < cap:
        sim.step()
        met = (sim.positions[:, 0, :] == sim.positions[:, 1, :]).all(axis=1)
        if met.any():
            out[sim.replicas[met] - replica_start] = sim.time
            sim.compact(~met)
    return out


def meeting_gap_samples(p: ScoutProtocol, replicas: int, cap: int, root_seed: int,
                        k_min: int = 1, k_max: int = 64) -> np.ndarray:
    """Inter-meeting gaps N_k - N_{k-1} pooled over replicas, k_min <= k <= k_max.

    Raising k_min discards the burn-in gaps tied to the fixed initial state
    pair; the remaining gaps are pooled across the k range.
    """
    comp = _compile(p)
    if comp.c != 2:
        raise ValueError("meeting gaps need a two-scout protocol")
    if not 1 <= k_min <= k_max:
        raise ValueError("need 1 <= k_min <= k_max")
    sim = VectorSim(p, replicas, root_seed)
    last = np.zeros(replicas, dtype=np.int64)
    count = np.zeros(replicas, dtype=np.int64)
    gaps: list[np.ndarray] = []
    while sim.n_active and sim.time < cap:
        sim.step()
        met = (sim.positions[:, 0, :] == sim.positions[:, 1, :]).all(axis=1)
        if met.any():
            count[met] += 1
            eligible = met & (count >= k_min)
            if eligible.any():
                gaps.append(sim.time - last[eligible])
            last[met] = sim.time
            full = count >= k_max
            if full.any():
                keep = ~full
                sim.compact(keep)
                last = last[keep]
                count = count[keep]
    return np.concatenate(gaps) if gaps else np.zeros(0, dtype=np.int64)
