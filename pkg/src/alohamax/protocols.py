"""State machines for the three distributed MAX protocols.

* one_shot_run: every node relays its running MAX under slotted Aloha until
  the network-wide MAX has diffused; instruments per-cell coverage, per-column
  descent chains and the three completion events.
* hop_distance_run: frame-based flooding that assigns every node its hop
  distance from the sink, superframe wave by superframe wave.
* pipelined_run: round-based MAX pipeline over an established hop gradient,
  one network-wide MAX result per round after a warm-up delay.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geomnet import (MIN_NODES, Deployment, RadioParams, TessellationGrid,
                      cell_indices, tessellate)
from .macsim import SlotResolver, TransmitterSampler, sample_slot_transmitters


def gen_data(dep: Deployment, mode: str, rng: np.random.Generator | None = None,
             q: float | None = None) -> np.ndarray:
    """One data bit per node.

    single_far_corner: a lone 1 at the node nearest (1,1) — the longest
    diffusion path to the sink. bernoulli: i.i.d. bits with P(1) = q.
    """
    n = dep.n
    if mode == "all_zero":
        return np.zeros(n, dtype=np.int64)
    if mode == "single_far_corner":
        d2 = ((dep.positions - np.array([1.0, 1.0])) ** 2).sum(axis=1)
        data = np.zeros(n, dtype=np.int64)
        data[int(np.argmin(d2))] = 1
        return data
    if mode == "bernoulli":
        if q is None or not 0.0 <= q <= 1.0:
            raise ValueError("bernoulli mode needs q in [0, 1]")
        if rng is None:
            raise ValueError("bernoulli mode needs an rng")
        return (rng.random(n) < q).astype(np.int64)
    raise ValueError(f"unknown data mode: {mode}")


# ---------------------------------------------------------------------------
# One-shot MAX
# ---------------------------------------------------------------------------

@dataclass
class OneShotResult:
    phase1_slot: int | None        # every node has transmitted successfully
    sink_slot: int | None          # sink's running MAX equals the true MAX
    all_slot: int | None           # every node's running MAX equals the true MAX
    column_chain_slots: np.ndarray   # per column, completion slot of the descent chain (-1 open)
    cell_coverage_slots: np.ndarray  # per cell, slot of full coverage (-1 open)
    node_first_success: np.ndarray   # per node, first successful-transmission slot (-1 open)
    total_tx: int
    slots_run: int
    completed: bool
    sink_value: int
    data_max: int


def one_shot_run(dep: Deployment, radio: RadioParams, data, rng: np.random.Generator,
                 max_slots: int, mode: str = "skip", until: str = "all",
                 trace_to=None, trace_limit: int = 1000) -> OneShotResult:
    """Run the one-shot MAX diffusion until completion or max_slots.

    until selects the stop condition: "all" waits for phase-1 coverage, the
    sink event and full diffusion; "sink" and "phase1" stop at that single
    event (the others are still recorded if they fire earlier). Exhausting
    max_slots flags the result incomplete rather than raising.
    """
    if until not in ("all", "sink", "phase1"):
        raise ValueError(f"unknown stop condition: {until}")
    n = dep.n
    data = np.asarray(data, dtype=np.int64)
    if data.shape != (n,):
        raise ValueError("data must hold one bit per node")
    if n >= MIN_NODES:
        grid = tessellate(n)
        side = grid.cells_per_side
        cells = cell_indices(dep, grid)
    else:
        # degenerate deployments (unit tests, toy cases): single-cell grid,
        # no column instrumentation
        grid = TessellationGrid(cells_per_side=1, cell_side=1.0, cell_count=1)
        side = 1
        cells = np.zeros(n, dtype=np.int64)
    w = side - 1
    cell_total = np.bincount(cells, minlength=grid.cell_count)
    resolver = SlotResolver(dep, radio)
    sampler = TransmitterSampler(n, radio.tx_prob) if mode == "skip" else None

    y = data.astype(bool).copy()
    zmax = int(data.max())
    not_max = int(n - (y == bool(zmax)).sum())

    covered = np.zeros(n, dtype=bool)
    uncovered = n
    uncovered_in_cell = cell_total.copy()
    cell_cov_slot = np.full(grid.cell_count, -1, dtype=np.int64)
    node_first = np.full(n, -1, dtype=np.int64)
    col_progress = np.zeros(side, dtype=np.int64)
    col_slot = np.full(side, -1, dtype=np.int64)
    # cells of the descent chain: stage s of column c sits at row side-1-s
    chain_cell = np.array([(side - 1 - s) * side + c
                           for c in range(side) for s in range(w)],
                          dtype=np.int64).reshape(side, w)
    cell_hit = np.zeros(grid.cell_count, dtype=bool)

    phase1_slot = None
    sink_slot = 0 if y[dep.sink_id] == bool(zmax) else None
    all_slot = 0 if not_max == 0 else None
    total_tx = 0
    traced = 0
    t = 0

    def done() -> bool:
        if until == "sink":
            return sink_slot is not None
        if until == "phase1":
            return phase1_slot is not None
        return phase1_slot is not None and sink_slot is not None and all_slot is not None

    while not done():
        if mode == "skip":
            gap, k = sampler.next_active(rng)
            if t + gap + 1 > max_slots:
                t = max_slots
                break
            t += gap + 1
            tx = rng.choice(n, size=k, replace=False)
        else:
            if t + 1 > max_slots:
                t = max_slots
                break
            t += 1
            tx = np.flatnonzero(rng.random(n) < radio.tx_prob)
            if tx.size == 0:
                continue
        total_tx += tx.size
        receivers, senders, success = resolver.resolve_compact(tx)

        # deliveries: receivers pick up the transmitter's pre-slot running MAX
        y_new = None
        if receivers.size:
            got_one = y[senders]                      # y is still the pre-slot state
            y_new = receivers[got_one & ~y[receivers]]

        ok_tx = tx[success]
        if ok_tx.size:
            fresh = ok_tx[~covered[ok_tx]]
            if fresh.size:
                covered[fresh] = True
                uncovered -= int(fresh.size)
                node_first[fresh] = t
                np.subtract.at(uncovered_in_cell, cells[fresh], 1)
                filled = np.unique(cells[fresh])
                filled = filled[uncovered_in_cell[filled] == 0]
                cell_cov_slot[filled] = t
                if phase1_slot is None and uncovered == 0:
                    phase1_slot = t
            if w > 0:
                # advance at most one descent stage per column per slot, and only
                # when the success lands in the next cell of the chain
                cell_hit[cells[ok_tx]] = True
                open_cols = np.flatnonzero(col_progress < w)
                if open_cols.size:
                    needed = chain_cell[open_cols, col_progress[open_cols]]
                    advanced = open_cols[cell_hit[needed]]
                    if advanced.size:
                        col_progress[advanced] += 1
                        finished = advanced[col_progress[advanced] == w]
                        col_slot[finished] = t
                cell_hit[cells[ok_tx]] = False

        if y_new is not None and y_new.size:
            y[y_new] = True
            if zmax == 1:
                not_max -= int(y_new.size)
                if sink_slot is None and y[dep.sink_id]:
                    sink_slot = t
                if all_slot is None and not_max == 0:
                    all_slot = t

        if trace_to is not None and traced < trace_limit:
            trace_to.write(json.dumps({
                "slot": t,
                "tx": tx.tolist(),
                "decoded": {int(j): int(i) for j, i in zip(receivers, senders)},
                "y_set": [] if y_new is None else y_new.tolist(),
            }) + "\n")
            traced += 1

    return OneShotResult(
        phase1_slot=phase1_slot, sink_slot=sink_slot, all_slot=all_slot,
        column_chain_slots=col_slot, cell_coverage_slots=cell_cov_slot,
        node_first_success=node_first, total_tx=total_tx,
        slots_run=t, completed=done(), sink_value=int(y[dep.sink_id]), data_max=zmax,
    )


# ---------------------------------------------------------------------------
# Hop distance compute
# ---------------------------------------------------------------------------

@dataclass
class HopResult:
    hops: np.ndarray          # per-node hop distance, -1 where never decoded
    decode_superframe: np.ndarray  # superframe of the first successful decode (-1)
    superframes: int
    frames_per_superframe: int
    frame_bits: int
    total_slots: int
    total_tx: int             # frame transmissions, successful or not


def hop_distance_run(dep: Deployment, radio: RadioParams, tau: int,
                     rng: np.random.Generator) -> HopResult:
    """Superframe-wave flooding of hop distances.

    The sink transmits 0 in every frame of the first superframe; a node that
    first decodes value v in superframe g adopts hop v+1, announces v+1 with
    probability p per frame during superframe g+1 only, then stays silent.
    Frames are atomic: per frame the whole transmission either clears the
    protocol model against all other frame transmissions or is lost.
    """
    if tau < 1:
        raise ValueError("tau must be >= 1")
    n = dep.n
    grid = tessellate(n)
    d = 2 * grid.cells_per_side
    frame_bits = max(1, math.ceil(math.log2(d)))
    resolver = SlotResolver(dep, radio)
    p = radio.tx_prob

    hops = np.full(n, -1, dtype=np.int64)
    hops[dep.sink_id] = 0
    decode_super = np.full(n, -1, dtype=np.int64)
    announce_in = np.full(n, -1, dtype=np.int64)  # superframe in which a node announces
    total_tx = 0

    for g in range(d + 1):
        if g == 0:
            # the sink is the sole transmitter: its neighbors decode in frame 1
            # and nothing changes afterwards, so the rest of g0 is skipped
            receivers, _, _ = resolver.resolve_compact(np.array([dep.sink_id]))
            fresh = receivers[hops[receivers] < 0]
            hops[fresh] = 1
            decode_super[fresh] = 0
            announce_in[fresh] = 1
            total_tx += tau
            continue
        wave = np.flatnonzero(announce_in == g)
        if wave.size == 0:
            continue
        sampler = TransmitterSampler(int(wave.size), p)
        f = 0
        while True:
            gap, k = sampler.next_active(rng)
            f += gap + 1
            if f > tau:
                break
            tx = rng.choice(wave, size=k, replace=False)
            total_tx += k
            receivers, senders, _ = resolver.resolve_compact(np.asarray(tx, dtype=np.int64))
            if receivers.size:
                undecided = hops[receivers] < 0
                fresh = receivers[undecided]
                if fresh.size:
                    hops[fresh] = hops[senders[undecided]] + 1
                    decode_super[fresh] = g
                    if g + 1 <= d:
                        announce_in[fresh] = g + 1

    return HopResult(hops=hops, decode_superframe=decode_super,
                     superframes=d + 1, frames_per_superframe=tau,
                     frame_bits=frame_bits,
                     total_slots=(d + 1) * tau * frame_bits,
                     total_tx=total_tx)


# ---------------------------------------------------------------------------
# Pipelined MAX
# ---------------------------------------------------------------------------

@dataclass
class PipelinedResult:
    outputs: np.ndarray              # sink MAX per data round 1..rounds-d
    round_full_success: np.ndarray   # per round, every non-sink node succeeded >= once
    round_tx: np.ndarray             # transmissions per round
    rounds: int
    tau: int
    pipeline_depth: int              # d
    delay_slots: int                 # d * tau
    hop_claims: np.ndarray | None = None  # (rounds, d+1): per hop, MAX offered by
    #                                       successful transmitters (-1: none succeeded)


def validate_hops(dep: Deployment, resolver: SlotResolver, hops: np.ndarray,
                  d: int) -> None:
    hops = np.asarray(hops)
    if hops.shape != (dep.n,):
        raise ValueError("hops must hold one value per node")
    if hops[dep.sink_id] != 0:
        raise ValueError("inconsistent hops: sink must be at hop 0")
    if (hops < 0).any() or int(hops.max()) > d:
        raise ValueError("inconsistent hops: values must lie in [0, pipeline depth]")
    src = np.repeat(np.arange(dep.n), np.diff(resolver.indptr))
    if np.abs(hops[src] - hops[resolver.indices]).max(initial=0) > 1:
        raise ValueError("inconsistent hops: neighbors differ by more than 1")


def pipelined_run(dep: Deployment, radio: RadioParams, hops, tau: int, rounds: int,
                  data_stream, rng: np.random.Generator,
                  mode: str = "skip", record_hop_claims: bool = False) -> PipelinedResult:
    """Round-based pipelined MAX over a hop gradient.

    Each round every non-sink node offers one bit: the MAX of its data bit from
    d - h rounds back and everything it heard from hop h+1 last round.
    Transmissions carry the hop distance mod 3, so receivers keep exactly the
    bits arriving from one hop farther out. After round r >= d the sink emits
    the MAX for data round r - d + 1.
    """
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    n = dep.n
    stream = np.asarray(data_stream, dtype=np.int64)
    if stream.shape != (rounds, n):
        raise ValueError("data_stream must have shape (rounds, n)")
    grid = tessellate(n)
    d = 2 * grid.cells_per_side
    resolver = SlotResolver(dep, radio)
    hops = np.asarray(hops, dtype=np.int64)
    validate_hops(dep, resolver, hops, d)
    p = radio.tx_prob

    eligible = np.arange(n)[np.arange(n) != dep.sink_id]
    m = int(eligible.size)
    sampler = TransmitterSampler(m, p) if mode == "skip" else None
    hop_id = hops % 3                 # identification bits on the wire
    want_id = (hops + 1) % 3          # id value a receiver accepts data from

    y_prev = np.zeros(n, dtype=bool)
    outputs = np.full(max(rounds - d, 0), -1, dtype=np.int64)
    full_success = np.zeros(rounds, dtype=bool)
    round_tx = np.zeros(rounds, dtype=np.int64)
    hop_claims = np.full((rounds, d + 1), -1, dtype=np.int64) if record_hop_claims else None

    for r in range(1, rounds + 1):
        # own data bit from d - h rounds back; rounds <= 0 count as 0
        idx = r - d + hops
        own = np.zeros(n, dtype=bool)
        live = idx >= 1
        own[live] = stream[idx[live] - 1, live] == 1
        tx_bit = own | y_prev

        y_round = np.zeros(n, dtype=bool)
        succeeded = np.zeros(n, dtype=bool)
        ntx = 0
        if mode == "skip":
            t = 0
            while True:
                gap, k = sampler.next_active(rng)
                t += gap + 1
                if t > tau:
                    break
                tx = rng.choice(eligible, size=k, replace=False)
                ntx += k
                _pipelined_slot(resolver, tx, hops, hop_id, want_id, tx_bit,
                                y_round, succeeded)
        else:
            for _ in range(tau):
                tx = eligible[rng.random(m) < p]
                if tx.size == 0:
                    continue
                ntx += int(tx.size)
                _pipelined_slot(resolver, tx, hops, hop_id, want_id, tx_bit,
                                y_round, succeeded)

        round_tx[r - 1] = ntx
        full_success[r - 1] = bool(succeeded[eligible].all())
        if hop_claims is not None:
            ok = np.flatnonzero(succeeded)
            for h in range(d + 1):
                at_h = ok[hops[ok] == h]
                if at_h.size:
                    hop_claims[r - 1, h] = int(tx_bit[at_h].max())
        y_prev = y_round
        if d <= r <= rounds - 1:
            v = r - d + 1  # data round resolved by this round's receptions
            outputs[v - 1] = int(stream[v - 1, dep.sink_id] == 1 or y_prev[dep.sink_id])

    return PipelinedResult(outputs=outputs, round_full_success=full_success,
                           round_tx=round_tx, rounds=rounds, tau=tau,
                           pipeline_depth=d, delay_slots=d * tau,
                           hop_claims=hop_claims)


def _pipelined_slot(resolver: SlotResolver, tx, hops, hop_id, want_id, tx_bit,
                    y_round, succeeded) -> None:
    tx = np.asarray(tx, dtype=np.int64)
    receivers, senders, success = resolver.resolve_compact(tx)
    if receivers.size:
        # the protocol model only lets radio neighbors decode, and the hop
        # gradient changes by at most 1 per edge
        assert np.abs(hops[senders] - hops[receivers]).max() <= 1
        keep = hop_id[senders] == want_id[receivers]
        take = receivers[keep & tx_bit[senders]]
        y_round[take] = True
    succeeded[tx[success]] = True
