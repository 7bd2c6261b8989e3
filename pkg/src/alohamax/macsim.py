"""Slotted-Aloha transmitter sampling and protocol-model reception resolution.

A slot is resolved receiver-side: node j decodes transmitter i iff
dist(i, j) < radius and every other concurrent transmitter is farther than
(1 + delta_prime) * radius from j. A transmission is successful iff every
node within the radius of the transmitter decodes it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geomnet import Deployment, RadioParams, disk_adjacency


@dataclass
class SlotOutcome:
    """Result of resolving one slot."""

    transmitters: np.ndarray      # node ids that transmitted
    decoded: dict                 # receiver id -> transmitter id (absent = idle or collision)
    tx_success: dict              # transmitter id -> all in-range nodes decoded it


class TransmitterSampler:
    """Per-slot transmitter-count sampling for m candidates at probability p.

    Skip mode fast-forwards over all-idle slots (the idle run length is
    geometric) and then draws the transmitter count from Binomial(m, p)
    conditioned on >= 1 via an inverse-CDF walk, so a slot loop only pays for
    slots in which somebody transmits.
    """

    def __init__(self, m: int, p: float):
        if not 0.0 < p < 1.0:
            raise ValueError("p must be in (0, 1)")
        if m < 1:
            raise ValueError("need at least one candidate transmitter")
        self.m = m
        self.p = p
        self.log_idle = m * math.log1p(-p)
        self.p_busy = -math.expm1(self.log_idle)
        self.pmf0 = math.exp(self.log_idle)
        self.ratio = p / (1.0 - p)

    def conditioned_count(self, u: float) -> int:
        """Binomial(m, p) count conditioned on >= 1 at uniform quantile u."""
        target = self.pmf0 + u * (1.0 - self.pmf0)
        pmf = self.pmf0
        cum = self.pmf0
        for k in range(1, self.m + 1):
            pmf *= (self.m - k + 1) / k * self.ratio
            cum += pmf
            if cum >= target:
                return k
        return self.m

    def next_active(self, rng: np.random.Generator):
        """(gap, count): idle slots skipped, then the busy slot's transmitter count."""
        gap = int(rng.geometric(self.p_busy)) - 1
        count = self.conditioned_count(float(rng.random()))
        return gap, count


def sample_slot_transmitters(n: int, p: float, rng: np.random.Generator,
                             mode: str = "naive"):
    """Draw one slot's transmitter set.

    naive: every node transmits independently with probability p; gap is 0.
    skip: fast-forward over all-idle slots; returns (gap, transmitters) where
    gap is the number of idle slots consumed before this busy one. The joint
    distribution of per-slot transmitter sets matches naive mode.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    if mode == "naive":
        mask = rng.random(n) < p
        return 0, np.flatnonzero(mask)
    if mode != "skip":
        raise ValueError(f"unknown sampling mode: {mode}")
    sampler = TransmitterSampler(n, p)
    gap, k = sampler.next_active(rng)
    transmitters = rng.choice(n, size=k, replace=False)
    transmitters.sort()
    return gap, transmitters


class SlotResolver:
    """Protocol-model resolution engine with per-deployment precomputation.

    Caches positions and strict-disk neighbor lists; resolution itself is an
    exact vectorised check of both receiver-side conditions (asserted equal to
    the brute-force pairwise check in the test suite).
    """

    def __init__(self, dep: Deployment, radio: RadioParams):
        self.dep = dep
        self.radio = radio
        self.positions = dep.positions
        self.n = dep.n
        self.radius = radio.radius
        self.guard = (1.0 + radio.delta_prime) * radio.radius
        self.indptr, self.indices = disk_adjacency(dep.positions, radio.radius)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def resolve_compact(self, transmitters: np.ndarray):
        """Resolve a slot into (receivers, senders, success).

        receivers[i] decoded the transmission of senders[i]; success aligns
        with the transmitter array and says whether every in-range node
        decoded that transmitter.
        """
        tx = np.asarray(transmitters, dtype=np.int64)
        k = tx.size
        empty = np.empty(0, dtype=np.int64)
        if k == 0:
            return empty, empty, np.zeros(0, dtype=bool)
        if k == 1:
            # lone transmitter: every in-range node decodes, transmission succeeds
            i = int(tx[0])
            nbrs = self.neighbors(i)
            return nbrs, np.full(nbrs.size, i, dtype=np.int64), np.ones(1, dtype=bool)
        diff = self.positions[tx][:, None, :] - self.positions[None, :, :]
        d2 = np.einsum("kij,kij->ki", diff, diff)
        within = d2 < self.radius * self.radius          # condition (1)
        guarded = d2 <= self.guard * self.guard          # violates condition (2)
        guard_count = guarded.sum(axis=0)
        is_tx = np.zeros(self.n, dtype=bool)
        is_tx[tx] = True
        # decode possible only where exactly one transmitter is inside the guard zone
        clear = (guard_count == 1) & ~is_tx
        receivers, senders = [], []
        success = np.empty(k, dtype=bool)
        for a in range(k):
            rx = np.flatnonzero(within[a] & clear)
            if rx.size:
                receivers.append(rx)
                senders.append(np.full(rx.size, tx[a], dtype=np.int64))
            nbrs = self.neighbors(int(tx[a]))
            success[a] = bool(np.all(clear[nbrs])) if nbrs.size else True
        if receivers:
            return np.concatenate(receivers), np.concatenate(senders), success
        return empty, empty, success

    def resolve_arrays(self, transmitters: np.ndarray):
        """Resolve a slot, dense form: (decoded, success) with decoded[j] the
        transmitter id decoded by node j or -1."""
        tx = np.asarray(transmitters, dtype=np.int64)
        decoded = np.full(self.n, -1, dtype=np.int64)
        receivers, senders, success = self.resolve_compact(tx)
        decoded[receivers] = senders
        return decoded, success

    def resolve(self, transmitters) -> SlotOutcome:
        tx = np.asarray(sorted(int(t) for t in transmitters), dtype=np.int64)
        receivers, senders, success = self.resolve_compact(tx)
        return SlotOutcome(
            transmitters=tx,
            decoded={int(j): int(i) for j, i in zip(receivers, senders)},
            tx_success={int(tx[a]): bool(success[a]) for a in range(tx.size)},
        )


def resolve_slot(transmitters, dep: Deployment, radio: RadioParams) -> SlotOutcome:
    """One-off slot resolution (builds the spatial structures on the fly)."""
    return SlotResolver(dep, radio).resolve(transmitters)
