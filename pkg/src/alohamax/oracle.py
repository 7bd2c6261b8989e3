"""Independent ground-truth computations used by tests and acceptance checks."""

from __future__ import annotations

from collections import deque

import numpy as np

from .geomnet import Deployment, disk_adjacency

UNREACHABLE = -1


def bfs_hops(dep: Deployment, radius: float) -> np.ndarray:
    """Minimum hop counts from the sink on the disk graph (edges at distance < radius).

    Unreachable nodes are marked UNREACHABLE (-1).
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    indptr, indices = disk_adjacency(dep.positions, radius)
    hops = np.full(dep.n, UNREACHABLE, dtype=np.int64)
    hops[dep.sink_id] = 0
    queue = deque([dep.sink_id])
    while queue:
        u = queue.popleft()
        for v in indices[indptr[u]:indptr[u + 1]]:
            if hops[v] < 0:
                hops[v] = hops[u] + 1
                queue.append(v)
    return hops


def brute_max(data) -> int:
    """MAX of a bit vector (the OR of all bits)."""
    arr = np.asarray(data)
    if arr.size == 0:
        raise ValueError("empty data vector")
    return int(arr.max())


def pipelined_reference(data_stream: np.ndarray, d: int) -> np.ndarray:
    """Expected sink outputs for a pipelined run with pipeline depth d.

    data_stream has shape (rounds, n): one bit per node per round. The output
    emitted in round r (r > d) is the network MAX of the round r-d data, so with
    R rounds of data the reference covers data rounds 1..R-d.
    """
    stream = np.asarray(data_stream)
    rounds = stream.shape[0]
    if rounds <= d:
        raise ValueError("data stream must be longer than the pipeline depth")
    return stream[: rounds - d].max(axis=1).astype(np.int64)
