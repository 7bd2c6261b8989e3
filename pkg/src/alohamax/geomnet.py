"""Random node deployment on the unit square, cell tessellation and radio parameters.

Everything downstream (MAC resolution, protocols, analytic bounds) is driven by
the quantities derived here: cell side, transmission radius, interference-square
size and the per-slot transmit probability.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

# Cell-occupancy bound constants: with the tessellation and radius below, every
# cell holds between C1_OCCUPANCY*ln(n) and C2_OCCUPANCY*ln(n) nodes w.h.p.
C1_OCCUPANCY = 0.091
C2_OCCUPANCY = 5.41

# Node counts below this give a degenerate (single-cell) tessellation.
MIN_NODES = 16


@dataclass(frozen=True)
class Deployment:
    """n node positions on [0,1]^2 with the sink pinned at the origin."""

    n: int
    positions: np.ndarray  # shape (n, 2), float64; row 0 is the sink
    seed: int
    sink_id: int = 0

    def __post_init__(self):
        if self.positions.shape != (self.n, 2):
            raise ValueError("positions must have shape (n, 2)")


@dataclass(frozen=True)
class TessellationGrid:
    """Square-cell tessellation of the unit square."""

    cells_per_side: int   # rows = columns of cells
    cell_side: float      # exactly 1 / cells_per_side
    cell_count: int       # cells_per_side ** 2


@dataclass(frozen=True)
class RadioParams:
    """Protocol-model radio configuration for an n-node deployment."""

    radius: float             # transmission radius
    delta_prime: float        # receiver guard margin, >= 0
    delta: float              # 1 + delta_prime (transmitter-side sufficient margin)
    interference_cells: int   # cells in the interference square around a cell
    tx_prob: float            # per-slot transmit probability

    @property
    def covers_unit_square(self) -> bool:
        """True when the radius exceeds the unit-square diagonal (all nodes mutually in range)."""
        return self.radius > math.sqrt(2.0)


def deploy(n: int, seed: int) -> Deployment:
    """Place node 0 at the origin and nodes 1..n-1 i.i.d. uniform on the unit square.

    Deterministic: identical (n, seed) yields bit-identical positions.
    """
    if n < MIN_NODES:
        raise ValueError("network too small for tessellation")
    rng = np.random.default_rng(np.random.SeedSequence([int(n), int(seed)]))
    positions = np.empty((n, 2), dtype=np.float64)
    positions[0] = (0.0, 0.0)
    positions[1:] = rng.random((n - 1, 2))
    positions.setflags(write=False)
    return Deployment(n=n, positions=positions, seed=int(seed))


def tessellate(n: int) -> TessellationGrid:
    """Grid parameters for n nodes: ceil(sqrt(n / (2.75 ln n))) cells per side."""
    if n < MIN_NODES:
        raise ValueError("network too small for tessellation")
    side = math.ceil(math.sqrt(n / (2.75 * math.log(n))))
    return TessellationGrid(cells_per_side=side, cell_side=1.0 / side, cell_count=side * side)


def radio_params(n: int, delta_prime: float = 0.0) -> RadioParams:
    """Radius sqrt(13.75 ln n / n), interference-square size and the transmit probability.

    The transmit probability 1/(k1 * C2 * ln n) maximises the guaranteed per-cell
    success probability; k1 counts the cells that can hold interferers.
    """
    if n < MIN_NODES:
        raise ValueError("network too small for tessellation")
    if delta_prime < 0:
        raise ValueError("delta_prime must be >= 0")
    grid = tessellate(n)
    radius = math.sqrt(13.75 * math.log(n) / n)
    delta = 1.0 + delta_prime
    k1 = (2 * math.ceil((1.0 + delta) * radius / grid.cell_side) + 1) ** 2
    p = 1.0 / (k1 * C2_OCCUPANCY * math.log(n))
    return RadioParams(radius=radius, delta_prime=delta_prime, delta=delta,
                       interference_cells=k1, tx_prob=p)


def cell_of(point, grid: TessellationGrid) -> int:
    """Flattened cell index of a point; top-edge coordinates cap into the last cell."""
    x, y = float(point[0]), float(point[1])
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ValueError(f"point {(x, y)} outside the unit square")
    side = grid.cells_per_side
    cx = min(int(x * side), side - 1)
    cy = min(int(y * side), side - 1)
    return cy * side + cx


def cell_indices(dep: Deployment, grid: TessellationGrid) -> np.ndarray:
    """Flattened cell index for every node (vectorised cell_of)."""
    side = grid.cells_per_side
    scaled = np.floor(dep.positions * side).astype(np.int64)
    np.clip(scaled, 0, side - 1, out=scaled)
    return scaled[:, 1] * side + scaled[:, 0]


def occupancy_profile(dep: Deployment, grid: TessellationGrid):
    """Per-cell node counts and whether all of them sit inside the occupancy band.

    Returns (counts, within_band) where counts[c] is the number of nodes in cell c
    and within_band is True iff C1*ln n <= counts[c] <= C2*ln n for every cell.
    """
    expected = tessellate(dep.n)
    if expected.cells_per_side != grid.cells_per_side:
        raise ValueError("grid does not match deployment size")
    counts = np.bincount(cell_indices(dep, grid), minlength=grid.cell_count)
    log_n = math.log(dep.n)
    lo, hi = C1_OCCUPANCY * log_n, C2_OCCUPANCY * log_n
    within = bool(np.all((counts >= lo) & (counts <= hi)))
    return counts, within


def disk_adjacency(positions: np.ndarray, radius: float):
    """CSR-style neighbor lists of the disk graph with edges at distance < radius.

    Returns (indptr, indices): neighbors of node i are indices[indptr[i]:indptr[i+1]].
    """
    n = positions.shape[0]
    pairs = cKDTree(positions).query_pairs(radius, output_type="ndarray")
    if pairs.size:
        diffs = positions[pairs[:, 0]] - positions[pairs[:, 1]]
        # query_pairs uses <=; the protocol model wants strict inequality
        strict = np.einsum("ij,ij->i", diffs, diffs) < radius * radius
        pairs = pairs[strict]
    both = np.concatenate([pairs, pairs[:, ::-1]]) if pairs.size else pairs.reshape(0, 2)
    order = np.lexsort((both[:, 1], both[:, 0]))
    both = both[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, both[:, 0] + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, both[:, 1].copy()


def connectivity(dep: Deployment, radius: float):
    """Breadth-first connectivity of the disk graph.

    Returns (connected, component_sizes) with sizes sorted descending.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    indptr, indices = disk_adjacency(dep.positions, radius)
    n = dep.n
    label = np.full(n, -1, dtype=np.int64)
    sizes = []
    for start in range(n):
        if label[start] >= 0:
            continue
        comp = len(sizes)
        label[start] = comp
        queue = deque([start])
        size = 1
        while queue:
            u = queue.popleft()
            for v in indices[indptr[u]:indptr[u + 1]]:
                if label[v] < 0:
                    label[v] = comp
                    size += 1
                    queue.append(v)
        sizes.append(size)
    sizes.sort(reverse=True)
    return len(sizes) == 1, sizes
