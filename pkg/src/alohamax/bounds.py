"""Closed forms and Monte Carlo samplers for the completion-time analysis.

The one-shot diffusion analysis splits completion into three phases (full
per-cell coverage, per-column descent, lateral progress into the sink cell)
and bounds each phase by sums of geometric random variables via a
coupon-collector construction. This module evaluates the resulting Chernoff
slot thresholds exactly (log domain, log-gamma) and provides samplers for the
dominating random variables plus an empirical stochastic-dominance check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geomnet import C1_OCCUPANCY, C2_OCCUPANCY, radio_params, tessellate


@dataclass(frozen=True)
class AnalysisConstants:
    """All n-derived analytic quantities in one place."""

    n: int
    c1: float
    c2: float
    max_cell_nodes: int       # m: upper bound on the per-cell node count
    interference_cells: int   # k1
    tx_prob: float            # p
    cell_success_prob: float  # p_S: per-slot success probability from any cell
    cells_per_side: int       # l_n
    cell_count: int           # M_n
    column_chain_len: int     # w = l_n - 1 descent stages per column
    hop_bound: int            # d = 2 * l_n, max hop distance under occupancy


@dataclass(frozen=True)
class PhaseBounds:
    """Slot thresholds V1/V2/V3 for confidence 1 - k/n^alpha."""

    v1: int
    v2: int
    v3: int
    alpha: float
    k: float
    s1: float  # exponential tilt used in the phase-1 Chernoff bound
    s2: float  # tilt used in phases 2 and 3


def analysis_constants(n: int, delta_prime: float = 0.0) -> AnalysisConstants:
    grid = tessellate(n)
    radio = radio_params(n, delta_prime)
    k1 = radio.interference_cells
    p_s = C1_OCCUPANCY / (k1 * C2_OCCUPANCY * math.e)
    return AnalysisConstants(
        n=n,
        c1=C1_OCCUPANCY,
        c2=C2_OCCUPANCY,
        max_cell_nodes=math.ceil(C2_OCCUPANCY * math.log(n)),
        interference_cells=k1,
        tx_prob=radio.tx_prob,
        cell_success_prob=p_s,
        cells_per_side=grid.cells_per_side,
        cell_count=grid.cell_count,
        column_chain_len=grid.cells_per_side - 1,
        hop_bound=2 * grid.cells_per_side,
    )


def cm(m: int) -> float:
    """Central-binomial correction 4^m / (C(2m, m) sqrt(pi m)); > 1 and -> 1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    log_value = (2 * m * math.log(2.0)
                 - math.lgamma(2 * m + 1) + 2 * math.lgamma(m + 1)
                 - 0.5 * math.log(math.pi * m))
    return math.exp(log_value)


def s1_tilt(m: int, p_s: float) -> float:
    """Tilt ln(1 / (1 - p_s/2m)) at which the coverage-time mgf has a closed form."""
    return -math.log1p(-p_s / (2.0 * m))


def s2_tilt(p_s: float) -> float:
    """Tilt ln(1 / (1 - p_s/2)) used for the descent-chain mgf."""
    return -math.log1p(-p_s / 2.0)


def mgf_tc_closed(m: int, p_s: float) -> float:
    """E[exp(s1 * T_cover)] at the s1 tilt: exactly cm(m) * sqrt(pi m).

    Independent of p_s; the argument is retained for interface symmetry with
    the sampler and validated.
    """
    if not 0.0 < p_s <= 1.0:
        raise ValueError("p_s must be in (0, 1]")
    return cm(m) * math.sqrt(math.pi * m)


def mgf_tcol_closed(w: int) -> float:
    """E[exp(s2 * T_chain)] for a w-stage chain at the s2 tilt: exactly 2^w."""
    return 2.0 ** w


def _min_slots(numerator: float, denominator: float) -> int:
    if denominator <= 0:
        raise ValueError("degenerate tail rate")
    return max(1, math.ceil(numerator / denominator))


def v1_numerator(n: int, alpha: float, k: float, consts: AnalysisConstants) -> float:
    m = consts.max_cell_nodes
    return (0.5 * math.log(m) + math.log(consts.cell_count) + alpha * math.log(n)
            - math.log(k) + 0.5 * math.log(math.pi) + math.log(cm(m)))


def v1_bound(n: int, alpha: float = 1.0, k: float = 1.0,
             delta_prime: float = 0.0) -> int:
    """Smallest slot count after which every node in every cell has transmitted
    successfully at least once, with probability >= 1 - k/n^alpha."""
    if alpha <= 0 or k <= 0:
        raise ValueError("alpha and k must be positive")
    consts = analysis_constants(n, delta_prime)
    denom = s1_tilt(consts.max_cell_nodes, consts.cell_success_prob)
    return _min_slots(v1_numerator(n, alpha, k, consts), denom)


def chain_threshold(stages: int, p_s: float, n: int, alpha: float, k: float,
                    extra_log: float = 0.0) -> int:
    """Smallest V with extra * 2^stages * (1 - p_s/2)^V <= k / n^alpha.

    Shared tail computation for the per-column descent (extra = number of
    columns) and the final lateral progress into the sink cell (extra = 1).
    """
    numerator = alpha * math.log(n) + extra_log + stages * math.log(2.0) - math.log(k)
    return _min_slots(numerator, s2_tilt(p_s))


def v2_bound(n: int, alpha: float = 1.0, k: float = 1.0,
             delta_prime: float = 0.0) -> int:
    """Slot threshold for every column's top-to-bottom success chain."""
    if alpha <= 0 or k <= 0:
        raise ValueError("alpha and k must be positive")
    consts = analysis_constants(n, delta_prime)
    return chain_threshold(consts.column_chain_len, consts.cell_success_prob,
                           n, alpha, k, extra_log=math.log(consts.cells_per_side))


def v3_bound(n: int, alpha: float = 1.0, k: float = 1.0,
             delta_prime: float = 0.0) -> int:
    """Slot threshold for the bottom-row progress into the sink cell."""
    if alpha <= 0 or k <= 0:
        raise ValueError("alpha and k must be positive")
    consts = analysis_constants(n, delta_prime)
    return chain_threshold(consts.column_chain_len, consts.cell_success_prob,
                           n, alpha, k)


def phase_bounds(n: int, alpha: float = 1.0, k: float = 1.0,
                 delta_prime: float = 0.0) -> PhaseBounds:
    consts = analysis_constants(n, delta_prime)
    return PhaseBounds(
        v1=v1_bound(n, alpha, k, delta_prime),
        v2=v2_bound(n, alpha, k, delta_prime),
        v3=v3_bound(n, alpha, k, delta_prime),
        alpha=alpha,
        k=k,
        s1=s1_tilt(consts.max_cell_nodes, consts.cell_success_prob),
        s2=s2_tilt(consts.cell_success_prob),
    )


# ---------------------------------------------------------------------------
# Samplers for the dominating random variables. Geometric variables throughout
# are waiting times supported on {1, 2, ...}.
# ---------------------------------------------------------------------------

def sample_coverage_rounds(m: int, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Coupon-collector draw count: sum over l of Geom(1 - (l-1)/m)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    probs = 1.0 - np.arange(m) / m
    return rng.geometric(probs, size=(size, m)).sum(axis=1)


def sample_tc(m: int, p_s: float, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Dominating per-cell coverage time: sum of R Geom(p_s) with R the
    coupon-collector draw count over m coupons."""
    if not 0.0 < p_s <= 1.0:
        raise ValueError("p_s must be in (0, 1]")
    rounds = sample_coverage_rounds(m, rng, size)
    total = int(rounds.sum())
    waits = rng.geometric(p_s, size=total)
    bounds_idx = np.concatenate([[0], np.cumsum(rounds)[:-1]])
    return np.add.reduceat(waits, bounds_idx)


def sample_tcol(w: int, p_s: float, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Dominating column-chain time: sum of w independent Geom(p_s)."""
    if w < 1:
        raise ValueError("w must be >= 1")
    if not 0.0 < p_s <= 1.0:
        raise ValueError("p_s must be in (0, 1]")
    return rng.geometric(p_s, size=(size, w)).sum(axis=1)


@dataclass
class DominanceReport:
    """Empirical check of P(sim >= z) <= P(model >= z) at pooled quantiles."""

    z_values: np.ndarray
    sim_exceed: np.ndarray
    model_exceed: np.ndarray
    diff: np.ndarray       # sim_exceed - model_exceed; positive favours violation
    std_err: np.ndarray    # pooled binomial standard error of the difference
    flagged: np.ndarray    # diff > 3 * std_err

    @property
    def ok(self) -> bool:
        return not bool(self.flagged.any())


def dominance_check(sim_samples, model_samples, deciles=None) -> DominanceReport:
    """Compare exceedance probabilities of simulation vs dominating model.

    Evaluates P(X >= z) at the requested quantiles of the pooled samples and
    flags quantiles where the simulation exceeds the model by more than
    3 pooled binomial standard errors.
    """
    sim = np.asarray(sim_samples, dtype=np.float64)
    model = np.asarray(model_samples, dtype=np.float64)
    if sim.size == 0 or model.size == 0:
        raise ValueError("both sample sets must be nonempty")
    if deciles is None:
        deciles = np.arange(1, 10) / 10.0
    pooled = np.concatenate([sim, model])
    z = np.quantile(pooled, deciles, method="higher")
    sim_exceed = np.array([(sim >= zz).mean() for zz in z])
    model_exceed = np.array([(model >= zz).mean() for zz in z])
    pooled_rate = np.array([(pooled >= zz).mean() for zz in z])
    se = np.sqrt(pooled_rate * (1.0 - pooled_rate) * (1.0 / sim.size + 1.0 / model.size))
    diff = sim_exceed - model_exceed
    return DominanceReport(z_values=z, sim_exceed=sim_exceed, model_exceed=model_exceed,
                           diff=diff, std_err=se, flagged=diff > 3.0 * se)
