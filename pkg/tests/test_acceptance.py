"""End-to-end acceptance suite.

Each test prints one pass/fail line. The expensive sweeps are shared through
module-scoped fixtures; everything is seeded and deterministic.
"""

import math

import numpy as np
import pytest

from alohamax.bounds import (analysis_constants, dominance_check, mgf_tc_closed,
                             phase_bounds, s1_tilt, s2_tilt, sample_tc, sample_tcol)
from alohamax.harness import (ExperimentConfig, fit_scaling, records_to_csv,
                              records_to_json, run_cell, run_config)

MGF_SAMPLES = 100_000


def check(ok: bool, label: str, detail: str) -> None:
    print(f"[acceptance] {label}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{label}: {detail}"


# ---------------------------------------------------------------------------
# shared sweeps
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def correctness_sweep():
    """One-shot, standard transmit policy, worst-case data placement."""
    cfg = ExperimentConfig(protocol="one_shot", n_list=[250, 500, 1000],
                           seeds=list(range(1, 51)),
                           data_mode="single_far_corner")
    return cfg, run_config(cfg)


@pytest.fixture(scope="module")
def override_sweep():
    """One-shot sink-time sweep under the fixed override policy p = 1/(8 ln n)."""
    configs, records = [], []
    for n in (500, 1000, 2000, 4000):
        cfg = ExperimentConfig(protocol="one_shot", n_list=[n],
                               seeds=list(range(1, 31)),
                               p_policy={"override": 1.0 / (8.0 * math.log(n))},
                               data_mode="single_far_corner",
                               until="sink", max_slots=200_000)
        configs.append(cfg)
        records.extend(run_config(cfg))
    return configs, records


@pytest.fixture(scope="module")
def scaling_sweep():
    """One-shot, standard policy, across four network sizes."""
    cfg = ExperimentConfig(protocol="one_shot", n_list=[500, 1000, 2000, 4000],
                           seeds=list(range(1, 31)),
                           data_mode="single_far_corner")
    return cfg, run_config(cfg)


@pytest.fixture(scope="module")
def hop_sweep():
    cfg = ExperimentConfig(protocol="hops", n_list=[500],
                           seeds=list(range(1, 101)),
                           tau_policy={"empirical_quantile": 0.999},
                           calibration_runs=30)
    return cfg, run_config(cfg)


@pytest.fixture(scope="module")
def pipelined_sweep():
    cfg = ExperimentConfig(protocol="pipelined", n_list=[500], seeds=[1, 2, 3],
                           rounds=212,  # pipeline depth 12 + 200 emitted results
                           tau_policy={"empirical_quantile": 0.999},
                           calibration_runs=30,
                           data_mode={"bernoulli": 1.0 / 500})
    return cfg, run_config(cfg)


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def test_01_one_shot_correctness(correctness_sweep):
    _, records = correctness_sweep
    completed = [r for r in records if r.completed]
    correct = sum(r.correct for r in completed)
    check(len(records) == 150 and len(completed) == 150 and correct == 150,
          "01 one-shot correctness",
          f"{correct}/{len(completed)} completed runs deliver the true MAX "
          f"({len(records)} total)")


def test_02_sink_time_dominated_by_analytic_bounds(correctness_sweep):
    _, records = correctness_sweep
    budget = {n: sum((pb := phase_bounds(n)).v1 + pb.v2 + pb.v3
                     for _ in [0]) for n in (250, 500, 1000)}
    worst = max(r.t_sink / budget[r.n] for r in records)
    ok = all(r.t_sink <= budget[r.n] for r in records)
    check(ok, "02 bound domination",
          f"max T_sink/(V1+V2+V3) = {worst:.2e} over {len(records)} runs")


def test_03_sink_time_scaling_under_override_policy(override_sweep):
    _, records = override_sweep
    fit = fit_scaling(records, "t_sink", "sqrt_n_over_log")
    detail = ", ".join(f"n={n}: {r:.1f}" for n, r in fit.median_ratio.items())
    check(fit.spread < 2.0, "03 one-shot sink-time scaling",
          f"median T_sink/sqrt(n/ln n) spread {fit.spread:.2f} [{detail}]")


def test_04_phase1_scaling(scaling_sweep):
    _, records = scaling_sweep
    fit = fit_scaling(records, "t_phase1", "log2")
    detail = ", ".join(f"n={n}: {r:.0f}" for n, r in fit.median_ratio.items())
    check(fit.spread < 2.0, "04 phase-1 scaling",
          f"median T_phase1/ln^2(n) spread {fit.spread:.2f} [{detail}]")


def test_05_hop_distance_matches_bfs(hop_sweep):
    _, records = hop_sweep
    exact = sum(r.correct for r in records)
    never_below = True
    for r in records:
        hops = r.payload["result"].hops
        bfs = r.payload["bfs"]
        decided = hops >= 0
        if (hops[decided] < bfs[decided]).any():
            never_below = False
    check(exact >= 95 and never_below, "05 hop distance",
          f"{exact}/100 runs equal the BFS oracle exactly; "
          f"hop below BFS observed: {not never_below}; tau={records[0].tau}")


def test_06_pipelined_outputs(pipelined_sweep):
    _, records = pipelined_sweep
    flagged_bad = 0
    mismatches = 0
    total = 0
    for rec in records:
        res = rec.payload["result"]
        outputs = res.outputs
        d = res.pipeline_depth
        from alohamax.oracle import pipelined_reference
        ref = pipelined_reference(rec.payload["stream"], d)
        total += outputs.size
        mismatches += int((outputs != ref).sum())
        for v in range(1, outputs.size + 1):
            emission_round = v + d
            if res.round_full_success[emission_round - 1] and outputs[v - 1] != ref[v - 1]:
                flagged_bad += 1
    rate = mismatches / total
    check(flagged_bad == 0 and rate <= 0.01, "06 pipelined correctness",
          f"{mismatches}/{total} mismatched results ({rate:.2%}); "
          f"{flagged_bad} mismatches in rounds with full transmission coverage")


def test_07_mgf_identities():
    rng = np.random.default_rng(555)
    worst = 0.0
    p_s = 0.5
    for m in (1, 10, 38, 100):
        samples = sample_tc(m, p_s, rng, size=MGF_SAMPLES)
        vals = np.exp(s1_tilt(m, p_s) * samples)
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        z = abs(vals.mean() - mgf_tc_closed(m, p_s)) / se
        worst = max(worst, z)
        assert z < 3.0, f"coverage-time mgf off at m={m}: z={z:.2f}"
    for w in (1, 4, 7):
        samples = sample_tcol(w, p_s, rng, size=MGF_SAMPLES)
        vals = np.exp(s2_tilt(p_s) * samples)
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        z = abs(vals.mean() - 2.0 ** w) / se
        worst = max(worst, z)
        assert z < 3.0, f"chain mgf off at w={w}: z={z:.2f}"
    check(True, "07 mgf identities",
          f"all Monte Carlo estimates within 3 SE (worst |z|={worst:.2f}, "
          f"{MGF_SAMPLES} samples)")


def test_08_coverage_time_dominance(correctness_sweep):
    _, records = correctness_sweep
    sim = np.concatenate([r.payload["result"].cell_coverage_slots
                          for r in records if r.n == 1000])
    assert (sim > 0).all()
    consts = analysis_constants(1000)
    model = sample_tc(consts.max_cell_nodes, consts.cell_success_prob,
                      np.random.default_rng(808), size=20_000)
    rep = dominance_check(sim, model)
    check(rep.ok, "08 coverage-time dominance",
          f"no decile violation beyond 3 SE; max diff {rep.diff.max():+.4f} "
          f"({sim.size} simulated cells vs {model.size} model draws)")


def test_09_transmission_count_scaling(scaling_sweep):
    _, records = scaling_sweep
    fit = fit_scaling(records, "total_tx", "n_three_halves")
    one_shot_ok = fit.spread < 2.0

    tau_fraction = 2e-4
    ratios = {}
    for n in (500, 1000, 2000, 4000):
        cfg = ExperimentConfig(
            protocol="pipelined", n_list=[n], seeds=[1, 2], rounds=8,
            tau_policy={"analytic": {"alpha": 1.0, "k": 1.0,
                                     "fraction": tau_fraction}},
            data_mode="all_zero")
        per_round = np.concatenate([rec.payload["result"].round_tx
                                    for rec in run_config(cfg)])
        ratios[n] = float(np.median(per_round)) / (n * math.log(n))
    values = list(ratios.values())
    pipelined_spread = max(values) / min(values)
    detail = ", ".join(f"n={n}: {r:.2f}" for n, r in ratios.items())
    check(one_shot_ok and pipelined_spread < 2.0, "09 transmission-count scaling",
          f"one-shot total_tx/(n/ln n)^1.5 spread {fit.spread:.2f}; pipelined "
          f"per-round tx/(n ln n) spread {pipelined_spread:.2f} at tau fraction "
          f"{tau_fraction} [{detail}]")


def test_10_determinism(correctness_sweep, override_sweep, scaling_sweep,
                        hop_sweep, pipelined_sweep):
    # full double-run byte identity on scaled-down configs of every protocol,
    # including a parallel run
    small = [
        ExperimentConfig(protocol="one_shot", n_list=[64], seeds=[1, 2],
                         max_slots=300_000),
        ExperimentConfig(protocol="hops", n_list=[64], seeds=[1, 2],
                         tau_policy={"empirical_quantile": 0.9}, calibration_runs=3),
        ExperimentConfig(protocol="pipelined", n_list=[64], seeds=[1], rounds=14,
                         tau_policy={"analytic": {"alpha": 1.0, "k": 1.0,
                                                  "fraction": 2e-4}},
                         data_mode={"bernoulli": 0.05}),
        ExperimentConfig(protocol="bounds", n_list=[1000], seeds=[1]),
    ]
    for cfg in small:
        first = run_config(cfg)
        again = run_config(cfg)
        assert records_to_csv(first) == records_to_csv(again), cfg.protocol
        assert records_to_json(first) == records_to_json(again), cfg.protocol
    par_cfg = ExperimentConfig(protocol="one_shot", n_list=[64], seeds=[1, 2, 3, 4],
                               max_slots=300_000)
    assert records_to_csv(run_config(par_cfg)) == records_to_csv(
        run_config(ExperimentConfig(**{**par_cfg.to_dict(), "workers": 2})))

    # re-execute the first cell of every acceptance sweep and compare row bytes
    rerun_rows = 0
    for cfg, records in (correctness_sweep, (override_sweep[0][0], override_sweep[1]),
                         scaling_sweep, hop_sweep, pipelined_sweep):
        first = records[0]
        fresh = run_cell(cfg, first.n, first.seed, first.tau)
        row_a = records_to_csv([first]).split("\n")[1]
        row_b = records_to_csv([fresh]).split("\n")[1]
        assert row_a == row_b, f"re-executed {cfg.protocol} cell differs"
        rerun_rows += 1
    check(True, "10 determinism",
          f"double runs byte-identical for all protocols (incl. 2 workers); "
          f"{rerun_rows} sweep cells re-executed to identical CSV rows")
