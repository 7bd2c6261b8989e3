"""Seeded sweep with scaling fits and report files.

Runs a small one-shot sweep across three network sizes, fits the sink time
against sqrt(n / ln n) and the phase-1 time against ln^2 n, and writes the
csv/json/svg reports that the `alohamax sweep` command would produce.

Run:  python3 demos/06_scaling_sweep.py
"""

import os

from alohamax import ExperimentConfig, fit_scaling, report, run_config

OUT_DIR = os.path.join(os.path.dirname(__file__), "out")

cfg = ExperimentConfig(
    protocol="one_shot",
    n_list=[250, 500, 1000],
    seeds=list(range(1, 11)),
    data_mode="single_far_corner",
)
records = run_config(cfg)
print(f"ran {len(records)} seeded simulations "
      f"({len(cfg.n_list)} sizes x {len(cfg.seeds)} seeds)")

for metric, model in (("t_sink", "sqrt_n_over_log"), ("t_phase1", "log2"),
                      ("total_tx", "n_three_halves")):
    fit = fit_scaling(records, metric, model)
    ratios = "  ".join(f"n={n}: {r:.1f}" for n, r in fit.median_ratio.items())
    print(f"{metric:9s} / {model:16s} spread {fit.spread:.2f}   [{ratios}]")

os.makedirs(OUT_DIR, exist_ok=True)
paths = report(records, os.path.join(OUT_DIR, "sweep"), formats=("csv", "json", "svg"))
print("wrote:")
for path in paths:
    print(" ", path)
