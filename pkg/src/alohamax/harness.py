"""Experiment configuration, Monte Carlo sweeps, scaling fits and reports.

A sweep is a pure function of its config: deployments derive from (n, seed),
per-run dynamics streams from (master_seed, n, seed, stream tag). Re-running a
config reproduces every output byte for byte, sequentially or in parallel.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import bounds as bnd
from .geomnet import MIN_NODES, RadioParams, deploy, radio_params, tessellate
from .oracle import bfs_hops, pipelined_reference
from .protocols import gen_data, hop_distance_run, one_shot_run, pipelined_run

PROTOCOLS = ("one_shot", "hops", "pipelined", "bounds")
CSV_HEADER = ("protocol,n,seed,p,tau,T_phase1,T_sink,T_all,total_tx,"
              "correct,hop_match_frac,rounds_ok,rounds_total,wallclock_ms")
CSV_FIELDS = ("protocol", "n", "seed", "p", "tau", "t_phase1", "t_sink", "t_all",
              "total_tx", "correct", "hop_match_frac", "rounds_ok", "rounds_total",
              "wallclock_ms")

# stream tags keeping the per-run RNG streams disjoint
_TAG_DATA, _TAG_RUN, _TAG_CAL = 1, 2, 3
_CAL_DEPLOY_OFFSET = 90_000


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    protocol: str
    n_list: list
    seeds: list
    master_seed: int = 0
    delta_prime: float = 0.0
    p_policy: object = "paper"                    # "paper" | {"override": p}
    tau_policy: object = field(default_factory=lambda: {"analytic": {"alpha": 1.0, "k": 1.0}})
    data_mode: object = "single_far_corner"       # | "all_zero" | {"bernoulli": q}
    rounds: int = 0
    max_slots: int | None = None
    until: str = "all"                            # one-shot stop: all | sink | phase1
    sample_mode: str = "skip"
    hops_source: str = "bfs"                      # bfs | protocol
    calibration_runs: int = 30
    workers: int = 1
    include_wallclock: bool = False
    out: str | None = None
    formats: list = field(default_factory=lambda: ["csv"])

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol: {self.protocol!r}")
        if not self.n_list or any(int(n) < MIN_NODES for n in self.n_list):
            raise ConfigError(f"n_list entries must be >= {MIN_NODES}")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if self.delta_prime < 0:
            raise ConfigError("delta_prime must be >= 0")
        if isinstance(self.p_policy, dict):
            keys = set(self.p_policy)
            if keys != {"override"} or not 0.0 < float(self.p_policy["override"]) < 1.0:
                raise ConfigError("p_policy override needs a probability in (0, 1)")
        elif self.p_policy != "paper":
            raise ConfigError(f"unknown p_policy: {self.p_policy!r}")
        if not isinstance(self.tau_policy, dict) or len(self.tau_policy) != 1:
            raise ConfigError("tau_policy must name exactly one policy")
        kind = next(iter(self.tau_policy))
        if kind == "analytic":
            spec = self.tau_policy["analytic"]
            if float(spec.get("alpha", 1.0)) <= 0 or float(spec.get("k", 1.0)) <= 0:
                raise ConfigError("analytic tau needs alpha > 0 and k > 0")
            if not 0.0 < float(spec.get("fraction", 1.0)) <= 1.0:
                raise ConfigError("analytic tau fraction must be in (0, 1]")
        elif kind == "empirical_quantile":
            q = float(self.tau_policy["empirical_quantile"])
            if not 0.0 < q < 1.0:
                raise ConfigError("empirical_quantile needs q in (0, 1)")
        else:
            raise ConfigError(f"unknown tau_policy: {kind!r}")
        if isinstance(self.data_mode, dict):
            if set(self.data_mode) != {"bernoulli"}:
                raise ConfigError(f"unknown data_mode: {self.data_mode!r}")
            if not 0.0 <= float(self.data_mode["bernoulli"]) <= 1.0:
                raise ConfigError("bernoulli data_mode needs q in [0, 1]")
        elif self.data_mode not in ("single_far_corner", "all_zero"):
            raise ConfigError(f"unknown data_mode: {self.data_mode!r}")
        if self.protocol == "pipelined" and self.rounds < 1:
            raise ConfigError("pipelined sweeps need rounds >= 1")
        if self.until not in ("all", "sink", "phase1"):
            raise ConfigError(f"unknown until: {self.until!r}")
        if self.sample_mode not in ("skip", "naive"):
            raise ConfigError(f"unknown sample_mode: {self.sample_mode!r}")
        if self.hops_source not in ("bfs", "protocol"):
            raise ConfigError(f"unknown hops_source: {self.hops_source!r}")
        if self.calibration_runs < 1:
            raise ConfigError("calibration_runs must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        unknown = [f for f in self.formats if f not in ("csv", "json", "svg")]
        if unknown:
            raise ConfigError(f"unknown report formats: {unknown}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        if "protocol" not in raw or "n_list" not in raw or "seeds" not in raw:
            raise ConfigError("config requires protocol, n_list and seeds")
        cfg = cls(**raw)
        cfg.validate()
        return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    return ExperimentConfig.from_dict(raw)


@dataclass
class RunRecord:
    protocol: str
    n: int
    seed: int
    p: float | None = None
    tau: int | None = None
    t_phase1: int | None = None
    t_sink: int | None = None
    t_all: int | None = None
    total_tx: int | None = None
    correct: bool | None = None
    hop_match_frac: float | None = None
    rounds_ok: int | None = None
    rounds_total: int | None = None
    wallclock_ms: float | None = None
    completed: bool = True
    payload: dict = field(default_factory=dict)   # rich per-run extras, not serialized


def resolve_radio(cfg: ExperimentConfig, n: int) -> RadioParams:
    radio = radio_params(n, cfg.delta_prime)
    if isinstance(cfg.p_policy, dict):
        radio = RadioParams(radius=radio.radius, delta_prime=radio.delta_prime,
                            delta=radio.delta,
                            interference_cells=radio.interference_cells,
                            tx_prob=float(cfg.p_policy["override"]))
    return radio


def default_max_slots(n: int, delta_prime: float = 0.0) -> int:
    pb = bnd.phase_bounds(n, 1.0, 1.0, delta_prime)
    return 4 * (pb.v1 + pb.v2 + pb.v3)


def _run_rng(cfg: ExperimentConfig, n: int, seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([int(cfg.master_seed), int(n), int(seed), tag]))


def calibrate_phase1(cfg: ExperimentConfig, n: int) -> np.ndarray:
    """Phase-1 completion slots over the calibration runs for one n."""
    radio = resolve_radio(cfg, n)
    cap = cfg.max_slots if cfg.max_slots is not None else default_max_slots(n, cfg.delta_prime)
    samples = np.empty(cfg.calibration_runs, dtype=np.int64)
    for i in range(cfg.calibration_runs):
        cal_seed = i + 1
        dep = deploy(n, _CAL_DEPLOY_OFFSET + cal_seed)
        rng = _run_rng(cfg, n, cal_seed, _TAG_CAL)
        res = one_shot_run(dep, radio, np.zeros(n, dtype=np.int64), rng,
                           max_slots=cap, mode=cfg.sample_mode, until="phase1")
        samples[i] = res.phase1_slot if res.phase1_slot is not None else cap
    return samples


def resolve_tau(cfg: ExperimentConfig, n: int) -> int:
    kind = next(iter(cfg.tau_policy))
    if kind == "analytic":
        spec = cfg.tau_policy["analytic"]
        v1 = bnd.v1_bound(n, float(spec.get("alpha", 1.0)), float(spec.get("k", 1.0)),
                          cfg.delta_prime)
        return max(1, int(math.ceil(v1 * float(spec.get("fraction", 1.0)))))
    q = float(cfg.tau_policy["empirical_quantile"])
    samples = calibrate_phase1(cfg, n)
    return int(np.quantile(samples, q, method="higher"))


def _gen_round_stream(dep, cfg: ExperimentConfig, rng, rounds: int) -> np.ndarray:
    mode = cfg.data_mode
    if isinstance(mode, dict):
        q = float(mode["bernoulli"])
        return np.stack([gen_data(dep, "bernoulli", rng, q) for _ in range(rounds)])
    return np.stack([gen_data(dep, mode, rng) for _ in range(rounds)])


def run_cell(cfg: ExperimentConfig, n: int, seed: int, tau: int | None) -> RunRecord:
    """Execute one (n, seed) cell of a sweep. tau is pre-resolved per n."""
    started = time.perf_counter()
    rec = RunRecord(protocol=cfg.protocol, n=n, seed=seed)

    if cfg.protocol == "bounds":
        consts = bnd.analysis_constants(n, cfg.delta_prime)
        pb = bnd.phase_bounds(n, delta_prime=cfg.delta_prime)
        rec.p = consts.tx_prob
        rec.tau = pb.v1
        rec.payload = {"constants": consts, "phase_bounds": pb}
        rec.wallclock_ms = (time.perf_counter() - started) * 1e3
        return rec

    dep = deploy(n, seed)
    radio = resolve_radio(cfg, n)
    rec.p = radio.tx_prob
    rng = _run_rng(cfg, n, seed, _TAG_RUN)
    data_rng = _run_rng(cfg, n, seed, _TAG_DATA)

    if cfg.protocol == "one_shot":
        if isinstance(cfg.data_mode, dict):
            data = gen_data(dep, "bernoulli", data_rng, float(cfg.data_mode["bernoulli"]))
        else:
            data = gen_data(dep, cfg.data_mode, data_rng)
        cap = cfg.max_slots if cfg.max_slots is not None else default_max_slots(n, cfg.delta_prime)
        res = one_shot_run(dep, radio, data, rng, max_slots=cap,
                           mode=cfg.sample_mode, until=cfg.until)
        rec.t_phase1 = res.phase1_slot
        rec.t_sink = res.sink_slot
        rec.t_all = res.all_slot
        rec.total_tx = res.total_tx
        rec.correct = res.sink_value == res.data_max
        rec.completed = res.completed
        rec.payload = {"result": res}
    elif cfg.protocol == "hops":
        res = hop_distance_run(dep, radio, tau, rng)
        reference = bfs_hops(dep, radio.radius)
        rec.tau = tau
        rec.total_tx = res.total_tx
        rec.hop_match_frac = float((res.hops == reference).mean())
        rec.correct = bool((res.hops == reference).all())
        rec.payload = {"result": res, "bfs": reference}
    elif cfg.protocol == "pipelined":
        if cfg.hops_source == "protocol":
            hop_rng = _run_rng(cfg, n, seed, _TAG_RUN + 10)
            hops = hop_distance_run(dep, radio, tau, hop_rng).hops
        else:
            hops = bfs_hops(dep, radio.radius)
        stream = _gen_round_stream(dep, cfg, data_rng, cfg.rounds)
        res = pipelined_run(dep, radio, hops, tau, cfg.rounds, stream, rng,
                            mode=cfg.sample_mode)
        rec.tau = tau
        rec.total_tx = int(res.round_tx.sum())
        if res.outputs.size:
            ref = pipelined_reference(stream, res.pipeline_depth)
            rec.rounds_ok = int((res.outputs == ref).sum())
            rec.rounds_total = int(res.outputs.size)
            rec.correct = rec.rounds_ok == rec.rounds_total
        rec.payload = {"result": res, "hops": hops, "stream": stream}

    rec.wallclock_ms = (time.perf_counter() - started) * 1e3
    return rec


def _run_cell_args(args) -> RunRecord:
    return run_cell(*args)


def run_config(cfg: ExperimentConfig) -> list[RunRecord]:
    """Execute the n_list x seeds cross product; records follow config order."""
    cfg.validate()
    needs_tau = cfg.protocol in ("hops", "pipelined")
    taus = {int(n): (resolve_tau(cfg, int(n)) if needs_tau else None) for n in cfg.n_list}
    cells = [(cfg, int(n), int(seed), taus[int(n)])
             for n in cfg.n_list for seed in cfg.seeds]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_run_cell_args, cells))
    return [run_cell(*cell) for cell in cells]


# ---------------------------------------------------------------------------
# Scaling fits
# ---------------------------------------------------------------------------

SCALING_MODELS = {
    "sqrt_n_over_log": lambda n: math.sqrt(n / math.log(n)),
    "log2": lambda n: math.log(n) ** 2,
    "n_three_halves": lambda n: (n / math.log(n)) ** 1.5,
    "n_log_n": lambda n: n * math.log(n),
}


@dataclass
class ScalingFit:
    metric: str
    model: str
    median_ratio: dict   # n -> median(metric) / model(n)
    spread: float        # max ratio / min ratio across n


def fit_scaling(records, metric: str, model: str) -> ScalingFit:
    """Median metric/model(n) per n and the max/min spread across n."""
    if model not in SCALING_MODELS:
        raise ValueError(f"unknown scaling model: {model!r}")
    fn = SCALING_MODELS[model]
    by_n: dict = {}
    for rec in records:
        value = getattr(rec, metric, None)
        if value is None:
            continue
        by_n.setdefault(rec.n, []).append(float(value))
    if len(by_n) < 3:
        raise ValueError("fit_scaling needs at least 3 distinct n values")
    ratios = {n: float(np.median(vals)) / fn(n) for n, vals in sorted(by_n.items())}
    values = list(ratios.values())
    return ScalingFit(metric=metric, model=model, median_ratio=ratios,
                      spread=max(values) / min(values))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _record_cells(rec: RunRecord, include_wallclock: bool) -> list:
    cells = [getattr(rec, name) for name in CSV_FIELDS]
    if not include_wallclock:
        cells[-1] = None
    return cells


def records_to_csv(records, include_wallclock: bool = False) -> str:
    lines = [CSV_HEADER]
    for rec in records:
        lines.append(",".join(_csv_value(v) for v in _record_cells(rec, include_wallclock)))
    return "\n".join(lines) + "\n"


def records_to_json(records, include_wallclock: bool = False) -> str:
    rows = [dict(zip(CSV_FIELDS, _record_cells(rec, include_wallclock)))
            for rec in records]
    return json.dumps({"records": rows}, indent=2) + "\n"


def records_from_json(path: str) -> list[RunRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    records = []
    for row in raw.get("records", []):
        rec = RunRecord(protocol=row["protocol"], n=int(row["n"]), seed=int(row["seed"]))
        for name in CSV_FIELDS[3:]:
            setattr(rec, name, row.get(name))
        records.append(rec)
    return records


SVG_METRICS = {
    "one_shot": (("t_sink", "sqrt_n_over_log"), ("t_phase1", "log2"),
                 ("t_all", "sqrt_n_over_log"), ("total_tx", "n_three_halves")),
    "hops": (("hop_match_frac", None), ("total_tx", None)),
    "pipelined": (("total_tx", "n_log_n"), ("rounds_ok", None)),
    "bounds": (("tau", "log2"),),
}


def _svg_scatter(points, model_name: str | None, title: str) -> str:
    """Minimal deterministic log-log scatter with an optional model overlay."""
    width, height, margin = 640, 480, 60
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([max(p[1], 1e-12) for p in points], dtype=float)
    lx, ly = np.log10(xs), np.log10(ys)
    x0, x1 = float(lx.min()), float(lx.max())
    y0, y1 = float(ly.min()), float(ly.max())
    if x1 - x0 < 1e-9:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 - y0 < 1e-9:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(v):
        return margin + (v - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - y0) / (y1 - y0) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        'stroke="black"/>',
    ]
    if model_name is not None:
        fn = SCALING_MODELS[model_name]
        # anchor the overlay to the median point at the smallest n
        n_min = float(xs.min())
        anchor = float(np.median(ys[xs == n_min]))
        scale = anchor / fn(n_min)
        grid_x = np.linspace(x0, x1, 64)
        pts = " ".join(f"{sx(v):.2f},{sy(math.log10(max(scale * fn(10 ** v), 1e-12))):.2f}"
                       for v in grid_x)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#cc3333" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{width - margin:.1f}" y="{margin - 10:.1f}" '
                     f'text-anchor="end" font-size="11" fill="#cc3333">{model_name}</text>')
    for x, y in zip(lx, ly):
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                     'fill="#3366cc" fill-opacity="0.6"/>')
    for v in range(math.ceil(x0), math.floor(x1) + 1):
        parts.append(f'<text x="{sx(v):.2f}" y="{height - margin + 18:.1f}" '
                     f'text-anchor="middle" font-size="11">1e{v}</text>')
    for v in range(math.ceil(y0), math.floor(y1) + 1):
        parts.append(f'<text x="{margin - 8:.1f}" y="{sy(v) + 4:.2f}" '
                     f'text-anchor="end" font-size="11">1e{v}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def report(records, stem: str, formats=("csv",), include_wallclock: bool = False) -> list[str]:
    """Write the records in the requested formats; returns the paths written."""
    if not records:
        raise ValueError("no records to report")
    written = []
    try:
        if "csv" in formats:
            path = f"{stem}.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(records_to_csv(records, include_wallclock))
            written.append(path)
        if "json" in formats:
            path = f"{stem}.json"
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(records_to_json(records, include_wallclock))
            written.append(path)
        if "svg" in formats:
            protocols = sorted({rec.protocol for rec in records})
            for protocol in protocols:
                recs = [r for r in records if r.protocol == protocol]
                for metric, model in SVG_METRICS[protocol]:
                    points = [(r.n, getattr(r, metric)) for r in recs
                              if getattr(r, metric) is not None]
                    if not points:
                        continue
                    path = f"{stem}_{protocol}_{metric}.svg"
                    with open(path, "w", encoding="utf-8") as fh:
                        fh.write(_svg_scatter(points, model, f"{protocol}: {metric} vs n"))
                    written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write report output: {exc.filename or stem}") from exc
    return written
