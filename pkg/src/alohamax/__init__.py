"""Simulator and analysis toolkit for in-network MAX computation over
structure-free random multihop wireless networks under slotted Aloha."""

from .geomnet import (C1_OCCUPANCY, C2_OCCUPANCY, MIN_NODES, Deployment,
                      RadioParams, TessellationGrid, cell_indices, cell_of,
                      connectivity, deploy, disk_adjacency, occupancy_profile,
                      radio_params, tessellate)
from .macsim import SlotOutcome, SlotResolver, resolve_slot, sample_slot_transmitters
from .protocols import (HopResult, OneShotResult, PipelinedResult, gen_data,
                        hop_distance_run, one_shot_run, pipelined_run)
from .bounds import (AnalysisConstants, DominanceReport, PhaseBounds,
                     analysis_constants, chain_threshold, cm, dominance_check,
                     mgf_tc_closed, mgf_tcol_closed, phase_bounds,
                     sample_coverage_rounds, sample_tc, sample_tcol, s1_tilt,
                     s2_tilt, v1_bound, v2_bound, v3_bound)
from .oracle import UNREACHABLE, bfs_hops, brute_max, pipelined_reference
from .harness import (CSV_FIELDS, CSV_HEADER, ConfigError, ExperimentConfig,
                      RunRecord, ScalingFit, calibrate_phase1, default_max_slots,
                      fit_scaling, load_config, records_from_json, records_to_csv,
                      records_to_json, report, resolve_radio, resolve_tau,
                      run_cell, run_config)

__version__ = "0.1.0"
