"""Orchestration: thresholds -> lattice search -> score report."""
from __future__ import annotations

import os
import time
from dataclasses import dataclass

from .config import RunConfig
from .data import Dataset, ProbabilityModel
from .lattice import FlagRecord, SearchStats, search_frequent, search_infrequent
from .scoring import ScoreReport, build_report, validate_exponent
from .thresholds import MaxlenDecision, ThresholdProvider, determine_maxlen

CACHE_ENV = "SONO_CACHE_DIR"


@dataclass
class RunInfo:
    """Everything about a run that is not the scores themselves."""

    maxlen: int
    maxlen_rule: str
    violating_subset: tuple[int, ...] | None
    stats: SearchStats
    c_by_size: dict[int, dict[str, float]]
    saturated_tables: int
    runtime_s: float


def run_analysis(ds: Dataset, model: ProbabilityModel, cfg: RunConfig
                 ) -> tuple[ScoreReport, RunInfo, list[list[FlagRecord]]]:
    """Score a dataset under a configuration; pure function of its inputs."""
    cfg.validate(p=ds.p)
    validate_exponent(cfg.r)
    t0 = time.perf_counter()
    method = "exact" if cfg.oracle_nu else "auto"

    if cfg.max_len is not None:
        decision = MaxlenDecision(maxlen=min(cfg.max_len, ds.p),
                                  violating_subset=None, rule="manual")
    else:
        decision = determine_maxlen(model, ds.n, cfg.alpha, mode=cfg.mode,
                                    rule=cfg.maxlen_rule, method=method,
                                    max_cells=cfg.max_cells, threads=cfg.threads)

    provider = ThresholdProvider(model, ds.n, cfg.alpha, method=method,
                                 max_cells=cfg.max_cells,
                                 cache_dir=os.environ.get(CACHE_ENV))
    search = search_infrequent if cfg.mode == "infrequent" else search_frequent
    flag_sets, stats = search(ds, provider, decision.maxlen, prune=cfg.prune,
                              threads=cfg.threads)
    report = build_report(flag_sets, cfg.r, cfg.mode, decision.maxlen, ds.p)
    provider.flush_spill()
    info = RunInfo(
        maxlen=decision.maxlen,
        maxlen_rule=decision.rule,
        violating_subset=decision.violating_subset,
        stats=stats,
        c_by_size=provider.c_summary(),
        saturated_tables=provider.saturated_tables(),
        runtime_s=time.perf_counter() - t0,
    )
    return report, info, flag_sets
