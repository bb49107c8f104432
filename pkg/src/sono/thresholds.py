"""Per-itemset support thresholds and the maximum search depth.

For a variable subset S the |S|-way contingency table is a multinomial with
the Kronecker product of the per-variable probability vectors as cell
probabilities. One integer half-width c (and its gamma) is found per subset at
confidence level 1-2*alpha; the infrequent-mode threshold of a cell with
probability p_d is then n*p_d - c and the frequent-mode threshold is
n*p_d + c + 2*gamma.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .data import ProbabilityModel, subset_cell_probs, subset_strides
from .errors import TableExplosion
from .simci import CellSpec, coverage_probability, find_c

DEFAULT_MAX_CELLS = 1e7
SIGMA_FLOOR = 2.0
# nu values this close to the level fall back to the literal clamped sweep.
_RULE_MARGIN = 5e-3


@dataclass(frozen=True)
class ThresholdTable:
    """Thresholds for every cell of the table over one variable subset.

    Cell thresholds are derived on demand from the per-variable probability
    slices; sigma_map() materializes the full map for small tables.
    """

    subset: tuple[int, ...]
    c: int
    gamma: float
    n: int
    pi: tuple[np.ndarray, ...]  # probability vectors of the subset's variables
    level_counts: tuple[int, ...]
    strides: np.ndarray

    @property
    def cells(self) -> int:
        return int(np.prod([float(l) for l in self.level_counts]))

    def decode_codes(self, codes: np.ndarray) -> list[tuple[int, ...]]:
        """C-order cell codes -> 1-based level tuples."""
        codes = np.asarray(codes, dtype=np.int64)
        levels = []
        for j, l in enumerate(self.level_counts):
            levels.append((codes // self.strides[j]) % l + 1)
        return [tuple(int(x) for x in row) for row in zip(*levels)]

    def cell_prob_codes(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        prob = np.ones(codes.shape, dtype=float)
        for j, l in enumerate(self.level_counts):
            lev = (codes // self.strides[j]) % l
            prob = prob * self.pi[j][lev]
        return prob

    def cell_prob_levels(self, levels: Sequence[int]) -> float:
        prob = 1.0
        for j, lev in enumerate(levels):
            prob = prob * float(self.pi[j][lev - 1])
        return prob

    def sigma_codes(self, codes: np.ndarray, mode: str) -> np.ndarray:
        p = self.cell_prob_codes(codes)
        if mode == "infrequent":
            return self.n * p - self.c
        if mode == "frequent":
            return self.n * p + self.c + 2.0 * self.gamma
        raise ValueError(f"unknown mode {mode!r}")

    def sigma_levels(self, levels: Sequence[int], mode: str) -> float:
        p = self.cell_prob_levels(levels)
        if mode == "infrequent":
            return self.n * p - self.c
        if mode == "frequent":
            return self.n * p + self.c + 2.0 * self.gamma
        raise ValueError(f"unknown mode {mode!r}")

    def _extreme_prob(self, kind: str) -> float:
        prob = 1.0
        for v in self.pi:
            prob = prob * float(v.max() if kind == "max" else v.min())
        return prob

    def min_sigma(self, mode: str = "infrequent") -> float:
        """Smallest threshold over the full Kronecker cell set (not only observed)."""
        p = self._extreme_prob("min")
        return self.n * p - self.c if mode == "infrequent" \
            else self.n * p + self.c + 2.0 * self.gamma

    def max_sigma(self, mode: str = "infrequent") -> float:
        p = self._extreme_prob("max")
        return self.n * p - self.c if mode == "infrequent" \
            else self.n * p + self.c + 2.0 * self.gamma

    def sigma_map(self, mode: str = "infrequent") -> dict[tuple[int, ...], float]:
        """Full cell -> threshold map; intended for small (test-sized) tables."""
        codes = np.arange(self.cells, dtype=np.int64)
        sig = self.sigma_codes(codes, mode)
        return dict(zip(self.decode_codes(codes), sig.tolist()))


@dataclass(frozen=True)
class MaxlenDecision:
    """Chosen maximum itemset length and the first subset that broke the rule."""

    maxlen: int
    violating_subset: tuple[int, ...] | None
    rule: str


def _table_cells(model: ProbabilityModel, subset: Sequence[int]) -> float:
    cells = 1.0
    for j in subset:
        cells *= model.level_counts[j]
    return cells


def _cell_spec(model: ProbabilityModel, n: int, subset: Sequence[int],
               max_cells: float) -> CellSpec:
    cells = _table_cells(model, subset)
    if cells > max_cells:
        raise TableExplosion(subset, cells, max_cells)
    return CellSpec(probs=subset_cell_probs(model, subset), n=n)


def subset_thresholds(model: ProbabilityModel, n: int, subset: Sequence[int],
                      alpha: float, mode: str = "infrequent", *,
                      method: str = "auto",
                      max_cells: float = DEFAULT_MAX_CELLS) -> ThresholdTable:
    """Threshold table for one variable subset (one c at level 1-2*alpha)."""
    subset = tuple(sorted(subset))
    spec = _cell_spec(model, n, subset, max_cells)
    level = 1.0 - 2.0 * alpha
    c, gamma = find_c(spec, level, method)
    return ThresholdTable(
        subset=subset, c=c, gamma=gamma, n=n,
        pi=tuple(model.pi[j] for j in subset),
        level_counts=tuple(model.level_counts[j] for j in subset),
        strides=subset_strides(model.level_counts, subset),
    )


def _subset_passes(model: ProbabilityModel, n: int, subset: tuple[int, ...],
                   level: float, rule: str, method: str, max_cells: float) -> bool:
    """Does every-cell (all-cells) / some-cell (any-cell) sigma >= 2 hold?

    sigma_ref >= 2  <=>  c(S) <= t with t = floor(n*p_ref - 2), and by the
    clamped-sweep definition of c that is nu(t+1) > level. Raw nu is evaluated
    once; only values within _RULE_MARGIN of the level fall back to the
    literal sweep (raw nu tracks a nondecreasing function within ~2e-3).
    """
    p_ref = 1.0
    for j in subset:
        v = model.pi[j]
        p_ref *= float(v.max() if rule == "any-cell" else v.min())
    if n * p_ref < SIGMA_FLOOR:
        return False  # sigma_ref < 2 for every c >= 0, no table needed
    t = math.floor(n * p_ref - SIGMA_FLOOR + 1e-9)
    if t >= n:
        return True
    spec = _cell_spec(model, n, subset, max_cells)
    v = coverage_probability(spec, t + 1, method)
    if v > level + _RULE_MARGIN:
        return True
    if v <= level - _RULE_MARGIN:
        return False
    c, _ = find_c(spec, level, method)
    return c <= t


def determine_maxlen(model: ProbabilityModel, n: int, alpha: float,
                     mode: str = "infrequent", *, rule: str = "any-cell",
                     method: str = "auto", max_cells: float = DEFAULT_MAX_CELLS,
                     threads: int = 1) -> MaxlenDecision:
    """Largest M such that every subset of size <= M passes the sigma >= 2 rule.

    rule "any-cell" (default): a subset passes while its most probable cell
    keeps sigma >= 2 (a size fails once some table has every cell below 2).
    rule "all-cells": every cell of every subset must keep sigma >= 2.
    Sizes are swept upward and the first failing size stops the sweep; if even
    size 1 fails, maxlen is still 1. Both modes use the infrequent-style
    lower bounds. The mode argument is accepted for interface completeness.
    """
    del mode  # rule is direction-independent by design
    if rule not in ("any-cell", "all-cells"):
        raise ValueError(f"unknown maxlen rule {rule!r}")
    p = model.p
    level = 1.0 - 2.0 * alpha
    for m in range(1, p + 1):
        subsets = list(itertools.combinations(range(p), m))
        if threads > 1 and len(subsets) > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                results = list(ex.map(
                    lambda s: _subset_passes(model, n, s, level, rule, method, max_cells),
                    subsets))
            for s, ok in zip(subsets, results):
                if not ok:
                    return MaxlenDecision(maxlen=max(m - 1, 1),
                                          violating_subset=s, rule=rule)
        else:
            for s in subsets:
                if not _subset_passes(model, n, s, level, rule, method, max_cells):
                    return MaxlenDecision(maxlen=max(m - 1, 1),
                                          violating_subset=s, rule=rule)
    return MaxlenDecision(maxlen=p, violating_subset=None, rule=rule)


class ThresholdProvider:
    """Caches ThresholdTables per subset; optionally spills (c, gamma) to disk.

    Distinct keys may be inserted concurrently; recomputation of the same key
    is benign because results are deterministic.
    """

    def __init__(self, model: ProbabilityModel, n: int, alpha: float, *,
                 method: str = "auto", max_cells: float = DEFAULT_MAX_CELLS,
                 cache_dir: str | None = None):
        self.model = model
        self.n = n
        self.alpha = alpha
        self.method = method
        self.max_cells = max_cells
        self._tables: dict[tuple[int, ...], ThresholdTable] = {}
        self._spill_path = None
        self._spilled: dict[str, list] = {}
        if cache_dir:
            digest = hashlib.sha256()
            for v in model.pi:
                digest.update(v.tobytes())
            digest.update(f"{n}|{alpha}|{method}".encode())
            os.makedirs(cache_dir, exist_ok=True)
            self._spill_path = os.path.join(
                cache_dir, f"thresholds-{digest.hexdigest()[:16]}.json")
            if os.path.exists(self._spill_path):
                try:
                    with open(self._spill_path) as fh:
                        self._spilled = json.load(fh)
                except (OSError, ValueError):
                    self._spilled = {}

    def get(self, subset: Iterable[int]) -> ThresholdTable:
        key = tuple(sorted(subset))
        table = self._tables.get(key)
        if table is not None:
            return table
        spill_key = ",".join(map(str, key))
        if spill_key in self._spilled:
            c, gamma = self._spilled[spill_key]
            model = self.model
            table = ThresholdTable(
                subset=key, c=int(c), gamma=float(gamma), n=self.n,
                pi=tuple(model.pi[j] for j in key),
                level_counts=tuple(model.level_counts[j] for j in key),
                strides=subset_strides(model.level_counts, key),
            )
        else:
            table = subset_thresholds(self.model, self.n, key, self.alpha,
                                      method=self.method, max_cells=self.max_cells)
            self._spilled[spill_key] = [table.c, table.gamma]
        self._tables[key] = table
        return table

    def prefetch(self, subsets: Sequence[tuple[int, ...]], threads: int = 1) -> None:
        todo = [s for s in subsets if tuple(sorted(s)) not in self._tables]
        if threads > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                list(ex.map(self.get, todo))
        else:
            for s in todo:
                self.get(s)

    def flush_spill(self) -> None:
        if self._spill_path:
            try:
                with open(self._spill_path, "w") as fh:
                    json.dump(self._spilled, fh)
            except OSError:
                pass

    def c_summary(self) -> dict[int, dict[str, float]]:
        """Per subset size: number of tables and the range of c values."""
        out: dict[int, dict[str, float]] = {}
        for key, table in sorted(self._tables.items()):
            d = out.setdefault(len(key), {"tables": 0, "c_min": table.c, "c_max": table.c})
            d["tables"] += 1
            d["c_min"] = min(d["c_min"], table.c)
            d["c_max"] = max(d["c_max"], table.c)
        return out

    def saturated_tables(self) -> int:
        """Tables whose largest infrequent threshold reaches n (every cell scores)."""
        return sum(1 for t in self._tables.values() if t.max_sigma("infrequent") >= t.n)
