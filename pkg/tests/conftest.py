"""Shared fixtures: tiny datasets, a stub threshold provider, UCI data discovery."""
from __future__ import annotations

import os

import numpy as np
import pytest

from sono import Dataset, IngestionOptions, load_dataset
from sono.prepare import RECIPES

UCI_ENV = "SONO_DATA_DIR"


def uci_raw_dir() -> str | None:
    """Directory with the raw UCI files, if the user provided one."""
    for cand in (os.environ.get(UCI_ENV),
                 os.path.join(os.path.dirname(__file__), "data", "uci")):
        if cand and os.path.isdir(cand):
            return cand
    return None


def require_uci(name: str) -> str:
    d = uci_raw_dir()
    if d is None:
        pytest.skip(f"raw UCI files not present (set ${UCI_ENV}); "
                    f"needed: {', '.join(RECIPES[name].files)}")
    for fname in RECIPES[name].files:
        if not os.path.exists(os.path.join(d, fname)):
            pytest.skip(f"raw file {fname} for {name} not in {d} "
                        f"(download from {RECIPES[name].url})")
    return d


class StubTable:
    """Duck-typed ThresholdTable with handcrafted per-cell thresholds."""

    def __init__(self, subset, level_counts, sigma_by_levels, default_sigma):
        self.subset = tuple(subset)
        self.level_counts = tuple(level_counts[j] for j in subset)
        self.c = 0
        self.gamma = 0.0
        self._sigma = dict(sigma_by_levels)
        self._default = default_sigma
        strides = np.ones(len(self.level_counts), dtype=np.int64)
        for j in range(len(self.level_counts) - 2, -1, -1):
            strides[j] = strides[j + 1] * self.level_counts[j + 1]
        self.strides = strides

    def decode_codes(self, codes):
        codes = np.asarray(codes, dtype=np.int64)
        levels = []
        for j, l in enumerate(self.level_counts):
            levels.append((codes // self.strides[j]) % l + 1)
        return [tuple(int(x) for x in row) for row in zip(*levels)]

    def sigma_codes(self, codes, mode):
        return np.array([self._sigma.get((self.subset, lv), self._default)
                         for lv in self.decode_codes(codes)], dtype=float)

    def sigma_levels(self, levels, mode):
        return float(self._sigma.get((self.subset, tuple(levels)), self._default))


class StubProvider:
    """Threshold provider for handcrafted search scenarios."""

    def __init__(self, level_counts, sigma_by_levels, default_sigma):
        self.level_counts = tuple(level_counts)
        self.sigma_by_levels = dict(sigma_by_levels)
        self.default_sigma = default_sigma

    def get(self, subset):
        return StubTable(tuple(sorted(subset)), self.level_counts,
                         self.sigma_by_levels, self.default_sigma)

    def prefetch(self, subsets, threads=1):
        pass


@pytest.fixture
def toy_table():
    """The 3x2 first-appearance encoding example."""
    return load_dataset([["a", "x"], ["b", "x"], ["a", "y"]],
                        IngestionOptions(header=False))


def make_dataset(codes, level_counts=None) -> Dataset:
    codes = np.asarray(codes, dtype=np.int32)
    p = codes.shape[1]
    if level_counts is None:
        level_counts = tuple(int(codes[:, j].max()) for j in range(p))
    return Dataset(
        codes=codes,
        level_counts=tuple(level_counts),
        variable_names=tuple(f"X{j + 1}" for j in range(p)),
        level_labels=tuple(tuple(str(k + 1) for k in range(l))
                           for l in level_counts),
    )
