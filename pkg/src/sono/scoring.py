"""Observation scores, outlyingness depths and the variable contribution matrix.

Infrequent mode: each flagged itemset d adds sigma_d / (supp(d) * |d|^r) to
the score of every observation containing d, and sigma_d / (supp(d) *
|d|^(r+1)) to each participating variable's contribution. Frequent mode uses
supp(d) / (sigma_d * (maxlen - |d| + 1)^r), split equally across the |d|
variables. Depth is the mean flagged length (infrequent) or its top-down
complement maxlen - |d| + 1 (frequent); observations with no flags get 0.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InternalConsistencyError
from .lattice import FlagRecord

R_SOFT_MAX = 3.0


def validate_exponent(r: float) -> None:
    if r <= 0:
        raise DomainError("length exponent r must be > 0")
    if r > R_SOFT_MAX:
        warnings.warn(
            f"r={r} strongly damps longer itemsets; values much above "
            f"{R_SOFT_MAX} are not recommended", stacklevel=2)


@dataclass(frozen=True)
class ScoreReport:
    """Scores, depths and the n x p contribution matrix of one run."""

    scores: np.ndarray
    depths: np.ndarray
    contributions: np.ndarray
    mode: str
    r: float
    maxlen: int


def _term(rec: FlagRecord, r: float, mode: str, maxlen: int) -> float:
    if rec.supp < 1:
        raise InternalConsistencyError(f"flagged record with supp={rec.supp}")
    if mode == "infrequent":
        return rec.sigma / (rec.supp * rec.length ** r)
    if rec.sigma <= 0.0:
        raise InternalConsistencyError(
            f"frequent-mode flagged record with sigma={rec.sigma}")
    return rec.supp / (rec.sigma * (maxlen - rec.length + 1) ** r)


def score_flags(flag_sets: Sequence[Sequence[FlagRecord]], r: float, mode: str,
                maxlen: int) -> np.ndarray:
    """Per-observation scores; compensated summation in record order."""
    validate_exponent(r)
    return np.array([
        math.fsum(_term(rec, r, mode, maxlen) for rec in recs)
        for recs in flag_sets
    ])


def depth_flags(flag_sets: Sequence[Sequence[FlagRecord]], mode: str,
                maxlen: int) -> np.ndarray:
    """Mean flagged itemset length (or its top-down complement); 0 when empty."""
    out = np.zeros(len(flag_sets))
    for i, recs in enumerate(flag_sets):
        if not recs:
            continue
        if mode == "infrequent":
            out[i] = math.fsum(rec.length for rec in recs) / len(recs)
        else:
            out[i] = math.fsum(maxlen - rec.length + 1 for rec in recs) / len(recs)
    return out


def contribution_matrix(flag_sets: Sequence[Sequence[FlagRecord]], r: float,
                        mode: str, maxlen: int, p: int) -> np.ndarray:
    """n x p matrix splitting each score term equally over the itemset's variables."""
    validate_exponent(r)
    out = np.zeros((len(flag_sets), p))
    for i, recs in enumerate(flag_sets):
        for rec in recs:
            if mode == "infrequent":
                share = rec.sigma / (rec.supp * rec.length ** (r + 1.0))
            else:
                if rec.sigma <= 0.0:
                    raise InternalConsistencyError(
                        f"frequent-mode flagged record with sigma={rec.sigma}")
                share = rec.supp / (
                    rec.sigma * (maxlen - rec.length + 1) ** r * rec.length)
            for var in rec.itemset.variables:
                out[i, var] += share
    return out


def build_report(flag_sets: Sequence[Sequence[FlagRecord]], r: float, mode: str,
                 maxlen: int, p: int) -> ScoreReport:
    return ScoreReport(
        scores=score_flags(flag_sets, r, mode, maxlen),
        depths=depth_flags(flag_sets, mode, maxlen),
        contributions=contribution_matrix(flag_sets, r, mode, maxlen, p),
        mode=mode,
        r=r,
        maxlen=maxlen,
    )


def max_score_bound(n: int, p: int, r: float, maxlen: int) -> float:
    """Largest attainable score: p(n-1) for small p, else (n-1) C(p,k)/k^r.

    The second branch uses k = min(maxlen, floor((p - r)/2)), the unit-support
    configuration of all itemsets of one length that dominates once
    p >= 2^(r+1) + 1.
    """
    if n < 1 or p < 1:
        raise DomainError("need n >= 1 and p >= 1")
    validate_exponent(r)
    if p < 2.0 ** (r + 1.0) + 1.0:
        return float(p * (n - 1))
    k = min(maxlen, math.floor((p - r) / 2.0))
    k = max(k, 1)
    return (n - 1) * math.comb(p, k) / k ** r
