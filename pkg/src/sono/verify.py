"""Audit suites behind `sono verify`: fast path against the reference oracle.

Each suite returns (name, passed, detail) triples; run_verify aggregates them
into a plain-text report and an exit status.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .data import empirical_model
from .engine import run_analysis
from .oracle import (DEFAULT_ORACLE, OracleConfig, check_propositions, exact_nu,
                     random_dataset, walker)
from .simci import CellSpec, coverage_probability, find_c, simultaneous_intervals

Check = tuple[str, bool, str]

NU_BATTERY = tuple(
    (k, n, shape)
    for k in (2, 3, 5)
    for n in (10, 20, 50, 100)
    for shape in ("uniform", "skewed")
)

_SKEWED = {2: (0.7, 0.3), 3: (0.6, 0.3, 0.1), 5: (0.4, 0.3, 0.15, 0.1, 0.05)}


def battery_spec(k: int, n: int, shape: str) -> CellSpec:
    probs = np.full(k, 1.0 / k) if shape == "uniform" else np.array(_SKEWED[k])
    return CellSpec(probs=probs, n=n)


def suite_nu_accuracy(config: OracleConfig = DEFAULT_ORACLE) -> list[Check]:
    """Shipped nu against exact nu over the battery, plus half-width agreement.

    The shipped (auto) path must stay within tol everywhere; the pure
    Edgeworth method's bracketed c must stay within 1 of the exact path's.
    The big-table approximation (Edgeworth with dominant cells split out) is
    additionally held to tol on the k=5 slice where that regime operates.
    """
    from .simci import _coverage_edgeworth

    checks: list[Check] = []
    worst = 0.0
    worst_at = ""
    worst_edgeworth = 0.0
    worst_split = 0.0
    for k, n, shape in NU_BATTERY:
        spec = battery_spec(k, n, shape)
        for c in range(0, n + 1):
            exact = exact_nu(spec, c, config)
            dev = abs(coverage_probability(spec, c, "auto") - exact)
            if dev > worst:
                worst, worst_at = dev, f"k={k} n={n} {shape} c={c}"
            worst_edgeworth = max(
                worst_edgeworth, abs(coverage_probability(spec, c, "edgeworth") - exact))
            if k == 5 and c >= 5:
                worst_split = max(
                    worst_split,
                    abs(_coverage_edgeworth(spec, c, split_dominant=True) - exact))
    checks.append(("nu accuracy",
                   worst <= config.nu_tol and worst_split <= config.nu_tol,
                   f"max |nu_auto - nu_exact| = {worst:.2e}"
                   + (f" at {worst_at}" if worst_at else "")
                   + f" (tol {config.nu_tol:.0e}); split-Edgeworth on its k=5 "
                   f"operating slice {worst_split:.2e}; whole-sum Edgeworth "
                   f"everywhere {worst_edgeworth:.2e}"))
    worst_c = 0
    for k, n, shape in NU_BATTERY:
        spec = battery_spec(k, n, shape)
        for level in (0.90, 0.95):
            c_x, _ = find_c(spec, level, "exact")
            c_a, _ = find_c(spec, level, "auto")
            c_e, _ = find_c(spec, level, "edgeworth")
            worst_c = max(worst_c, abs(c_a - c_x), abs(c_e - c_x))
    checks.append(("c agreement", worst_c <= 1,
                   f"max |c - c_exact| = {worst_c} over auto and Edgeworth paths "
                   "(tol 1)"))
    return checks


def suite_exact_nu_self_consistency(config: OracleConfig = DEFAULT_ORACLE) -> list[Check]:
    """Convolution vs enumeration inside exact_nu (raises on disagreement)."""
    tried = 0
    for k, n in ((2, 10), (2, 20), (3, 10), (3, 20), (5, 10)):
        for shape in ("uniform", "skewed"):
            spec = battery_spec(k, n, shape)
            for c in range(0, n + 1):
                exact_nu(spec, c, config)  # self-check runs when enumerable
                tried += 1
    return [("exact-nu self-consistency", True,
             f"{tried} convolution/enumeration cross-checks within 1e-12")]


def suite_coverage_simulation(seed: int = 20240901, sims: int = 10_000) -> list[Check]:
    """Two-sided simultaneous coverage for k=5 equiprobable, n=100, alpha=0.05.

    Counts the simulations whose empirical proportions all fall inside the
    two-sided intervals. Interval endpoints are mapped to integer count
    bounds (with a 1-ulp snap) because the construction puts endpoints
    exactly on lattice points, where raw float comparison loses whole layers.
    """
    n = 100
    spec = CellSpec(probs=np.full(5, 0.2), n=n)
    ci = simultaneous_intervals(spec, 0.05, "two-sided")
    lo_f = n * ci.lower
    hi_f = n * ci.upper
    snap = lambda x: np.where(np.abs(x - np.round(x)) <= 1e-9 * (1 + np.abs(x)),
                              np.round(x), x)
    lo = np.ceil(snap(lo_f))
    hi = np.floor(snap(hi_f))
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(n, [0.2] * 5, size=sims)
    rate = float(np.all((draws >= lo) & (draws <= hi), axis=1).mean())
    ok = 0.94 <= rate <= 0.99
    return [("coverage simulation", ok,
             f"simultaneous coverage {rate:.4f} with c={ci.c}, "
             f"gamma={ci.gamma:.3f} (want [0.94, 0.99])")]


# Documented gaps between the propositions as printed and exact arithmetic
# (see the project notes): the closed-form argmax is an asymptotic
# approximation, off by one at two boundary points, and the claimed
# singleton-dominance threshold overshoots for r=3.
ARGMAX_OFF_BY_ONE = {(10, 2.0): 3, (17, 3.0): 6}
SINGLETON_GAP = {(14, 3.0), (15, 3.0), (16, 3.0)}


def _true_argmax_set(p: int, r: float) -> set[int]:
    from fractions import Fraction
    values = [Fraction(math.comb(p, k), k ** int(r)) for k in range(1, p + 1)]
    best = max(values)
    return {k + 1 for k, v in enumerate(values) if v == best}


def suite_propositions(p_max: int = 60, seed: int = 20240901) -> list[Check]:
    """Proposition checks against exact arithmetic.

    A failing case counts as a suite failure unless it is one of the
    documented boundary deviations and fails in exactly the documented way.
    """
    cases = check_propositions(range(2, p_max + 1), (1.0, 2.0, 3.0), seed=seed)
    unexpected = []
    documented = []
    for case in cases:
        if case.passed:
            continue
        key = (case.p, case.r)
        failing = {name for name, ok in case.checks.items() if not ok}
        if key in ARGMAX_OFF_BY_ONE and failing == {"argmax_closed_form"} \
                and _true_argmax_set(case.p, case.r) == {ARGMAX_OFF_BY_ONE[key]}:
            documented.append(f"p={case.p} r={case.r:g} argmax off by one")
        elif key in SINGLETON_GAP and failing == {"singletons_dominate"} \
                and max(math.comb(case.p, j + 1) / (j + 1) ** case.r
                        for j in range(1, case.p)) > case.p:
            documented.append(f"p={case.p} r={case.r:g} singleton-threshold gap")
        else:
            unexpected.append(f"p={case.p} r={case.r:g}: {case.details}")
    detail = f"{len(cases)} (p, r) cases"
    if documented:
        detail += f"; documented boundary deviations: {', '.join(documented)}"
    if unexpected:
        detail += "; UNEXPECTED: " + "; ".join(unexpected[:3])
    return [("propositions", not unexpected, detail)]


def _flag_key_sets(flag_sets):
    return [frozenset(rec.key() for rec in recs) for recs in flag_sets]


def suite_walker_equivalence(n_datasets: int = 12, seed: int = 20240901,
                             config: OracleConfig = DEFAULT_ORACLE) -> list[Check]:
    """Fast path vs nested-loop walker on seeded random datasets."""
    rng = np.random.default_rng(seed)
    grid = list(itertools.product(("infrequent", "frequent"), (True, False)))
    failures = []
    runs = 0
    for i in range(n_datasets):
        ds = random_dataset(rng)
        model = empirical_model(ds)
        alpha = float(rng.choice((0.05, 0.1)))
        r = float(rng.choice((1.0, 2.0)))
        for mode, prune in grid:
            runs += 1
            cfg = RunConfig(mode=mode, alpha=alpha, r=r, prune=prune)
            report, info, flags = run_analysis(ds, model, cfg)
            ref = walker(ds, model, alpha, r, mode=mode, prune=prune, config=config)
            if info.maxlen != ref.maxlen:
                failures.append(f"ds{i} {mode} prune={prune}: maxlen "
                                f"{info.maxlen} != {ref.maxlen}")
                continue
            if _flag_key_sets(flags) != _flag_key_sets(ref.flag_sets):
                failures.append(f"ds{i} {mode} prune={prune}: flag sets differ")
                continue
            for name, a, b in (("scores", report.scores, ref.report.scores),
                               ("depths", report.depths, ref.report.depths)):
                if not np.allclose(a, b, rtol=config.score_rtol, atol=1e-12):
                    failures.append(f"ds{i} {mode} prune={prune}: {name} differ")
            if not np.allclose(report.contributions, ref.report.contributions,
                               rtol=config.score_rtol, atol=1e-12):
                failures.append(f"ds{i} {mode} prune={prune}: contributions differ")
    detail = f"{runs} runs on {n_datasets} seeded datasets"
    if failures:
        detail += "; " + "; ".join(failures[:3])
    return [("walker equivalence", not failures, detail)]


def run_verify(n_datasets: int = 12, seed: int = 20240901, p_max: int = 60,
               config: OracleConfig = DEFAULT_ORACLE,
               suites: tuple[str, ...] | None = None) -> tuple[int, str]:
    """Run the audit suites; exit status 0 iff every check passed."""
    registry = {
        "nu": lambda: suite_nu_accuracy(config),
        "exact-nu": lambda: suite_exact_nu_self_consistency(config),
        "coverage": lambda: suite_coverage_simulation(seed),
        "propositions": lambda: suite_propositions(p_max, seed),
        "walker": lambda: suite_walker_equivalence(n_datasets, seed, config),
    }
    names = suites or tuple(registry)
    lines = []
    all_ok = True
    for name in names:
        for check, ok, detail in registry[name]():
            all_ok &= ok
            lines.append(f"{'PASS' if ok else 'FAIL'}  {check}: {detail}")
    lines.append("verification " + ("PASSED" if all_ok else "FAILED"))
    return (0 if all_ok else 1), "\n".join(lines)
