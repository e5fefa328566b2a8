"""The acceptance suite: every shipping criterion as a named, seeded check.

Each criterion returns a CriterionResult with plain-type metrics; the full
report is a deterministic function of the master seed (timings go to the log
callback, never into the report), so reruns under any thread count serialize
to identical bytes.  Per-criterion sub-seeds are derived by hashing, so
batches that must be independent never share trial streams.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .distributions import (UrnModelSpec, make_log_atom, make_sqrt_atom,
                            make_uniform, mfold_scaling_of)
from .dlp import (AGS, GS, DlpInstance, averaged_hazard, averaged_mean_constant,
                  hazard, sim_dlp_runtime)
from .embedding import LimitProcessSpec, sample_limit_process, sim_embedded_continuous
from .gof import ks_against, ks_two_sample, stream_split
from .graphs import (PaConfig, PathConfig, default_pa_cap,
                     path_expectation_formula, path_expectation_oracle,
                     sim_pa_collision, sim_path_run)
from .laws import (LimitParams, h_lower_poisson, moment, survival_mfold,
                   survival_prelimit_exact, survival_qcolor)
from .urn import sim_first_collision, sim_joint_collisions, sim_mfold_collision

DEFAULT_SEED = 20260810
DELTA = 1e-3


def subseed(seed: int, tag: str) -> int:
    """Independent 64-bit sub-seed for a named batch under one master seed."""
    h = hashlib.sha256(f"{seed & 0xFFFFFFFFFFFFFFFF}:{tag}".encode()).digest()
    return int.from_bytes(h[:8], "little")


@dataclass
class CriterionResult:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)


def _ks_metrics(prefix: str, report) -> dict:
    return {
        f"{prefix}_ks": float(report.statistic),
        f"{prefix}_threshold": float(report.threshold),
        f"{prefix}_ok": bool(report.passed),
    }


# --------------------------------------------------------------------------
# Criteria
# --------------------------------------------------------------------------

def crit_uniform_qcolor(seed: int, threads: int) -> CriterionResult:
    """Uniform two-color collision law: T/sqrt(n) vs the Rayleigh survival."""
    n, trials = 10 ** 4, 50_000
    spec = UrnModelSpec.from_shared((0.5, 0.5), make_uniform(n))
    t0 = time.perf_counter()
    batch = sim_first_collision(spec, trials, subseed(seed, "uniform-qcolor"),
                                threads=threads)
    runtime = time.perf_counter() - t0
    rep = ks_against(batch.times * spec.s_n,
                     lambda r: survival_qcolor(LimitParams(q=2), r),
                     delta=DELTA, allowance=0.012)
    runtime_ok = runtime <= 60.0
    m = _ks_metrics("rayleigh", rep)
    m["runtime_ok"] = bool(runtime_ok)
    return CriterionResult("uniform-qcolor", rep.passed and runtime_ok, m)


def crit_birthday(seed: int, threads: int) -> CriterionResult:
    """Two-color birthday numbers at n=365 against the exact continuous oracle."""
    n, trials = 365, 1_000_000
    d = make_uniform(n)
    spec = UrnModelSpec.from_shared((0.5, 0.5), d)
    batch = sim_first_collision(spec, trials, subseed(seed, "birthday"),
                                threads=threads, record_color_counts=True)
    oracle = moment(lambda t: survival_prelimit_exact(d, t, q=2), 1)
    mean_t = float(np.mean(batch.times))
    mean_ok = abs(mean_t - oracle) <= 0.01 * oracle
    half = float(np.mean(batch.color_counts[:, 0]))
    half_ok = abs(half - 16.93) <= 0.01 * 16.93
    return CriterionResult("birthday", mean_ok and half_ok, {
        "mean_draws": mean_t, "oracle_mean": float(oracle), "mean_ok": bool(mean_ok),
        "half_count": half, "half_target": 16.93, "half_ok": bool(half_ok),
    })


def crit_sqrt_atom(seed: int, threads: int) -> CriterionResult:
    """Square-root-atom law: one heavy atom survives in the limit."""
    n, trials = 50_000, 50_000
    d = make_sqrt_atom(n)
    spec = UrnModelSpec.from_shared((0.5, 0.5), d)
    batch = sim_first_collision(spec, trials, subseed(seed, "sqrt-atom"),
                                threads=threads)
    law = LimitParams(q=2, psi=(1.0 / math.sqrt(2.0),))
    rep = ks_against(batch.times * spec.s_n, lambda r: survival_qcolor(law, r),
                     delta=DELTA, allowance=0.015)
    return CriterionResult("sqrt-atom", rep.passed, _ks_metrics("atom", rep))


def crit_log_atom(seed: int, threads: int) -> CriterionResult:
    """Log-atom law: the fully atomic limit 2 e^{-r/2} - e^{-r}."""
    n, trials = 10 ** 6, 50_000
    d = make_log_atom(n)
    spec = UrnModelSpec.from_shared((0.5, 0.5), d)
    batch = sim_first_collision(spec, trials, subseed(seed, "log-atom"),
                                threads=threads)
    law = LimitParams(q=2, psi=(1.0,))
    rep = ks_against(batch.times * spec.s_n, lambda r: survival_qcolor(law, r),
                     delta=DELTA, allowance=0.03)
    return CriterionResult("log-atom", rep.passed, _ks_metrics("atom", rep))


def _second_arrival_survival(q: int):
    r_q = q / (q - 1)
    return lambda r: h_lower_poisson(2, np.asarray(r) ** 2 / (2.0 * r_q))


def crit_joint(seed: int, threads: int) -> CriterionResult:
    """Second collision time vs the chi(4 df) arrival law, both routes."""
    n, trials = 10 ** 4, 50_000
    spec = UrnModelSpec.from_shared((0.5, 0.5), make_uniform(n))
    batch = sim_joint_collisions(spec, 2, trials, subseed(seed, "joint"),
                                 threads=threads)
    law = _second_arrival_survival(2)
    rep_sim = ks_against(batch.times[:, 1] * spec.s_n, law,
                         delta=DELTA, allowance=0.015)
    lp = sample_limit_process(LimitProcessSpec(q=2), 2, trials,
                              subseed(seed, "joint-limitproc"), threads=threads)
    rep_lp = ks_against(lp.times[:, 1], law, delta=DELTA, allowance=0.015)
    m = _ks_metrics("sim", rep_sim)
    m.update(_ks_metrics("limitproc", rep_lp))
    return CriterionResult("joint-collisions", rep_sim.passed and rep_lp.passed, m)


def crit_mfold(seed: int, threads: int) -> CriterionResult:
    """2-fold collision law at its own finite-n scaling, plus the m=1 identity."""
    n, trials, m = 400, 50_000, 2
    d = make_uniform(n)
    prof = mfold_scaling_of(d, m)
    batch = sim_mfold_collision(d, 2, m, trials, subseed(seed, "mfold"),
                                threads=threads)
    params = LimitParams(q=2, m=m, psi=tuple(prof.psi_2m))
    rep = ks_against(batch.times * prof.s_2m,
                     lambda r: survival_mfold(params, r),
                     delta=DELTA, allowance=0.03)
    grid = np.linspace(0.0, 6.0, 100)
    p1 = LimitParams(q=2, m=1, psi=(1.0 / math.sqrt(2.0),))
    pq = LimitParams(q=2, psi=(1.0 / math.sqrt(2.0),))
    ident_gap = float(np.max(np.abs(survival_mfold(p1, grid) - survival_qcolor(pq, grid))))
    ident_ok = ident_gap <= 1e-12
    mtr = _ks_metrics("mfold", rep)
    mtr.update({"m1_identity_gap": ident_gap, "m1_identity_ok": bool(ident_ok)})
    return CriterionResult("mfold", rep.passed and ident_ok, mtr)


def crit_general_mix(seed: int, threads: int) -> CriterionResult:
    """General-mix law e^{-4r^2/25} plus the degenerate-scaling example."""
    n, trials = 10 ** 4, 50_000
    spec = UrnModelSpec.from_shared((0.8, 0.2), make_uniform(n))
    batch = sim_first_collision(spec, trials, subseed(seed, "general-mix"),
                                threads=threads)
    rep_mix = ks_against(batch.times * spec.s_n,
                         lambda r: np.exp(-4.0 * np.asarray(r) ** 2 / 25.0),
                         delta=DELTA, allowance=0.012)
    # degenerate scaling: log-atom row vs uniform row, Rayleigh in T/sqrt(n)
    n2 = 10 ** 6
    row1 = make_log_atom(n2).masses
    row2 = np.full(n2 + 1, 1.0 / (n2 + 1))
    dspec = UrnModelSpec.from_rows((0.5, 0.5), np.vstack([row1, row2]),
                                   label="log-atom-vs-uniform")
    dbatch = sim_first_collision(dspec, trials, subseed(seed, "degenerate"),
                                 threads=threads,
                                 block_hint=int(3 * math.sqrt(n2)))
    rep_deg = ks_against(dbatch.times / math.sqrt(n2),
                         lambda r: np.exp(-np.asarray(r) ** 2 / 4.0),
                         delta=DELTA, allowance=0.03)
    m = _ks_metrics("mix", rep_mix)
    m.update(_ks_metrics("degenerate", rep_deg))
    return CriterionResult("general-mix", rep_mix.passed and rep_deg.passed, m)


def crit_dlp(seed: int, threads: int) -> CriterionResult:
    """DLP constants, stochastic dominance, and instance-level simulations."""
    t0 = time.perf_counter()
    gs_const = averaged_mean_constant(GS)
    ags_const = averaged_mean_constant(AGS)
    gs_target = (4.0 - 2.0 * math.sqrt(2.0)) * math.sqrt(math.pi)
    ags_target = (5.0 * math.sqrt(2.0) / 4.0 - 1.0) * math.sqrt(math.pi)
    const_ok = (abs(gs_const - gs_target) <= 1e-4 and
                abs(ags_const - ags_target) <= 1e-4)
    grid = np.linspace(0.0, 6.0, 601)
    dom_gap = float(np.max(averaged_hazard(AGS, grid) - averaged_hazard(GS, grid)))
    dom_ok = dom_gap <= 1e-12
    n, trials = 10 ** 4, 50_000
    metrics = {
        "gs_constant": float(gs_const), "ags_constant": float(ags_const),
        "constants_ok": bool(const_ok), "dominance_gap": dom_gap,
        "dominance_ok": bool(dom_ok),
    }
    sims_ok = True
    for variant in (GS, AGS):
        for x in (0.0, 0.2, 0.45):
            inst = DlpInstance(n=n, x=x, variant=variant)
            batch = sim_dlp_runtime(inst, trials,
                                    subseed(seed, f"dlp-{variant}-{x}"),
                                    threads=threads)
            rep = ks_against(batch.times / math.sqrt(n),
                             lambda r, v=variant, xv=x: hazard(v, xv, r),
                             delta=DELTA, allowance=0.015)
            metrics.update(_ks_metrics(f"{variant}_x{x}", rep))
            sims_ok = sims_ok and rep.passed
    runtime_ok = (time.perf_counter() - t0) <= 300.0
    metrics["runtime_ok"] = bool(runtime_ok)
    return CriterionResult("dlp", const_ok and dom_ok and sims_ok and runtime_ok,
                           metrics)


def crit_pa(seed: int, threads: int) -> CriterionResult:
    """PA(2) collision times vs Exp(2) with a bounded censor rate."""
    palette = make_uniform(1000)
    cfg = PaConfig(m=2, palette=palette, trials=10_000,
                   max_vertices=default_pa_cap(2, palette))
    batch = sim_pa_collision(cfg, subseed(seed, "pa"), threads=threads)
    censor_rate = float(np.mean(batch.censored))
    censor_ok = censor_rate < 0.001
    kept = batch.times[~batch.censored]
    rep = ks_against(kept / 1000.0, lambda r: np.exp(-2.0 * np.asarray(r)),
                     delta=DELTA, allowance=0.03)
    m = _ks_metrics("exp2", rep)
    m.update({"censor_rate": censor_rate, "censor_ok": bool(censor_ok)})
    return CriterionResult("pa", rep.passed and censor_ok, m)


def crit_path(seed: int, threads: int) -> CriterionResult:
    """Path-run law vs Exp(1), the fair-coin exact value, and the
    formula-vs-oracle identity on a random grid.

    The identity clause is asserted exactly as specified; it is known to be
    unattainable for non-uniform probabilities (the closed-form expectation
    is provably wrong there; see the repository notes), so this criterion
    reports the honest failure rather than a weakened check.
    """
    palette = make_uniform(10 ** 4)
    cfg = PathConfig.from_palette(palette, 2)
    batch = sim_path_run(cfg, 50_000, subseed(seed, "path"), threads=threads)
    sum_p2 = float(np.sum(palette.masses ** 2))
    rep = ks_against(batch.times * sum_p2, lambda r: np.exp(-np.asarray(r)),
                     delta=DELTA, allowance=0.015)
    fair = PathConfig(probs=(0.5, 0.5), m=2)
    fair_formula = path_expectation_formula(fair)
    fair_oracle = path_expectation_oracle(fair)
    fair_ok = fair_formula == 3.0 and abs(fair_oracle - 3.0) <= 1e-12
    rng = stream_split(subseed(seed, "path-grid"), 0)
    worst = 0.0
    for _ in range(50):
        c = int(rng.integers(1, 6))
        m = int(rng.integers(2, 7))
        probs = rng.dirichlet(np.ones(c))
        pc = PathConfig(probs=tuple(probs / probs.sum()), m=m)
        worst = max(worst, abs(path_expectation_formula(pc) - path_expectation_oracle(pc)))
    ident_ok = worst <= 1e-9
    m_ = _ks_metrics("exp1", rep)
    m_.update({
        "fair_coin_formula": float(fair_formula), "fair_coin_oracle": float(fair_oracle),
        "fair_coin_ok": bool(fair_ok),
        "formula_oracle_max_gap": float(worst),
        "formula_oracle_identity_ok": bool(ident_ok),
    })
    return CriterionResult("path", rep.passed and fair_ok and ident_ok, m_)


def crit_oracle_triangle(seed: int, threads: int) -> CriterionResult:
    """Discrete engine, continuous engine, and exact law agree pairwise."""
    n, trials = 100, 100_000
    d = make_uniform(n)
    spec = UrnModelSpec.from_shared((0.5, 0.5), d)
    disc = sim_first_collision(spec, trials, subseed(seed, "triangle-disc"),
                               threads=threads)
    cont = sim_embedded_continuous(spec, trials, subseed(seed, "triangle-cont"),
                                   threads=threads)
    law = lambda t: survival_prelimit_exact(d, np.asarray(t, dtype=np.float64), q=2)
    rep_d = ks_against(disc.times.astype(np.float64), law, delta=DELTA, allowance=0.02)
    rep_c = ks_against(cont.times, law, delta=DELTA, allowance=0.02)
    rep_2 = ks_two_sample(disc.times.astype(np.float64), cont.times,
                          delta=DELTA, allowance=0.02)
    m = _ks_metrics("disc_vs_law", rep_d)
    m.update(_ks_metrics("cont_vs_law", rep_c))
    m.update(_ks_metrics("disc_vs_cont", rep_2))
    return CriterionResult("oracle-triangle",
                           rep_d.passed and rep_c.passed and rep_2.passed, m)


CRITERIA = {
    "uniform-qcolor": crit_uniform_qcolor,
    "birthday": crit_birthday,
    "sqrt-atom": crit_sqrt_atom,
    "log-atom": crit_log_atom,
    "joint-collisions": crit_joint,
    "mfold": crit_mfold,
    "general-mix": crit_general_mix,
    "dlp": crit_dlp,
    "pa": crit_pa,
    "path": crit_path,
    "oracle-triangle": crit_oracle_triangle,
}


def run_suite(seed: int = DEFAULT_SEED, threads: int = 1, only=None,
              log=None) -> dict:
    """Run the named criteria (all by default) and build the report dict.

    The report is a pure function of the seed: no timings or timestamps, so
    a rerun under any thread count serializes to identical bytes.
    """
    names = list(CRITERIA) if not only else list(only)
    unknown = [n for n in names if n not in CRITERIA]
    if unknown:
        raise KeyError(f"unknown criteria: {', '.join(unknown)}")
    results = []
    for name in names:
        t0 = time.perf_counter()
        try:
            res = CRITERIA[name](seed, threads)
        except Exception as exc:  # noqa: BLE001 - reported, not swallowed
            res = CriterionResult(name, False, {
                "error": f"{type(exc).__name__}: {exc}",
            })
        if log:
            log(f"[{'PASS' if res.passed else 'FAIL'}] {name} "
                f"({time.perf_counter() - t0:.1f}s)")
        results.append(res)
    return {
        "seed": seed,
        "criteria": [
            {"name": r.name, "passed": r.passed, "metrics": r.metrics}
            for r in results
        ],
        "all_passed": all(r.passed for r in results),
    }


def report_json_bytes(report: dict) -> bytes:
    """Canonical byte serialization used for the determinism criterion."""
    return json.dumps(report, sort_keys=True, separators=(",", ":")).encode()


def run_determinism_check(seed: int = DEFAULT_SEED, log=None) -> dict:
    """Rerun the full suite under two thread counts; reports must match bytewise."""
    rep1 = run_suite(seed, threads=1, log=log)
    rep2 = run_suite(seed, threads=2, log=log)
    identical = report_json_bytes(rep1) == report_json_bytes(rep2)
    return {"identical": identical, "report": rep1}


def _stderr_log(msg: str):
    print(msg, file=sys.stderr)
