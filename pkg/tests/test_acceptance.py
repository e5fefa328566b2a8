"""The shipping acceptance gate.

Runs every criterion at its stated tolerance via the library's acceptance
suite (one full run shared across tests), prints one pass/fail line per
criterion, and asserts each clause.  Two clauses are implemented exactly as
specified but are mathematically unattainable; their tests fail honestly and
point to the analysis in the repository notes:

* path formula-vs-oracle identity: the closed-form run-length expectation is
  provably wrong for non-uniform color probabilities (the exact
  absorbing-chain oracle and 2e6-trial Monte Carlo agree against it), so the
  1e-9 identity over random configurations cannot hold;
* oracle-triangle discrete legs: at n=100 the exact KS distance between the
  discrete collision law and the continuous embedded law is 0.04748
  (computable in closed form via an occupancy DP), above the stated
  eps + 0.02 = 0.0262 band.  The continuous leg passes, and the discrete
  engine is validated exactly against the occupancy DP in test_urn.py.
"""

import sys

import pytest

from collide import acceptance
from collide.acceptance import DEFAULT_SEED, report_json_bytes, run_suite


@pytest.fixture(scope="session")
def suite_report():
    return run_suite(DEFAULT_SEED, threads=1,
                     log=lambda msg: print(msg, file=sys.stderr))


def _criterion(report, name):
    for c in report["criteria"]:
        if c["name"] == name:
            return c
    raise KeyError(name)


def _announce(crit):
    flag = "PASS" if crit["passed"] else "FAIL"
    print(f"[criterion] {crit['name']}: {flag}  {crit['metrics']}")


def test_criterion_1_uniform_two_color_law(suite_report):
    c = _criterion(suite_report, "uniform-qcolor")
    _announce(c)
    m = c["metrics"]
    assert m["rayleigh_ks"] <= m["rayleigh_threshold"]
    assert m["runtime_ok"], "n=1e4, 5e4 trials must simulate within 1 minute"
    assert c["passed"]


def test_criterion_2_birthday_numbers(suite_report):
    c = _criterion(suite_report, "birthday")
    _announce(c)
    m = c["metrics"]
    assert abs(m["mean_draws"] - m["oracle_mean"]) <= 0.01 * m["oracle_mean"]
    assert abs(m["half_count"] - 16.93) <= 0.01 * 16.93
    assert c["passed"]


def test_criterion_3_sqrt_atom_law(suite_report):
    c = _criterion(suite_report, "sqrt-atom")
    _announce(c)
    assert c["metrics"]["atom_ks"] <= c["metrics"]["atom_threshold"]
    assert c["passed"]


def test_criterion_4_log_atom_law(suite_report):
    c = _criterion(suite_report, "log-atom")
    _announce(c)
    assert c["metrics"]["atom_ks"] <= c["metrics"]["atom_threshold"]
    assert c["passed"]


def test_criterion_5_joint_collisions(suite_report):
    c = _criterion(suite_report, "joint-collisions")
    _announce(c)
    m = c["metrics"]
    assert m["sim_ks"] <= m["sim_threshold"]
    assert m["limitproc_ks"] <= m["limitproc_threshold"]
    assert c["passed"]


def test_criterion_6_mfold(suite_report):
    c = _criterion(suite_report, "mfold")
    _announce(c)
    m = c["metrics"]
    assert m["mfold_ks"] <= m["mfold_threshold"]
    assert m["m1_identity_gap"] <= 1e-12
    assert c["passed"]


def test_criterion_7_general_law(suite_report):
    c = _criterion(suite_report, "general-mix")
    _announce(c)
    m = c["metrics"]
    assert m["mix_ks"] <= m["mix_threshold"]
    assert m["degenerate_ks"] <= m["degenerate_threshold"]
    assert c["passed"]


def test_criterion_8_dlp(suite_report):
    c = _criterion(suite_report, "dlp")
    _announce(c)
    m = c["metrics"]
    assert m["constants_ok"], (m["gs_constant"], m["ags_constant"])
    assert m["dominance_ok"]
    for variant in ("gs", "ags"):
        for x in (0.0, 0.2, 0.45):
            assert m[f"{variant}_x{x}_ks"] <= m[f"{variant}_x{x}_threshold"], (variant, x)
    assert m["runtime_ok"], "DLP instance sweep must finish within 5 minutes"
    assert c["passed"]


def test_criterion_9_pa(suite_report):
    c = _criterion(suite_report, "pa")
    _announce(c)
    m = c["metrics"]
    assert m["exp2_ks"] <= m["exp2_threshold"]
    assert m["censor_rate"] < 0.001
    assert c["passed"]


def test_criterion_10_path_law_and_fair_coin(suite_report):
    c = _criterion(suite_report, "path")
    _announce(c)
    m = c["metrics"]
    assert m["exp1_ks"] <= m["exp1_threshold"]
    assert m["fair_coin_formula"] == 3.0
    assert abs(m["fair_coin_oracle"] - 3.0) <= 1e-12


def test_criterion_10_path_formula_oracle_identity_as_specified(suite_report):
    # KNOWN-UNATTAINABLE clause, asserted verbatim: the closed formula and the
    # exact oracle must agree to 1e-9 on 50 random (c<=5, m<=6) configs.
    # See /root/notes/decisions.md for the proof that this cannot hold.
    m = _criterion(suite_report, "path")["metrics"]
    assert m["formula_oracle_max_gap"] <= 1e-9, (
        "the closed-form path expectation deviates from the exact "
        f"absorbing-chain oracle by up to {m['formula_oracle_max_gap']:.6g}; "
        "the formula is provably incorrect for non-uniform probabilities "
        "(fails even for the uniform 2-color run of length 3: 5 vs the "
        "classical 7), so this identity cannot be satisfied by any "
        "implementation")


def test_criterion_11_oracle_triangle_continuous_leg(suite_report):
    c = _criterion(suite_report, "oracle-triangle")
    _announce(c)
    m = c["metrics"]
    assert m["cont_vs_law_ks"] <= m["cont_vs_law_threshold"]


def test_criterion_11_oracle_triangle_discrete_legs_as_specified(suite_report):
    # KNOWN-UNATTAINABLE clause, asserted verbatim: at n=100 the exact KS
    # between the discrete law and the continuous embedded law is 0.04748,
    # above eps + 0.02.  The discrete engine itself is validated exactly
    # against the occupancy-DP law in test_urn.py.
    m = _criterion(suite_report, "oracle-triangle")["metrics"]
    assert m["disc_vs_law_ks"] <= m["disc_vs_law_threshold"], (
        "intrinsic discrete-vs-continuous gap at n=100 "
        f"(exact value 0.04748) exceeds the stated band: "
        f"{m['disc_vs_law_ks']:.5f} > {m['disc_vs_law_threshold']:.5f}")
    assert m["disc_vs_cont_ks"] <= m["disc_vs_cont_threshold"]


def test_criterion_12_determinism_across_thread_counts(suite_report):
    rerun = run_suite(DEFAULT_SEED, threads=2,
                      log=lambda msg: print(msg, file=sys.stderr))
    assert report_json_bytes(rerun) == report_json_bytes(suite_report), (
        "acceptance report must serialize to identical bytes under any "
        "thread count")
    print("[criterion] determinism: PASS (byte-identical reports, "
          "threads 1 vs 2)")


def test_report_structure(suite_report):
    assert set(suite_report) == {"seed", "criteria", "all_passed"}
    assert suite_report["seed"] == DEFAULT_SEED
    names = [c["name"] for c in suite_report["criteria"]]
    assert names == list(acceptance.CRITERIA)
