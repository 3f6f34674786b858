"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``. Two sub-checks are marked
strict-xfail because the claims they verify are contradicted by exhaustive
enumeration / high-precision simulation; see the assertions' comments and the
bound notes in sslab.verify. Everything else must pass at the stated
tolerances.
"""
from __future__ import annotations

import math
import time
from fractions import Fraction

import pytest

from sslab import (SimulationConfig, WorstCaseSpec, build_worst_case,
                   expected_cycles, expected_gain, expected_rank_sum,
                   integrate, run_simulation, sdd_diagnostic,
                   verify_extremal, verify_sdd_bound)
from sslab.verify import (exhaustive_scan, run_core_suite, run_rsd_suite,
                          run_sdd_suite, run_strategyproof_suite)

MASTER_SEED = 2026


def report(num: int, ok: bool, text: str) -> None:
    print(f"\n[criterion {num:2d}] {'PASS' if ok else 'FAIL'}: {text}")
    assert ok, f"criterion {num}: {text}"


class TestCriterion1GoldenInstance:
    def test_golden_numbers_and_runtime(self, seven_agent_ehm):
        from sslab import solve_scheme
        scheme = solve_scheme(seven_agent_ehm)
        seg = scheme.segregated_combined().as_dict()
        integ = scheme.integrated.as_dict()
        rep = integrate(seven_agent_ehm)
        ok = (seg == {"a": "c", "b": "a", "c": "b", "d": "g", "e": "d",
                      "f": "e", "g": "f"}
              and integ == {"a": "d", "d": "a", "b": "b", "c": "c", "e": "e",
                            "f": "f", "g": "g"}
              and rep.total_gain == -18
              and rep.avg_gain == Fraction(-18, 49)
              and len(rep.harmed) == 5
              and len(rep.benefited) == 2)
        best = min(_time_once(seven_agent_ehm) for _ in range(200))
        ok = ok and best < 1e-3
        report(1, ok, f"golden instance exact; fastest solve+analyze "
                      f"{best * 1e6:.0f} us (< 1 ms)")


def _time_once(ehm):
    t0 = time.perf_counter()
    integrate(ehm)
    return time.perf_counter() - t0


class TestCriterion2WorstCaseGrid:
    def test_tightness_grid(self):
        t0 = time.perf_counter()
        cells = 0
        for n in range(2, 11):
            for k in range(2, n + 1):
                out = verify_extremal(build_worst_case(WorstCaseSpec(n, k)))
                assert out.harmed_extremal and out.gain_extremal, (n, k)
                cells += 1
        for k in (2, 3, 5):
            out = verify_extremal(build_worst_case(WorstCaseSpec(100, k)))
            assert out.harmed_extremal and out.gain_extremal, (100, k)
            cells += 1
        wall = time.perf_counter() - t0
        ok = wall < 1.0
        report(2, ok, f"{cells} grid cells hit both bounds exactly "
                      f"in {wall:.3f} s (< 1 s)")


class TestCriterion3ExhaustiveBounds:
    def test_lemmas_and_counting_bounds_all_n_up_to_4(self):
        t0 = time.perf_counter()
        total = 0
        for n in (2, 3, 4):
            out = exhaustive_scan(n)
            assert out.ok, f"hard check failed at n={n}: {out.witness}"
            total += out.instances
        wall = time.perf_counter() - t0
        ok = total == 8 + 1080 + 331776 * 15 and wall < 300
        report(3, ok, f"lemmas + harm caps hold on all {total} instances "
                      f"in {wall:.1f} s (< 5 min)")

    @pytest.mark.xfail(strict=True, reason=(
        "The advertised average-gain floor (-n^2+n+k^2+k)/(2n^2) presumes k "
        "strictly-gaining agents; profiles whose protected agents are merely "
        "unaffected sit below it (minimal case: two singleton communities, "
        "both agents ranking their own house first, gain 0 < +1/2). The "
        "enumeration the criterion itself prescribes produces these "
        "counterexamples, so the floor check cannot pass as stated; the "
        "floor actually implied by the rank lemmas, with k^2-k in place of "
        "k^2+k, is enforced in the main scan above."))
    def test_stated_average_gain_floor(self):
        misses = sum(exhaustive_scan(n).stated_floor_misses for n in (2, 3, 4))
        report(3, misses == 0,
               f"stated average-gain floor holds everywhere (misses={misses})")


class TestCriterion4CoreOracle:
    def test_exhaustive_and_sampled_uniqueness(self):
        out = run_core_suite(seed=MASTER_SEED, per_size=2500,
                             sizes=(4, 5, 6, 7))
        ok = out.passed and out.instances == 216 + 4 * 2500
        report(4, ok, f"core filter = solver on {out.instances} markets "
                      f"(216 exhaustive + 10^4 sampled), zero discrepancies")


class TestCriterion5ExpectedGainFormula:
    def test_formula_and_monte_carlo(self):
        t0 = time.perf_counter()
        formula = {nj: expected_gain(100, nj).rank_units for nj in (60, 30, 10)}
        ok = (round(formula[60], 2) == 1.98
              and round(formula[30], 2) == 5.95
              and round(formula[10], 2) == 16.16)
        summary = run_simulation(SimulationConfig((60, 30, 10), trials=1000,
                                                  seed=MASTER_SEED))
        published_run = {60: 2.07, 30: 5.93, 10: 16.12}
        for stats in summary.communities:
            band = 3 * stats.gain_ranks.se
            ok = ok and abs(stats.gain_ranks.mean - formula[stats.size]) <= band
            ok = ok and abs(published_run[stats.size]
                            - formula[stats.size]) <= band
        wall = time.perf_counter() - t0
        ok = ok and wall < 30
        means = [f"{c.gain_ranks.mean:.2f}" for c in summary.communities]
        report(5, ok, f"rank-unit gains 1.98/5.95/16.16 reproduced; "
                      f"simulated {'/'.join(means)} within 3 SE; "
                      f"published run inside the band ({wall:.1f} s)")


PUBLISHED_TABLE = {
    # community size, k -> (benefit %, sd, harmed %, sd)
    (25, 2): (53.52, 6.8, 19.95, 4.66),
    (25, 3): (64.68, 5.0, 17.63, 3.54),
    (25, 5): (75.05, 3.59, 14.08, 2.55),
    (50, 2): (54.64, 4.47, 21.45, 3.47),
    (50, 3): (65.57, 3.52, 18.47, 2.66),
    (50, 5): (75.54, 2.41, 14.67, 1.84),
    (100, 2): (55.4, 3.28, 22.17, 2.34),
    (100, 3): (66.06, 2.42, 18.99, 1.8),
    (100, 5): (75.88, 1.78, 14.88, 1.34),
}


class TestCriterion6TableReproduction:
    def test_all_nine_cells(self):
        # the published table reports k equal communities of n agents each;
        # equal sizes match its surrounding equal-size analysis, and all 18
        # values land inside the tolerance under that reading
        t0 = time.perf_counter()
        ok = True
        rows = []
        for (n1, k), (pb, pbs, ph, phs) in PUBLISHED_TABLE.items():
            s = run_simulation(SimulationConfig(tuple([n1] * k), trials=1000,
                                                seed=MASTER_SEED))
            b = 100 * s.frac_benefited.mean
            h = 100 * s.frac_harmed.mean
            tol_b = 3 * pbs / math.sqrt(1000) + 0.5
            tol_h = 3 * phs / math.sqrt(1000) + 0.5
            cell_ok = abs(b - pb) <= tol_b and abs(h - ph) <= tol_h
            ok = ok and cell_ok
            rows.append(f"{n1}x{k}:{b:.2f}/{h:.2f}{'' if cell_ok else '!'}")
        wall = time.perf_counter() - t0
        ok = ok and wall < 600
        report(6, ok, f"benefit/harm fractions match the published table "
                      f"in all 9 cells ({wall:.1f} s): {' '.join(rows)}")


class TestCriterion7RankAndCycleCalibration:
    def test_rank_sum_calibration(self):
        ok = True
        lines = []
        for n in (10, 50):
            s = run_simulation(SimulationConfig((n,), trials=10_000,
                                                seed=MASTER_SEED + n))
            want = expected_rank_sum(n)
            got = s.integrated_rank_sum
            ok = ok and abs(got.mean - want) <= 3 * got.se
            lines.append(f"n={n}: {got.mean:.2f} vs {want:.2f} "
                         f"(3se={3 * got.se:.2f})")
        report(7, ok, "mean total rank within 3 SE of (n+1)H_n - n: "
                      + "; ".join(lines))

    @pytest.mark.xfail(strict=True, reason=(
        "The stated window [sqrt(100pi), sqrt(100pi)+log50+3SE] assumes the "
        "log-order remainder of the expected cycle count is nonnegative. "
        "Exhaustive enumeration at n<=4 (e.g. 2.9343 vs sqrt(8pi)=5.01) and "
        "10^4-trial runs at n=50 (14.73 vs 17.72, ~135 standard errors low) "
        "show the remainder is negative and grows like -(2/3)log n, so the "
        "mean sits below the stated lower edge. The two-sided calibration "
        "below captures what actually holds."))
    def test_cycle_count_stated_window(self):
        s = run_simulation(SimulationConfig((50,), trials=10_000,
                                            seed=MASTER_SEED))
        lo = expected_cycles(50)
        hi = lo + math.log(50) + 3 * s.integrated_cycles.se
        mean = s.integrated_cycles.mean
        report(7, lo <= mean <= hi,
               f"cycle count {mean:.3f} inside stated window "
               f"[{lo:.3f}, {hi:.3f}]")

    def test_cycle_count_two_sided_calibration(self):
        # the defensible version: leading term sqrt(2 pi n) plus or minus a
        # log n allowance covers the observed mean
        s = run_simulation(SimulationConfig((50,), trials=10_000,
                                            seed=MASTER_SEED))
        center = expected_cycles(50)
        slack = math.log(50) + 3 * (s.integrated_cycles.se or 0.0)
        mean = s.integrated_cycles.mean
        ok = abs(mean - center) <= slack
        report(7, ok, f"cycle count {mean:.3f} within log-n allowance of "
                      f"sqrt(2 pi 50) = {center:.3f}")


class TestCriterion8RsdEquivalence:
    def test_exact_distribution_equality(self):
        t0 = time.perf_counter()
        out = run_rsd_suite(seed=MASTER_SEED, profiles_per_n=100, max_n=5)
        wall = time.perf_counter() - t0
        ok = out.passed and out.instances == 300 and wall < 120
        report(8, ok, f"lottery equality exact on {out.instances} profiles "
                      f"(100 each for n=3,4,5) in {wall:.1f} s (< 2 min)")


class TestCriterion9SddSuite:
    def test_fixtures_and_falsification_run(self, seven_agent_ehm,
                                             staircase_ehm):
        t0 = time.perf_counter()
        good = verify_sdd_bound(staircase_ehm)
        diag = sdd_diagnostic(seven_agent_ehm)
        ok = good.ok and not diag.satisfied
        j, r, placed = diag.first_violation
        ok = ok and (j, r) == (0, 1) and len(placed) == 3
        out = run_sdd_suite(seed=MASTER_SEED, trials=2500,
                            size_sets=((5, 4), (6, 6), (10, 10),
                                       (10, 10, 10)))
        wall = time.perf_counter() - t0
        ok = ok and out.passed and out.instances == 10_000 and wall < 120
        report(9, ok, f"staircase fixtures behave; 10^4 sampled instances "
                      f"show no harm-cap or cycle-length violation "
                      f"({wall:.1f} s, < 2 min)")


class TestCriterion10StrategyProofness:
    def test_no_profitable_misreport(self):
        out = run_strategyproof_suite(seed=MASTER_SEED, deviations=1000,
                                      profiles_per_n=10,
                                      sampled_sizes=(4, 5, 6))
        ok = out.passed and out.instances == 216 + 30
        report(10, ok, f"no profitable misreport: 216 exhaustive profiles "
                       f"at n=3 plus 10^3 deviations/profile at n=4..6")
