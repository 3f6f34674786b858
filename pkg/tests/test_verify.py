from __future__ import annotations

import numpy as np

from sslab.verify import (all_perms, exhaustive_scan, run_bound_suite,
                          run_core_suite, run_lemma_suite, run_rsd_suite,
                          run_sdd_suite, run_strategyproof_suite,
                          set_partitions)


def test_set_partitions_counts_follow_bell_numbers():
    for n, bell in ((1, 1), (2, 2), (3, 5), (4, 15)):
        parts, kvec = set_partitions(n)
        assert parts.shape == (bell, n)
        assert kvec.max() <= n
        # each row renumbers communities by first appearance
        for row in parts:
            seen = []
            for v in row:
                if v not in seen:
                    seen.append(v)
            assert seen == list(range(len(seen)))


def test_all_perms_shape():
    assert all_perms(4).shape == (24, 4)
    assert (all_perms(3)[0] == np.array([0, 1, 2])).all()


def test_lemma_suite_small():
    out = run_lemma_suite(max_n=3)
    assert out.passed
    assert out.instances == 2 * 4 + 5 * 216
    assert out.details["stated_floor_misses"] > 0


def test_exhaustive_scan_reports_instances():
    out = exhaustive_scan(2)
    assert out.ok and out.instances == 8


def test_core_suite_small():
    out = run_core_suite(seed=5, per_size=40, sizes=(4, 5))
    assert out.passed
    assert out.instances == 216 + 80


def test_bound_suite_small():
    out = run_bound_suite(seed=6, samples=60)
    assert out.passed


def test_rsd_suite_small():
    out = run_rsd_suite(seed=7, profiles_per_n=5, max_n=4)
    assert out.passed
    assert out.instances == 10


def test_sdd_suite_small():
    out = run_sdd_suite(seed=8, trials=100, size_sets=((4, 4), (5, 3)))
    assert out.passed
    assert out.instances == 200


def test_strategyproof_suite_small():
    out = run_strategyproof_suite(seed=9, deviations=50, profiles_per_n=2)
    assert out.passed
