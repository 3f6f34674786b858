"""Staircase-correlated preference domain where harm stays below one half.

A partitioned market satisfies the sequential-dual-dictator property when, in
every community's restricted profile, the agents anyone places at rank <= r
number at most r+1. Under that structure each segregated trading cycle has
length at most 2, so at least half of every community trades in distinct
cycles and at most half can be harmed by integration.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .integration import ExtendedHousingMarket, solve_scheme, analyze
from .market import market_from_pref_array


class SddDomainError(ValueError):
    """Raised when an operation requires the staircase property and it fails."""


@dataclass(frozen=True)
class CommunitySddDetail:
    """q_sets[r-1]: agents first placed at restricted rank r by some member;
    cumulative_sizes[r-1] = |Q(r)|."""

    members: tuple[str, ...]
    q_sets: tuple[tuple[str, ...], ...]
    cumulative_sizes: tuple[int, ...]


@dataclass(frozen=True)
class SddDiagnostic:
    satisfied: bool
    communities: tuple[CommunitySddDetail, ...]
    first_violation: Optional[tuple[int, int, tuple[str, ...]]]
    """(community index, rank r, Q(r)) for the first |Q(r)| > r+1, if any."""


def sdd_diagnostic(ehm: ExtendedHousingMarket) -> SddDiagnostic:
    """Evaluate |Q(r)| <= r+1 on every community's restricted profile."""
    market = ehm.market
    details = []
    violation: Optional[tuple[int, int, tuple[str, ...]]] = None
    for j, members in enumerate(ehm.communities):
        ordered = tuple(sorted(members, key=market.index))
        idx = [market.index(a) for a in ordered]
        member_set = set(idx)
        nj = len(ordered)
        restricted = {i: [h for h in market.pref[i] if int(h) in member_set]
                      for i in idx}
        placed: set[int] = set()
        q_sets = []
        cum = []
        q_union: list[str] = []
        for r in range(1, nj + 1):
            fresh = []
            for i in idx:
                h = int(restricted[i][r - 1])
                if h not in placed:
                    placed.add(h)
                    fresh.append(market.agents[h])
            q_sets.append(tuple(fresh))
            q_union.extend(fresh)
            cum.append(len(placed))
            if violation is None and len(placed) > r + 1:
                violation = (j, r, tuple(q_union))
        details.append(CommunitySddDetail(ordered, tuple(q_sets), tuple(cum)))
    return SddDiagnostic(satisfied=violation is None,
                         communities=tuple(details),
                         first_violation=violation)


def sample_sdd_profile(sizes: Sequence[int], seed: int) -> ExtendedHousingMarket:
    """Draw a partitioned market that satisfies the staircase property.

    Per community: one random member ordering anchors a staircase; each
    member's restricted rank-r house is chosen uniformly among the first
    min(r+1, size) anchored houses still unused (always two choices until the
    last step, so the fill never dead-ends); cross-community houses are
    shuffled and riffled in uniformly.
    """
    sizes = tuple(int(s) for s in sizes)
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("community sizes must be positive")
    n = sum(sizes)
    k = len(sizes)
    comm = np.repeat(np.arange(k, dtype=np.int64), sizes)
    pref = np.empty((n, n), np.int64)
    buf = [np.empty(n, np.int64) for _ in range(5)]
    with np.errstate(over="ignore"):
        kernels._sdd_fill_profile(pref, comm, k, np.uint64(seed), *buf)
    market = market_from_pref_array(pref)
    at = 0
    communities = []
    for s in sizes:
        communities.append(market.agents[at:at + s])
        at += s
    return ExtendedHousingMarket(market, tuple(communities))


@dataclass(frozen=True)
class SddBoundReport:
    """Both routes to the half-harm guarantee, checked independently."""

    harmed: tuple[int, ...]
    sizes: tuple[int, ...]
    half_margins: tuple[int, ...]
    """margin_j = size_j - 2*harmed_j; nonnegative iff harmed_j <= size_j / 2."""
    cycles: tuple[int, ...]
    cycle_length_histogram: dict[int, int]
    max_cycle_length: int
    ok: bool


def verify_sdd_bound(ehm: ExtendedHousingMarket) -> SddBoundReport:
    """Solve the scheme and check the harm cap plus the cycle-length cap.

    Requires the staircase property (SddDomainError otherwise). Independently
    asserts: per community, 2*harmed <= size; every segregated cycle has
    length <= 2 (hence cycles >= size/2, re-deriving the cap through the
    harmed <= size - cycles route as well).
    """
    diag = sdd_diagnostic(ehm)
    if not diag.satisfied:
        j, r, q = diag.first_violation
        raise SddDomainError(
            f"profile leaves the staircase domain: community {j} has "
            f"{len(q)} agents placed at rank <= {r} (cap {r + 1})")
    scheme = solve_scheme(ehm)
    report = analyze(ehm, scheme)
    harmed = report.harmed_by_community()
    sizes = report.sizes
    cycles = report.community_cycles
    hist: dict[int, int] = {}
    for trace in scheme.segregated_traces:
        for length in trace.cycle_lengths():
            hist[length] = hist.get(length, 0) + 1
    max_len = max(hist) if hist else 0
    half_margins = tuple(nj - 2 * h for nj, h in zip(sizes, harmed))
    ok = (all(m >= 0 for m in half_margins)
          and max_len <= 2
          and all(2 * t >= nj for t, nj in zip(cycles, sizes))
          and all(h <= nj - t for h, nj, t in zip(harmed, sizes, cycles)))
    return SddBoundReport(
        harmed=harmed,
        sizes=sizes,
        half_margins=half_margins,
        cycles=cycles,
        cycle_length_histogram=dict(sorted(hist.items())),
        max_cycle_length=max_len,
        ok=ok,
    )
