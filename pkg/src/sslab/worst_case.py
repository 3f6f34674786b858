"""Extremal instances: markets where integration does maximal damage.

The construction designates one pivot agent per community; pivots want each
other's houses in a ring and settle for the last house of their own community
when segregated, while every non-pivot wants its predecessor's house. Merging
lets the pivot ring trade, which strands everyone else: exactly n - k agents
end up worse off and the average percentile gain lands exactly on
(-n^2 + n + k^2 + k) / (2 n^2), the extremal value of this family. (Whether
that value floors ALL instances is a separate question; see the bound notes
in sslab.verify.)
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .integration import ExtendedHousingMarket, IntegrationReport, integrate
from .market import market_from_pref_array


@dataclass(frozen=True)
class WorstCaseSpec:
    """Target shape of an extremal instance; sizes default to a near-even split."""

    n: int
    k: int
    sizes: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("need at least two communities to integrate")
        if self.n < self.k:
            raise ValueError(f"n={self.n} cannot host k={self.k} nonempty communities")
        if self.sizes is not None:
            if len(self.sizes) != self.k:
                raise ValueError("sizes length must equal k")
            if any(s < 1 for s in self.sizes):
                raise ValueError("community sizes must be positive")
            if sum(self.sizes) != self.n:
                raise ValueError(f"sizes sum to {sum(self.sizes)}, expected n={self.n}")

    def resolved_sizes(self) -> tuple[int, ...]:
        if self.sizes is not None:
            return self.sizes
        return near_equal_sizes(self.n, self.k)


def near_equal_sizes(n: int, k: int) -> tuple[int, ...]:
    q, r = divmod(n, k)
    return tuple([q + 1] * r + [q] * (k - r))


def build_worst_case(spec: WorstCaseSpec) -> ExtendedHousingMarket:
    """Instance achieving both worst-case bounds exactly.

    Agents are numbered community by community; community j's first agent is
    its pivot, its last agent is the pivot's segregated fallback. Pivot rows:
    next community's pivot first, own fallback second, rest ascending.
    Non-pivot rows: predecessor first, then the unplaced pivots ascending,
    then everything else ascending. A singleton community's pivot doubles as
    its own fallback, so its second choice is its own house.
    """
    sizes = spec.resolved_sizes()
    n, k = spec.n, spec.k
    starts = np.zeros(k, np.int64)
    for j in range(1, k):
        starts[j] = starts[j - 1] + sizes[j - 1]
    pivots = [int(starts[j]) for j in range(k)]
    lasts = [int(starts[j] + sizes[j] - 1) for j in range(k)]
    pivot_set = set(pivots)
    pref = np.empty((n, n), np.int64)
    for j in range(k):
        for offset in range(sizes[j]):
            i = int(starts[j]) + offset
            if i in pivot_set:
                head = [pivots[(j + 1) % k], lasts[j]]
            else:
                head = [i - 1]
                head += [p for p in pivots if p not in head]
            seen = set(head)
            row = head + [h for h in range(n) if h not in seen]
            pref[i] = row
    market = market_from_pref_array(pref)
    communities = tuple(
        tuple(market.agents[int(starts[j]) + o] for o in range(sizes[j]))
        for j in range(k))
    return ExtendedHousingMarket(market, communities)


def worst_case_gamma_bar(n: int, k: int) -> Fraction:
    """Average percentile gain of the extremal family:
    (-n^2 + n + k^2 + k) / (2 n^2), exact."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    return Fraction(-n * n + n + k * k + k, 2 * n * n)


@dataclass(frozen=True)
class ExtremalityReport:
    """How close an instance comes to both worst-case bounds."""

    harmed_extremal: bool
    harmed_slack: int
    gain_extremal: bool
    gain_slack: Fraction
    report: IntegrationReport


def verify_extremal(ehm: ExtendedHousingMarket) -> ExtremalityReport:
    """Solve the instance and measure its slack against both bounds."""
    report = integrate(ehm)
    n, k = report.n, report.k
    harmed_slack = (n - k) - len(report.harmed)
    gain_slack = report.avg_gain - worst_case_gamma_bar(n, k)
    return ExtremalityReport(
        harmed_extremal=harmed_slack == 0,
        harmed_slack=harmed_slack,
        gain_extremal=gain_slack == 0,
        gain_slack=gain_slack,
        report=report,
    )


def build_worst_case_nk(n: int, k: int, sizes: Optional[Sequence[int]] = None) -> ExtendedHousingMarket:
    return build_worst_case(WorstCaseSpec(n, k, tuple(sizes) if sizes else None))
