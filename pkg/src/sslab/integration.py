"""Markets partitioned into communities: segregated vs integrated solves.

The segregated side solves each community on its restricted preferences; the
integrated side solves the whole market. Gains are always measured in
full-list rank units, so "+2" means the received house moved up two places in
the agent's complete ranking.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .market import (Allocation, HousingMarket, MarketValidationError,
                     TTCTrace, ttc_solve)


@dataclass(frozen=True, eq=False)
class ExtendedHousingMarket:
    """A market plus a deterministic partition of its agents into communities."""

    market: HousingMarket
    communities: tuple[tuple[str, ...], ...]
    _comm_index: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.communities:
            raise MarketValidationError("at least one community is required")
        comm = np.full(self.market.n, -1, np.int64)
        for j, members in enumerate(self.communities):
            if not members:
                raise MarketValidationError(f"community {j} is empty")
            for a in members:
                try:
                    i = self.market.index(a)
                except KeyError:
                    raise MarketValidationError(
                        f"community {j} lists unknown agent {a!r}") from None
                if comm[i] != -1:
                    raise MarketValidationError(
                        f"agent {a!r} appears in communities {comm[i]} and {j}")
                comm[i] = j
        missing = [self.market.agents[i] for i in np.flatnonzero(comm == -1)]
        if missing:
            raise MarketValidationError(
                f"communities do not cover agents: {', '.join(missing)}")
        comm.setflags(write=False)
        object.__setattr__(self, "_comm_index", comm)

    @property
    def n(self) -> int:
        return self.market.n

    @property
    def k(self) -> int:
        return len(self.communities)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.communities)

    def community_of(self, agent: str) -> int:
        return int(self._comm_index[self.market.index(agent)])

    def community_index(self) -> np.ndarray:
        """Agent index -> community id, aligned with market.agents."""
        return self._comm_index


def make_ehm(agents, preferences, communities) -> ExtendedHousingMarket:
    from .market import validate_market
    market = validate_market(agents, preferences)
    return ExtendedHousingMarket(market, tuple(tuple(c) for c in communities))


def restrict_preferences(ehm: ExtendedHousingMarket, j: int) -> HousingMarket:
    """The community-j market: rows keep only houses owned inside C_j."""
    if not 0 <= j < ehm.k:
        raise IndexError(f"community index {j} out of range (k={ehm.k})")
    members = ehm.communities[j]
    member_set = {ehm.market.index(a) for a in members}
    local = {g: l for l, g in enumerate(sorted(member_set))}
    names = tuple(ehm.market.agents[g] for g in sorted(member_set))
    nj = len(names)
    pref = np.empty((nj, nj), np.int64)
    for g in sorted(member_set):
        row = [local[h] for h in ehm.market.pref[g] if int(h) in member_set]
        pref[local[g]] = row
    return HousingMarket(names, pref)


@dataclass(frozen=True)
class MatchingScheme:
    """One segregated allocation per community plus the integrated one."""

    segregated: tuple[Allocation, ...]
    integrated: Allocation
    segregated_traces: tuple[TTCTrace, ...]
    integrated_trace: TTCTrace

    def segregated_combined(self) -> Allocation:
        """All segregated allocations merged into one full-market allocation."""
        agents = self.integrated.agents
        index = {a: i for i, a in enumerate(agents)}
        assign = [-1] * len(agents)
        for alloc in self.segregated:
            for a, h in alloc.as_dict().items():
                assign[index[a]] = index[h]
        return Allocation(agents, tuple(assign))


def solve_scheme(ehm: ExtendedHousingMarket) -> MatchingScheme:
    """Solve each community in isolation and the whole market at once.

    The segregated runs reuse the full preference rows and simply skip houses
    outside the community, which coincides with solving the restricted market.
    """
    market = ehm.market
    comm = ehm.community_index()
    seg_allocs = []
    seg_traces = []
    for j, members in enumerate(ehm.communities):
        assign, cycles = kernels.ttc_arrays(market.pref, comm == j)
        ordered = tuple(sorted(members, key=market.index))
        local = {market.index(a): l for l, a in enumerate(ordered)}
        seg_allocs.append(Allocation(
            ordered,
            tuple(local[int(assign[market.index(a)])] for a in ordered)))
        seg_traces.append(TTCTrace(tuple(
            tuple(tuple(market.agents[i] for i in cyc) for cyc in rnd)
            for rnd in cycles)))
    integrated, int_trace = ttc_solve(market)
    return MatchingScheme(tuple(seg_allocs), integrated,
                          tuple(seg_traces), int_trace)


@dataclass(frozen=True)
class IntegrationReport:
    """Per-agent and aggregate welfare effects of integrating the communities.

    gain = segregated rank - integrated rank (positive: integration helped);
    avg_gain = total_gain / n^2 kept exact; community_avg_gain[j] divides by
    n * size_j. harmed / unaffected / benefited partition the agents.
    """

    agents: tuple[str, ...]
    sizes: tuple[int, ...]
    community_of: dict[str, int]
    segregated_rank: dict[str, int]
    integrated_rank: dict[str, int]
    gains: dict[str, int]
    total_gain: int
    avg_gain: Fraction
    community_gain: tuple[int, ...]
    community_avg_gain: tuple[Fraction, ...]
    benefited: tuple[str, ...]
    unaffected: tuple[str, ...]
    harmed: tuple[str, ...]
    community_cycles: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def total_cycles(self) -> int:
        return sum(self.community_cycles)

    def classification(self, agent: str) -> str:
        g = self.gains[agent]
        return "benefited" if g > 0 else ("harmed" if g < 0 else "unaffected")

    def community_members(self, j: int, among: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(a for a in among if self.community_of[a] == j)

    def harmed_by_community(self) -> tuple[int, ...]:
        return tuple(len(self.community_members(j, self.harmed))
                     for j in range(self.k))

    def benefited_by_community(self) -> tuple[int, ...]:
        return tuple(len(self.community_members(j, self.benefited))
                     for j in range(self.k))


def analyze(ehm: ExtendedHousingMarket, scheme: MatchingScheme) -> IntegrationReport:
    """Measure every agent's gain from integration under the given scheme."""
    market = ehm.market
    if scheme.integrated.agents != market.agents:
        raise MarketValidationError("scheme does not belong to this market")
    want = tuple(tuple(sorted(c, key=market.index)) for c in ehm.communities)
    if tuple(a.agents for a in scheme.segregated) != want:
        raise MarketValidationError("scheme communities do not match the partition")
    n = market.n
    rank_t = market.rank_table()
    seg_full = scheme.segregated_combined()
    seg_rank: dict[str, int] = {}
    int_rank: dict[str, int] = {}
    gains: dict[str, int] = {}
    for i, a in enumerate(market.agents):
        seg_rank[a] = int(rank_t[i, seg_full.assign[i]])
        int_rank[a] = int(rank_t[i, scheme.integrated.assign[i]])
        gains[a] = seg_rank[a] - int_rank[a]
    total = sum(gains.values())
    comm_gain = [0] * ehm.k
    for a, g in gains.items():
        comm_gain[ehm.community_of(a)] += g
    report = IntegrationReport(
        agents=market.agents,
        sizes=ehm.sizes,
        community_of={a: ehm.community_of(a) for a in market.agents},
        segregated_rank=seg_rank,
        integrated_rank=int_rank,
        gains=gains,
        total_gain=total,
        avg_gain=Fraction(total, n * n),
        community_gain=tuple(comm_gain),
        community_avg_gain=tuple(Fraction(g, n * nj)
                                 for g, nj in zip(comm_gain, ehm.sizes)),
        benefited=tuple(a for a in market.agents if gains[a] > 0),
        unaffected=tuple(a for a in market.agents if gains[a] == 0),
        harmed=tuple(a for a in market.agents if gains[a] < 0),
        community_cycles=tuple(t.num_cycles for t in scheme.segregated_traces),
    )
    assert -1 < report.avg_gain < 1
    assert len(report.benefited) + len(report.unaffected) + len(report.harmed) == n
    return report


@dataclass(frozen=True)
class CycleBoundCheck:
    """Per-community slack of harmed <= size - cycles."""

    ok: bool
    margins: tuple[int, ...]


def check_cycle_bound(report: IntegrationReport) -> CycleBoundCheck:
    harmed = report.harmed_by_community()
    margins = tuple(nj - t - h for nj, t, h in
                    zip(report.sizes, report.community_cycles, harmed))
    return CycleBoundCheck(ok=all(m >= 0 for m in margins), margins=margins)


def integrate(ehm: ExtendedHousingMarket) -> IntegrationReport:
    """Convenience: solve the scheme and analyze it in one step."""
    return analyze(ehm, solve_scheme(ehm))
