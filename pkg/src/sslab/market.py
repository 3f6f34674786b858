"""Housing markets, the trading-cycle solver, and small-instance oracles.

Agents are identified with their endowed houses: "house h" always means the
house initially owned by agent h, so an allocation is just a permutation of
the agent set. External code talks in agent names (strings); internally
everything is dense int64 indices in the order the agents were declared.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import kernels

DEFAULT_BRUTE_CAP = 7
BLOCKING_BRUTE_CAP = 8


class MarketValidationError(ValueError):
    """Raised when raw profile data does not describe a valid market."""


class InstanceTooLargeError(ValueError):
    """Raised when a brute-force oracle is asked to enumerate too much."""


def brute_cap(default: int = DEFAULT_BRUTE_CAP) -> int:
    """Enumeration cap, overridable through SSLAB_MAX_BRUTE_N."""
    raw = os.environ.get("SSLAB_MAX_BRUTE_N", "").strip()
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise MarketValidationError(f"SSLAB_MAX_BRUTE_N is not an integer: {raw!r}")
    return default


def _check_cap(op: str, n: int, max_n: Optional[int], default: int) -> None:
    cap = max_n if max_n is not None else brute_cap(default)
    if n > cap:
        raise InstanceTooLargeError(
            f"{op} enumerates up to n={cap} (got n={n}); "
            f"raise the cap via max_n or SSLAB_MAX_BRUTE_N if you mean it")


@dataclass(frozen=True, eq=False)
class HousingMarket:
    """Agents plus one strict complete preference row per agent.

    ``pref[i, p]`` is the internal index of the owner of i's p-th choice.
    Instances compare by identity; compare .agents/.pref explicitly if needed.
    """

    agents: tuple[str, ...]
    pref: np.ndarray
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.agents)})
        self.pref.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.agents)

    def index(self, agent: str) -> int:
        try:
            return self._index[agent]
        except KeyError:
            raise KeyError(f"unknown agent {agent!r}") from None

    @property
    def preferences(self) -> dict[str, tuple[str, ...]]:
        return {a: tuple(self.agents[h] for h in self.pref[i])
                for i, a in enumerate(self.agents)}

    def rank_table(self) -> np.ndarray:
        """rank[i, h] = 1-based position of house h in agent i's row."""
        cached = getattr(self, "_rank_cache", None)
        if cached is None:
            cached = kernels.rank_matrix(self.pref)
            cached.setflags(write=False)
            object.__setattr__(self, "_rank_cache", cached)
        return cached


@dataclass(frozen=True)
class Allocation:
    """A permutation of the endowment; assign[i] owns the house i receives."""

    agents: tuple[str, ...]
    assign: tuple[int, ...]

    def __post_init__(self):
        n = len(self.agents)
        if sorted(self.assign) != list(range(n)):
            raise MarketValidationError("allocation is not a permutation of the endowment")

    def receives(self, agent: str) -> str:
        return self.agents[self.assign[self.agents.index(agent)]]

    def as_dict(self) -> dict[str, str]:
        return {a: self.agents[h] for a, h in zip(self.agents, self.assign)}

    def as_array(self) -> np.ndarray:
        return np.asarray(self.assign, np.int64)


@dataclass(frozen=True)
class TTCTrace:
    """Cycles the solver removed, grouped by round.

    Each cycle lists its members in pointer order starting from the smallest:
    the agent at position l receives the house of the agent at position l+1
    (wrapping around).
    """

    iterations: tuple[tuple[tuple[str, ...], ...], ...]

    @property
    def num_iterations(self) -> int:
        return len(self.iterations)

    @property
    def num_cycles(self) -> int:
        return sum(len(it) for it in self.iterations)

    def cycle_lengths(self) -> tuple[int, ...]:
        return tuple(len(c) for it in self.iterations for c in it)

    def assignment_pairs(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for it in self.iterations:
            for cyc in it:
                for pos, agent in enumerate(cyc):
                    out[agent] = cyc[(pos + 1) % len(cyc)]
        return out


def validate_market(agents: Sequence[str], preferences: Mapping[str, Sequence[str]]) -> HousingMarket:
    """Build a market from external data, or explain exactly what is wrong."""
    agents = list(agents)
    if not agents:
        raise MarketValidationError("empty market: no agents declared")
    seen: set[str] = set()
    for a in agents:
        if a in seen:
            raise MarketValidationError(f"duplicate agent id {a!r}")
        seen.add(a)
    index = {a: i for i, a in enumerate(agents)}
    n = len(agents)
    for a in preferences:
        if a not in index:
            raise MarketValidationError(f"preferences given for unknown agent {a!r}")
    pref = np.empty((n, n), np.int64)
    for i, a in enumerate(agents):
        if a not in preferences:
            raise MarketValidationError(f"no preference row for agent {a!r}")
        row = list(preferences[a])
        if len(row) != n:
            raise MarketValidationError(
                f"preference row of agent {a!r} has length {len(row)}, expected {n}")
        used: set[str] = set()
        for pos, h in enumerate(row):
            if h not in index:
                raise MarketValidationError(
                    f"unknown house {h!r} at position {pos + 1} in row of agent {a!r}")
            if h in used:
                raise MarketValidationError(
                    f"duplicate house {h!r} in row of agent {a!r} (position {pos + 1})")
            used.add(h)
            pref[i, pos] = index[h]
    return HousingMarket(tuple(agents), pref)


def rank(market: HousingMarket, agent: str, house_owner: str) -> int:
    """1-based position of house_owner's house in agent's full list."""
    i = market.index(agent)
    h = market.index(house_owner)
    return int(np.where(market.pref[i] == h)[0][0]) + 1


def ttc_solve(market: HousingMarket) -> tuple[Allocation, TTCTrace]:
    """The unique core allocation, plus the cycles that produced it."""
    assign, cycles = kernels.ttc_arrays(market.pref)
    alloc = Allocation(market.agents, tuple(int(x) for x in assign))
    trace = TTCTrace(tuple(
        tuple(tuple(market.agents[i] for i in cyc) for cyc in rnd)
        for rnd in cycles))
    return alloc, trace


@dataclass(frozen=True)
class BlockingCoalition:
    members: tuple[str, ...]
    reallocation: dict[str, str]


def find_blocking_coalition(market: HousingMarket, allocation: Allocation,
                            *, weak: bool = False,
                            max_n: Optional[int] = None) -> Optional[BlockingCoalition]:
    """Search every coalition for an internal reallocation its members prefer.

    With weak=False every member must strictly gain (the blocking notion the
    core definition uses); with weak=True members may keep their house as long
    as someone strictly gains, which is the domination notion under which the
    core is a singleton. Coalitions are scanned smallest-first, then
    lexicographically, so witnesses are deterministic.
    """
    n = market.n
    _check_cap("find_blocking_coalition", n, max_n, BLOCKING_BRUTE_CAP)
    if allocation.agents != market.agents:
        raise MarketValidationError("allocation does not belong to this market")
    rank_t = market.rank_table()
    cur = [rank_t[i, allocation.assign[i]] for i in range(n)]
    for size in range(1, n + 1):
        for coalition in combinations(range(n), size):
            for perm in permutations(coalition):
                better = 0
                ok = True
                for member, owner in zip(coalition, perm):
                    r = rank_t[member, owner]
                    if r < cur[member]:
                        better += 1
                    elif weak and r == cur[member]:
                        pass
                    else:
                        ok = False
                        break
                if ok and better > 0:
                    names = tuple(market.agents[i] for i in coalition)
                    realloc = {market.agents[m]: market.agents[o]
                               for m, o in zip(coalition, perm)}
                    return BlockingCoalition(names, realloc)
    return None


def brute_force_core(market: HousingMarket, max_n: Optional[int] = None) -> set[Allocation]:
    """Enumerate all n! allocations and keep the undominated ones.

    Filters by weak domination (see find_blocking_coalition); under strict
    preferences the result is a singleton, which callers cross-check against
    ttc_solve. Independent of the solver by construction.
    """
    n = market.n
    _check_cap("brute_force_core", n, max_n, DEFAULT_BRUTE_CAP)
    core: set[Allocation] = set()
    for perm in permutations(range(n)):
        alloc = Allocation(market.agents, perm)
        if find_blocking_coalition(market, alloc, weak=True, max_n=max(n, 8)) is None:
            core.add(alloc)
    return core


def is_individually_rational(market: HousingMarket, allocation: Allocation) -> bool:
    rank_t = market.rank_table()
    return all(rank_t[i, allocation.assign[i]] <= rank_t[i, i] for i in range(market.n))


def is_pareto_optimal(market: HousingMarket, allocation: Allocation,
                      max_n: Optional[int] = None) -> bool:
    """True iff no allocation is weakly better for everyone, strictly for one."""
    n = market.n
    _check_cap("is_pareto_optimal", n, max_n, DEFAULT_BRUTE_CAP)
    rank_t = market.rank_table()
    cur = [rank_t[i, allocation.assign[i]] for i in range(n)]
    for perm in permutations(range(n)):
        strict = False
        dominates = True
        for i in range(n):
            r = rank_t[i, perm[i]]
            if r > cur[i]:
                dominates = False
                break
            if r < cur[i]:
                strict = True
        if dominates and strict:
            return False
    return True


def rank_histogram(market: HousingMarket, allocation: Allocation) -> dict[int, tuple[int, int]]:
    """Map r -> (agents whose house sits at rank r, agents at rank >= r)."""
    n = market.n
    rank_t = market.rank_table()
    m = {r: 0 for r in range(1, n + 1)}
    for i in range(n):
        m[int(rank_t[i, allocation.assign[i]])] += 1
    out: dict[int, tuple[int, int]] = {}
    tail = 0
    for r in range(n, 0, -1):
        tail += m[r]
        out[r] = (m[r], tail)
    return dict(sorted(out.items()))


def market_from_pref_array(pref: np.ndarray, names: Optional[Iterable[str]] = None) -> HousingMarket:
    """Copy an internal preference matrix into a market; names default to a1..an."""
    n = pref.shape[0]
    if names is None:
        width = len(str(n))
        names = (f"a{i + 1:0{width}d}" for i in range(n))
    return HousingMarket(tuple(names), np.array(pref, np.int64))
