"""Random markets: seeded sampling, Monte-Carlo runs, and closed forms.

Preferences are drawn independently and uniformly per agent; the community
partition itself is fixed. All randomness flows through counter-based
splitmix64 substreams (see kernels.SEED_RULE), so a summary is a pure
function of (sizes, trials, master seed) no matter how many threads run.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .integration import ExtendedHousingMarket
from .market import (Allocation, HousingMarket, InstanceTooLargeError,
                     market_from_pref_array)

EXACT_HARMONIC_LIMIT = 10_000


def _harmonic_fraction(lo: int, hi: int) -> Fraction:
    # pairwise split keeps the bignum denominators balanced
    if hi - lo < 16:
        total = Fraction(0)
        for i in range(lo, hi + 1):
            total += Fraction(1, i)
        return total
    mid = (lo + hi) // 2
    return _harmonic_fraction(lo, mid) + _harmonic_fraction(mid + 1, hi)


_HARMONIC_CACHE: dict[int, Fraction] = {}


@dataclass(frozen=True)
class HarmonicNumber:
    n: int
    exact: Optional[Fraction]
    value: float


def harmonic(n: int) -> HarmonicNumber:
    """H_n = sum 1/i, exact up to n = 10^4 and as a float always."""
    if n < 1:
        raise ValueError(f"harmonic number needs n >= 1, got {n}")
    if n <= EXACT_HARMONIC_LIMIT:
        exact = _HARMONIC_CACHE.get(n)
        if exact is None:
            exact = _harmonic_fraction(1, n)
            _HARMONIC_CACHE[n] = exact
        return HarmonicNumber(n, exact, float(exact))
    if n <= 10_000_000:
        return HarmonicNumber(n, None, float(np.sum(1.0 / np.arange(1, n + 1))))
    # Euler-Maclaurin tail; error is O(n^-4), invisible in a float here
    value = math.log(n) + 0.5772156649015328606 + 1 / (2 * n) - 1 / (12 * n * n)
    return HarmonicNumber(n, None, value)


def expected_rank_sum(n: int) -> float:
    """Expected total rank of received houses in a uniform market: (n+1)H_n - n."""
    if n < 1:
        raise ValueError("n must be positive")
    h = harmonic(n)
    if h.exact is not None:
        return float((n + 1) * h.exact - n)
    return (n + 1) * h.value - n


def expected_cycles(n: int) -> float:
    """Leading term sqrt(2 pi n) of the expected cycle count.

    The true expectation carries an additional O(log n) remainder with no
    published constant; callers must treat this value as the head of the
    expansion, not the expectation itself.
    """
    if n < 1:
        raise ValueError("n must be positive")
    return math.sqrt(2.0 * math.pi * n)


@dataclass(frozen=True)
class ExpectedGain:
    percentile: float
    rank_units: float


def expected_gain(n: int, n_j: int) -> ExpectedGain:
    """Expected average gain for a size-n_j community inside a size-n merge.

    percentile = (n+1)[(n_j+1)H_{n_j} - n_j] / (n_j (n_j+1) n) - ((n+1)H_n - n) / n^2,
    rank_units = n * percentile. Evaluated in exact rationals whenever the
    harmonic numbers are available exactly (so n_j == n gives 0.0 exactly).
    """
    if not 1 <= n_j <= n:
        raise ValueError(f"need 1 <= n_j <= n, got n_j={n_j}, n={n}")
    hn = harmonic(n)
    hj = harmonic(n_j)
    if hn.exact is not None and hj.exact is not None:
        seg_term = (n + 1) * ((n_j + 1) * hj.exact - n_j) / Fraction(n_j * (n_j + 1) * n)
        int_term = ((n + 1) * hn.exact - n) / Fraction(n * n)
        pct = seg_term - int_term
        return ExpectedGain(float(pct), float(pct * n))
    pct_f = ((n + 1) * ((n_j + 1) * hj.value - n_j) / (n_j * (n_j + 1) * n)
             - ((n + 1) * hn.value - n) / (n * n))
    return ExpectedGain(pct_f, pct_f * n)


def harmed_bound(n_j: int) -> float:
    """Computable head n_j - sqrt(2 pi n_j) of the expected-harm ceiling.

    The dropped O(log n_j) credit only tightens the bound further.
    """
    if n_j < 1:
        raise ValueError("community size must be positive")
    return n_j - math.sqrt(2.0 * math.pi * n_j)


def harmed_bound_total(sizes: Sequence[int]) -> float:
    return sum(harmed_bound(s) for s in sizes)


def half_harm_threshold() -> float:
    """Equal community size below which expected harm stays under one half: 8 pi."""
    return 8.0 * math.pi


def _agent_names(n: int) -> tuple[str, ...]:
    width = len(str(n))
    return tuple(f"a{i + 1:0{width}d}" for i in range(n))


def _community_blocks(names: tuple[str, ...], sizes: Sequence[int]) -> tuple[tuple[str, ...], ...]:
    out = []
    at = 0
    for s in sizes:
        out.append(names[at:at + s])
        at += s
    return tuple(out)


def sample_ehm(sizes: Sequence[int], seed: int) -> ExtendedHousingMarket:
    """One uniform draw: every agent's row is an independent random permutation.

    Deterministic in the seed; sampling trial t of a simulation is
    sample_ehm(sizes, kernels.trial_seed(master, t)).
    """
    sizes = tuple(int(s) for s in sizes)
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("community sizes must be positive")
    n = sum(sizes)
    pref = kernels.sample_profile(n, seed)
    market = market_from_pref_array(pref)
    return ExtendedHousingMarket(market, _community_blocks(market.agents, sizes))


@dataclass(frozen=True)
class SimulationConfig:
    sizes: tuple[int, ...]
    trials: int
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise ValueError("community sizes must be positive")
        if self.trials < 1:
            raise ValueError("at least one trial is required")
        if self.trials * sum(self.sizes) > 500_000_000:
            raise InstanceTooLargeError("simulation exceeds the resource cap")


@dataclass(frozen=True)
class StatTriple:
    """Across-trial mean with per-trial sd and standard error (None if T=1)."""

    mean: float
    sd: Optional[float]
    se: Optional[float]


def _triple(values: np.ndarray) -> StatTriple:
    mean = float(values.mean())
    if values.size < 2:
        return StatTriple(mean, None, None)
    sd = float(values.std(ddof=1))
    return StatTriple(mean, sd, sd / math.sqrt(values.size))


@dataclass(frozen=True)
class CommunityStats:
    size: int
    gain_ranks: StatTriple
    gain_pct: StatTriple
    benefited: StatTriple
    harmed: StatTriple
    unaffected: StatTriple
    cycles: StatTriple


@dataclass(frozen=True)
class SimulationSummary:
    sizes: tuple[int, ...]
    trials: int
    seed: int
    seed_rule: str
    communities: tuple[CommunityStats, ...]
    frac_benefited: StatTriple
    frac_harmed: StatTriple
    segregated_rank_sum: StatTriple
    integrated_rank_sum: StatTriple
    integrated_cycles: StatTriple

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def mean_segregated_rank_sum(self) -> float:
        return self.segregated_rank_sum.mean

    @property
    def mean_integrated_rank_sum(self) -> float:
        return self.integrated_rank_sum.mean


def run_simulation(config: SimulationConfig) -> SimulationSummary:
    """trials independent draws, each solved both ways and aggregated.

    Trials write into rows indexed by trial number, so the summary is
    identical for any thread count.
    """
    sizes = config.sizes
    k = len(sizes)
    n = sum(sizes)
    comm = np.repeat(np.arange(k, dtype=np.int64), sizes)
    T = config.trials
    gain_sum = np.empty((T, k), np.int64)
    npos = np.empty((T, k), np.int64)
    nneg = np.empty((T, k), np.int64)
    nzero = np.empty((T, k), np.int64)
    tj = np.empty((T, k), np.int64)
    int_cycles = np.empty(T, np.int64)
    seg_rank_sum = np.empty(T, np.int64)
    int_rank_sum = np.empty(T, np.int64)
    master = np.uint64(config.seed)

    def run_range(t0: int, t1: int) -> None:
        with np.errstate(over="ignore"):
            kernels._simulate_chunk(comm, k, t0, t1, master,
                                    gain_sum, npos, nneg, nzero, tj,
                                    int_cycles, seg_rank_sum, int_rank_sum)

    threads = max(1, config.threads)
    if threads == 1 or T < 2 * threads:
        run_range(0, T)
    else:
        bounds = np.linspace(0, T, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(run_range, int(a), int(b))
                       for a, b in zip(bounds[:-1], bounds[1:])]
            for f in futures:
                f.result()

    stats = []
    for j, nj in enumerate(sizes):
        stats.append(CommunityStats(
            size=nj,
            gain_ranks=_triple(gain_sum[:, j] / nj),
            gain_pct=_triple(gain_sum[:, j] / (n * nj)),
            benefited=_triple(npos[:, j].astype(float)),
            harmed=_triple(nneg[:, j].astype(float)),
            unaffected=_triple(nzero[:, j].astype(float)),
            cycles=_triple(tj[:, j].astype(float)),
        ))
    return SimulationSummary(
        sizes=sizes,
        trials=T,
        seed=config.seed,
        seed_rule=kernels.SEED_RULE,
        communities=tuple(stats),
        frac_benefited=_triple(npos.sum(axis=1) / n),
        frac_harmed=_triple(nneg.sum(axis=1) / n),
        segregated_rank_sum=_triple(seg_rank_sum.astype(float)),
        integrated_rank_sum=_triple(int_rank_sum.astype(float)),
        integrated_cycles=_triple(int_cycles.astype(float)),
    )


def rsd_allocation(market: HousingMarket, order: Sequence[str]) -> Allocation:
    """Serial dictatorship: in the given order, take the best remaining house."""
    if sorted(order) != sorted(market.agents):
        raise ValueError("order must be a permutation of the market's agents")
    taken = np.zeros(market.n, bool)
    assign = [-1] * market.n
    for name in order:
        i = market.index(name)
        for h in market.pref[i]:
            if not taken[h]:
                taken[h] = True
                assign[i] = int(h)
                break
    return Allocation(market.agents, tuple(assign))


def _core_under_endowment(market: HousingMarket, endowment: tuple[int, ...]) -> tuple[int, ...]:
    """Core allocation when agent i owns house endowment[i]; returns houses."""
    n = market.n
    owner_of = [0] * n
    for agent, house in enumerate(endowment):
        owner_of[house] = agent
    pref_owners = np.empty((n, n), np.int64)
    for i in range(n):
        for p in range(n):
            pref_owners[i, p] = owner_of[market.pref[i, p]]
    assign, _ = kernels.ttc_arrays(pref_owners)
    return tuple(endowment[int(a)] for a in assign)


def rsd_equivalence_check(market: HousingMarket, max_n: Optional[int] = None) -> bool:
    """Exact distributional equality of two lotteries over allocations.

    Lottery A endows the houses uniformly at random and takes the core;
    lottery B runs serial dictatorship under a uniformly random order. Both
    are enumerated completely (n! each) and compared as exact counts.
    """
    n = market.n
    cap = max_n if max_n is not None else 5
    if n > cap:
        raise InstanceTooLargeError(
            f"rsd_equivalence_check enumerates (n!)^2; n={n} exceeds cap {cap}")
    core_counts: dict[tuple[int, ...], int] = {}
    for endowment in permutations(range(n)):
        houses = _core_under_endowment(market, endowment)
        core_counts[houses] = core_counts.get(houses, 0) + 1
    rsd_counts: dict[tuple[int, ...], int] = {}
    for order in permutations(market.agents):
        alloc = rsd_allocation(market, order)
        houses = tuple(alloc.assign)
        rsd_counts[houses] = rsd_counts.get(houses, 0) + 1
    return core_counts == rsd_counts
