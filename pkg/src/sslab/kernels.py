"""Hot numeric kernels: trading-cycle solver, seeded sampling, batch scans.

Every kernel is written in nopython-compatible style and dispatched through
:func:`sslab._backend.jit`; with SSLAB_NO_NUMBA=1 the same code runs as plain
Python over numpy arrays and produces bit-identical results.

Conventions shared by all kernels:
  * agents are dense indices 0..n-1; house j is the house endowed to agent j
  * ``pref[i, p]`` is the owner of agent i's p-th most preferred house
  * ``rank[i, h]`` is the 1-based position of house h in agent i's list
  * all integer arrays are int64, RNG state is uint64
"""
from __future__ import annotations

import numpy as np

from ._backend import jit

# splitmix64 constants; the generator doubles as the seed-derivation mix.
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_ONE = np.uint64(1)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@jit
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@jit
def _stream(seed, idx):
    # Counter-based substream root: stream(s, i) = mix64(s XOR mix64(i*GAMMA + 1)).
    return _mix64(seed ^ _mix64(np.uint64(idx) * _GAMMA + _ONE))


@jit
def _next(state):
    state = state + _GAMMA
    return state, _mix64(state)


@jit
def _bounded(v, bound):
    # Modulo bias is ~bound/2**64, far below anything observable here.
    return np.int64(v % np.uint64(bound))


@jit
def _fill_perm(row, n, state):
    for i in range(n):
        row[i] = i
    for i in range(n - 1, 0, -1):
        state, v = _next(state)
        j = _bounded(v, i + 1)
        tmp = row[i]
        row[i] = row[j]
        row[j] = tmp
    return state


@jit
def _sample_profile(pref, trial_seed):
    # One uniform permutation per agent, each from its own substream.
    n = pref.shape[0]
    for i in range(n):
        _fill_perm(pref[i], n, _stream(trial_seed, i))


@jit
def _rank_matrix(pref, rank):
    n = pref.shape[0]
    for i in range(n):
        for p in range(n):
            rank[i, pref[i, p]] = p + 1


@jit
def _ttc_subset(pref, state, ptr, target, seen, assign, cyc_order, cyc_starts, cyc_iters):
    """Top trading cycles among the agents with state[i] == 1.

    Every round, each live agent points at the owner of its best remaining
    house; ALL cycles of that pointer graph trade and leave before anyone
    re-points. state is consumed (live agents end at 2). Writes, for members
    only: assign[i] = agent whose house i receives; cyc_order = members in
    removal order grouped by cycle; cyc_starts[c] = offset of cycle c
    (cyc_starts[n_cycles] = member count); cyc_iters[c] = 0-based round of
    cycle c. Returns (n_cycles, n_rounds).
    """
    n = pref.shape[0]
    remaining = 0
    for i in range(n):
        ptr[i] = 0
        seen[i] = -1
        if state[i] == 1:
            remaining += 1
    ncyc = 0
    pos = 0
    rounds = 0
    walk = 0
    while remaining > 0:
        for i in range(n):
            if state[i] == 1:
                p = ptr[i]
                while state[pref[i, p]] != 1:
                    p += 1
                ptr[i] = p
                target[i] = pref[i, p]
        first_walk = walk
        for s in range(n):
            if state[s] != 1 or seen[s] >= first_walk:
                continue
            w = walk
            walk += 1
            j = s
            while True:
                if state[j] != 1:
                    break  # walked into a cycle already removed this round
                sj = seen[j]
                if sj == w:
                    # new cycle, entered at j; pop it following the pointers
                    cyc_starts[ncyc] = pos
                    cyc_iters[ncyc] = rounds
                    ncyc += 1
                    jj = j
                    while True:
                        nxt = target[jj]
                        assign[jj] = nxt
                        state[jj] = 2
                        cyc_order[pos] = jj
                        pos += 1
                        remaining -= 1
                        jj = nxt
                        if jj == j:
                            break
                    break
                if sj >= first_walk:
                    break  # tail that merges into an earlier walk of this round
                seen[j] = w
                j = target[j]
        rounds += 1
    cyc_starts[ncyc] = pos
    return ncyc, rounds


@jit
def _solve_scheme(pref, comm, k, state, ptr, target, seen,
                  cyc_order, cyc_starts, cyc_iters, seg_assign, int_assign, tj):
    """Integrated solve plus one segregated solve per community.

    tj[j] receives the cycle count of community j's segregated run; the
    integrated cycle count is returned.
    """
    n = pref.shape[0]
    for i in range(n):
        state[i] = 1
    int_cycles, _ = _ttc_subset(pref, state, ptr, target, seen, int_assign,
                                cyc_order, cyc_starts, cyc_iters)
    for j in range(k):
        for i in range(n):
            state[i] = 1 if comm[i] == j else 0
        ncyc, _ = _ttc_subset(pref, state, ptr, target, seen, seg_assign,
                              cyc_order, cyc_starts, cyc_iters)
        tj[j] = ncyc
    return int_cycles


@jit
def _simulate_chunk(comm, k, t0, t1, master,
                    gain_sum, npos, nneg, nzero, tj_out,
                    int_cycles_out, seg_rank_sum, int_rank_sum):
    """Trials [t0, t1): sample, solve both ways, record per-community stats.

    Output rows are indexed by absolute trial number, so any partition of the
    trial range across threads reproduces the single-thread result exactly.
    """
    n = comm.shape[0]
    pref = np.empty((n, n), np.int64)
    rank = np.empty((n, n), np.int64)
    state = np.empty(n, np.int64)
    ptr = np.empty(n, np.int64)
    target = np.empty(n, np.int64)
    seen = np.empty(n, np.int64)
    cyc_order = np.empty(n, np.int64)
    cyc_starts = np.empty(n + 1, np.int64)
    cyc_iters = np.empty(n, np.int64)
    seg_assign = np.empty(n, np.int64)
    int_assign = np.empty(n, np.int64)
    tj = np.empty(k, np.int64)
    for t in range(t0, t1):
        _sample_profile(pref, _stream(master, t))
        _rank_matrix(pref, rank)
        ic = _solve_scheme(pref, comm, k, state, ptr, target, seen,
                           cyc_order, cyc_starts, cyc_iters,
                           seg_assign, int_assign, tj)
        int_cycles_out[t] = ic
        for j in range(k):
            gain_sum[t, j] = 0
            npos[t, j] = 0
            nneg[t, j] = 0
            nzero[t, j] = 0
            tj_out[t, j] = tj[j]
        srs = 0
        irs = 0
        for i in range(n):
            sr = rank[i, seg_assign[i]]
            ir = rank[i, int_assign[i]]
            g = sr - ir
            c = comm[i]
            gain_sum[t, c] += g
            if g > 0:
                npos[t, c] += 1
            elif g < 0:
                nneg[t, c] += 1
            else:
                nzero[t, c] += 1
            srs += sr
            irs += ir
        seg_rank_sum[t] = srs
        int_rank_sum[t] = irs


@jit
def _is_weakly_blocked(pref, rank, alloc, reach):
    """True iff some coalition can weakly improve on ``alloc``.

    A weak block is a cycle in the digraph with edges i -> j iff
    rank[i, j] <= rank[i, alloc[i]] that uses at least one strict edge
    (rank[i, j] < rank[i, alloc[i]]). Detected via transitive closure.
    """
    n = pref.shape[0]
    for i in range(n):
        for j in range(n):
            reach[i, j] = False
        lim = rank[i, alloc[i]]
        for e in range(lim):
            reach[i, pref[i, e]] = True
    for m in range(n):
        for i in range(n):
            if reach[i, m]:
                for j in range(n):
                    if reach[m, j]:
                        reach[i, j] = True
    for i in range(n):
        lim = rank[i, alloc[i]] - 1
        for e in range(lim):
            j = pref[i, e]
            if reach[j, i]:
                return True
    return False


@jit
def _core_scan(prefs, perms, out_core_count, out_match):
    """Uniqueness oracle: filter every allocation by weak blocking.

    For each market b, counts the allocations (rows of ``perms``) that no
    coalition can weakly improve on, and flags whether every survivor equals
    the trading-cycle solution. Independent of the solver: membership is
    decided by closure over the improvement digraph alone.
    """
    B = prefs.shape[0]
    n = prefs.shape[1]
    P = perms.shape[0]
    rank = np.empty((n, n), np.int64)
    state = np.empty(n, np.int64)
    ptr = np.empty(n, np.int64)
    target = np.empty(n, np.int64)
    seen = np.empty(n, np.int64)
    cyc_order = np.empty(n, np.int64)
    cyc_starts = np.empty(n + 1, np.int64)
    cyc_iters = np.empty(n, np.int64)
    ttc_assign = np.empty(n, np.int64)
    reach = np.empty((n, n), np.bool_)
    for b in range(B):
        pref = prefs[b]
        _rank_matrix(pref, rank)
        for i in range(n):
            state[i] = 1
        _ttc_subset(pref, state, ptr, target, seen, ttc_assign,
                    cyc_order, cyc_starts, cyc_iters)
        count = 0
        match = 1
        for a in range(P):
            if not _is_weakly_blocked(pref, rank, perms[a], reach):
                count += 1
                for i in range(n):
                    if perms[a, i] != ttc_assign[i]:
                        match = 0
        out_core_count[b] = count
        out_match[b] = match


@jit
def _exhaustive_scan(n, perms, parts, kvec):
    """All profiles x all partitions: rank-distribution lemmas + both bounds.

    perms: the n! preference rows; parts[q] maps agent -> community id for
    partition q, which has kvec[q] communities. Hard checks, per instance:
      1/2/3  integrated solve: no agent worse than own house; m(r) and the
             tail count M(r) never exceed n-r+1   (full-list ranks)
      4/5/6  the same three on every segregated solve (restricted ranks)
      7      per community, harmed <= size - cycle count
      8      harmed total <= n - k
      9      2*total_gain >= -n^2 + n + k^2 - k   (the floor the lemmas imply)
    The sharper advertised floor with k^2 + k is tallied separately because
    instances with few strict winners sit below it; see the bound notes.
    Returns (code, profile_idx, partition_idx, instances, stated_floor_misses,
    miss_profile_idx, miss_partition_idx) with code 0 when every hard check
    holds; otherwise the first violation's location.
    """
    P = perms.shape[0]
    Q = parts.shape[0]
    pref = np.empty((n, n), np.int64)
    rank = np.empty((n, n), np.int64)
    state = np.empty(n, np.int64)
    ptr = np.empty(n, np.int64)
    target = np.empty(n, np.int64)
    seen = np.empty(n, np.int64)
    cyc_order = np.empty(n, np.int64)
    cyc_starts = np.empty(n + 1, np.int64)
    cyc_iters = np.empty(n, np.int64)
    int_assign = np.empty(n, np.int64)
    seg_assign = np.empty(n, np.int64)
    hist = np.empty(n + 2, np.int64)
    total = 1
    for i in range(n):
        total *= P
    checked = 0
    misses = 0
    miss_p = -1
    miss_q = -1
    for idx in range(total):
        rem = idx
        for i in range(n):
            pi = rem % P
            rem //= P
            for p in range(n):
                pref[i, p] = perms[pi, p]
        _rank_matrix(pref, rank)
        for i in range(n):
            state[i] = 1
        _ttc_subset(pref, state, ptr, target, seen, int_assign,
                    cyc_order, cyc_starts, cyc_iters)
        for r in range(1, n + 1):
            hist[r] = 0
        for i in range(n):
            if rank[i, int_assign[i]] > rank[i, i]:
                return 1, idx, -1, checked, misses, miss_p, miss_q
            hist[rank[i, int_assign[i]]] += 1
        tail = 0
        for r in range(n, 0, -1):
            tail += hist[r]
            if hist[r] > n - r + 1:
                return 2, idx, -1, checked, misses, miss_p, miss_q
            if tail > n - r + 1:
                return 3, idx, -1, checked, misses, miss_p, miss_q
        for q in range(Q):
            k = kvec[q]
            comm = parts[q]
            neg_total = 0
            gain2 = 0
            for j in range(k):
                nj = 0
                for i in range(n):
                    if comm[i] == j:
                        state[i] = 1
                        nj += 1
                    else:
                        state[i] = 0
                ncyc, _ = _ttc_subset(pref, state, ptr, target, seen, seg_assign,
                                      cyc_order, cyc_starts, cyc_iters)
                for r in range(1, nj + 1):
                    hist[r] = 0
                neg_j = 0
                for i in range(n):
                    if comm[i] != j:
                        continue
                    # restricted rank of the assigned/own house within C_j
                    ra = rank[i, seg_assign[i]]
                    rr = 0
                    rown = 0
                    for h in range(n):
                        if comm[h] == j:
                            if rank[i, h] <= ra:
                                rr += 1
                            if rank[i, h] <= rank[i, i]:
                                rown += 1
                    if rr > rown:
                        return 4, idx, q, checked, misses, miss_p, miss_q
                    hist[rr] += 1
                    g = ra - rank[i, int_assign[i]]
                    gain2 += 2 * g
                    if g < 0:
                        neg_j += 1
                tail = 0
                for r in range(nj, 0, -1):
                    tail += hist[r]
                    if hist[r] > nj - r + 1:
                        return 5, idx, q, checked, misses, miss_p, miss_q
                    if tail > nj - r + 1:
                        return 6, idx, q, checked, misses, miss_p, miss_q
                if neg_j > nj - ncyc:
                    return 7, idx, q, checked, misses, miss_p, miss_q
                neg_total += neg_j
            if neg_total > n - k:
                return 8, idx, q, checked, misses, miss_p, miss_q
            if gain2 < -n * n + n + k * k - k:
                return 9, idx, q, checked, misses, miss_p, miss_q
            if gain2 < -n * n + n + k * k + k:
                misses += 1
                if miss_p < 0:
                    miss_p = idx
                    miss_q = q
            checked += 1
    return 0, -1, -1, checked, misses, miss_p, miss_q


@jit
def _sdd_fill_profile(pref, comm, k, seed, members, pi, used, rrow, others):
    """Sample a full profile whose restricted rows follow a staircase pattern.

    Per community: draw one ordering pi of its members, then force every
    member's restricted rank-r house into the first min(r+1, size) entries of
    pi (two feasible choices at each step, one at the last). Houses of other
    communities are shuffled and riffled in uniformly, preserving both
    relative orders.
    """
    n = pref.shape[0]
    for j in range(k):
        nj = 0
        for i in range(n):
            if comm[i] == j:
                members[nj] = i
                nj += 1
        st = _stream(seed, n + j)
        for m in range(nj):
            pi[m] = members[m]
        for m in range(nj - 1, 0, -1):
            st, v = _next(st)
            x = _bounded(v, m + 1)
            tmp = pi[m]
            pi[m] = pi[x]
            pi[x] = tmp
        for m in range(nj):
            agent = members[m]
            st_a = _stream(seed, agent)
            for h in range(nj):
                used[h] = 0
            for r in range(1, nj + 1):
                lim = r + 1
                if lim > nj:
                    lim = nj
                nfeas = 0
                for h in range(lim):
                    if used[h] == 0:
                        nfeas += 1
                st_a, v = _next(st_a)
                pick = _bounded(v, nfeas)
                for h in range(lim):
                    if used[h] == 0:
                        if pick == 0:
                            rrow[r - 1] = pi[h]
                            used[h] = 1
                            break
                        pick -= 1
            nother = 0
            for i in range(n):
                if comm[i] != j:
                    others[nother] = i
                    nother += 1
            for m2 in range(nother - 1, 0, -1):
                st_a, v = _next(st_a)
                x = _bounded(v, m2 + 1)
                tmp = others[m2]
                others[m2] = others[x]
                others[x] = tmp
            a = 0
            b = 0
            for p in range(n):
                take_own = 0
                if a < nj and b < nother:
                    st_a, v = _next(st_a)
                    if _bounded(v, nj + nother - a - b) < nj - a:
                        take_own = 1
                elif a < nj:
                    take_own = 1
                if take_own == 1:
                    pref[agent, p] = rrow[a]
                    a += 1
                else:
                    pref[agent, p] = others[b]
                    b += 1


@jit
def _sdd_check(pref, comm, k, qflag):
    """1 iff every community's restricted profile keeps |Q(r)| <= r+1.

    Q(r) accumulates the members some community member placed at restricted
    rank <= r; only ranks up to size-2 can bind.
    """
    n = pref.shape[0]
    for j in range(k):
        nj = 0
        for i in range(n):
            if comm[i] == j:
                nj += 1
        for i in range(n):
            qflag[i] = 0
        qsize = 0
        r = 0
        for p in range(nj):
            r += 1
            for i in range(n):
                if comm[i] != j:
                    continue
                # house at restricted rank r in i's list
                cnt = 0
                for e in range(n):
                    h = pref[i, e]
                    if comm[h] == j:
                        cnt += 1
                        if cnt == r:
                            if qflag[h] == 0:
                                qflag[h] = 1
                                qsize += 1
                            break
            if qsize > r + 1:
                return 0
    return 1


@jit
def _sdd_verify_chunk(comm, k, sizes, master, t0, t1):
    """Falsification run for the staircase domain.

    Returns counts over trials [t0, t1) of: generated profiles failing the
    staircase predicate, communities with 2*harmed > size, segregated cycles
    longer than 2, and communities with harmed > size - cycles.
    """
    n = comm.shape[0]
    pref = np.empty((n, n), np.int64)
    rank = np.empty((n, n), np.int64)
    state = np.empty(n, np.int64)
    ptr = np.empty(n, np.int64)
    target = np.empty(n, np.int64)
    seen = np.empty(n, np.int64)
    cyc_order = np.empty(n, np.int64)
    cyc_starts = np.empty(n + 1, np.int64)
    cyc_iters = np.empty(n, np.int64)
    int_assign = np.empty(n, np.int64)
    seg_assign = np.empty(n, np.int64)
    members = np.empty(n, np.int64)
    pi = np.empty(n, np.int64)
    used = np.empty(n, np.int64)
    rrow = np.empty(n, np.int64)
    others = np.empty(n, np.int64)
    tj = np.empty(k, np.int64)
    bad_diag = 0
    bad_bound = 0
    bad_cycle_len = 0
    bad_tj = 0
    for t in range(t0, t1):
        _sdd_fill_profile(pref, comm, k, _stream(master, t), members, pi, used, rrow, others)
        _rank_matrix(pref, rank)
        if _sdd_check(pref, comm, k, used) == 0:
            bad_diag += 1
        for i in range(n):
            state[i] = 1
        _ttc_subset(pref, state, ptr, target, seen, int_assign,
                    cyc_order, cyc_starts, cyc_iters)
        for j in range(k):
            for i in range(n):
                state[i] = 1 if comm[i] == j else 0
            ncyc, _ = _ttc_subset(pref, state, ptr, target, seen, seg_assign,
                                  cyc_order, cyc_starts, cyc_iters)
            tj[j] = ncyc
            for c in range(ncyc):
                if cyc_starts[c + 1] - cyc_starts[c] > 2:
                    bad_cycle_len += 1
        for j in range(k):
            neg = 0
            for i in range(n):
                if comm[i] == j and rank[i, seg_assign[i]] < rank[i, int_assign[i]]:
                    neg += 1
            if 2 * neg > sizes[j]:
                bad_bound += 1
            if neg > sizes[j] - tj[j]:
                bad_tj += 1
    return bad_diag, bad_bound, bad_cycle_len, bad_tj


# ---------------------------------------------------------------------------
# Thin wrappers: allocate work buffers and hand plain arrays back to callers.
# np.errstate silences the uint64 wrap warnings numpy emits on the pure path.


def ttc_arrays(pref: np.ndarray, member: np.ndarray | None = None):
    """Solve one market (optionally a subset); return assignment and cycles.

    Returns (assign, cycles) where cycles is a list of rounds, each round a
    list of cycles, each cycle a list of agent indices in pointer order
    starting from its smallest member. Non-members keep assign[i] == -1.
    """
    n = pref.shape[0]
    state = np.ones(n, np.int64) if member is None else member.astype(np.int64)
    ptr = np.empty(n, np.int64)
    target = np.empty(n, np.int64)
    seen = np.empty(n, np.int64)
    assign = np.full(n, -1, np.int64)
    cyc_order = np.empty(n, np.int64)
    cyc_starts = np.empty(n + 1, np.int64)
    cyc_iters = np.empty(n, np.int64)
    ncyc, rounds = _ttc_subset(pref, state, ptr, target, seen, assign,
                               cyc_order, cyc_starts, cyc_iters)
    cycles: list[list[list[int]]] = [[] for _ in range(rounds)]
    for c in range(ncyc):
        nodes = [int(x) for x in cyc_order[cyc_starts[c]:cyc_starts[c + 1]]]
        lo = nodes.index(min(nodes))
        cycles[cyc_iters[c]].append(nodes[lo:] + nodes[:lo])
    for round_cycles in cycles:
        round_cycles.sort(key=lambda cyc: cyc[0])
    return assign, cycles


def rank_matrix(pref: np.ndarray) -> np.ndarray:
    rank = np.empty_like(pref)
    _rank_matrix(pref, rank)
    return rank


def sample_profile(n: int, seed: int) -> np.ndarray:
    pref = np.empty((n, n), np.int64)
    with np.errstate(over="ignore"):
        _sample_profile(pref, np.uint64(seed))
    return pref


def trial_seed(master: int, index: int) -> int:
    """Substream root for one trial; trials then derive per-agent streams."""
    with np.errstate(over="ignore"):
        return int(_stream(np.uint64(master), index))


SEED_RULE = ("stream(s,i) = mix64(s XOR mix64(i*0x9E3779B97F4A7C15 + 1)); "
             "splitmix64 sequence per stream; trial t samples from "
             "stream(master, t), agent a within it from stream(trial, a)")

