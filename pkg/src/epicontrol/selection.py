"""Vaccination seed selection strategies.

Three strategies choose k nodes to vaccinate at a round: uniform random,
highest current in-degree, and a lazy-greedy maximization of expected lives
saved over a fresh set of live-edge samples (the submodular strategy). Lives
saved for intervention S is the drop in mean outbreak size caused by
deleting S's vertices from every sample.

The greedy keeps a priority queue of cached marginal gains and re-evaluates
only the top entry (CELF discipline). Two exact facts keep it cheap and
deterministic: a candidate outside the currently-reachable set of a sample
gains nothing there (vertex deletion never creates reachability), and a
zero marginal gain can never become positive again, so once the best bound
hits zero the remaining budget is filled by ascending agent id.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .disease import Compartment, SimState
from .network import ContactNetwork
from .sampling import SampleSet, _Scratch, build_sample_set, sigma_on_sample


@dataclass
class SelectionContext:
    """Inputs a strategy sees at one vaccination round."""

    network: ContactNetwork
    candidates: np.ndarray        # ascending agent ids, non-removed, non-infected
    infected: np.ndarray          # ascending; currently Exposed or Infectious
    budget: int
    sampling_effort: int = 128
    master_seed: int = 0

    def __post_init__(self):
        self.candidates = np.asarray(self.candidates, dtype=np.int64)
        self.infected = np.asarray(self.infected, dtype=np.int64)
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        if np.intersect1d(self.candidates, self.infected).size:
            raise ValueError("candidates and infected sets overlap")
        if self.candidates.size and self.network.removed[self.candidates].any():
            raise ValueError("candidates include removed agents")

    @classmethod
    def from_state(cls, network: ContactNetwork, state: SimState, budget: int,
                   sampling_effort: int = 128, master_seed: int = 0) -> "SelectionContext":
        alive = network.alive_mask()
        not_infected = (state.comp != Compartment.EXPOSED) & (state.comp != Compartment.INFECTIOUS)
        return cls(network=network,
                   candidates=np.flatnonzero(alive & not_infected),
                   infected=state.infected_ids(),
                   budget=budget, sampling_effort=sampling_effort,
                   master_seed=master_seed)


@dataclass
class SeedSet:
    nodes: list[int]                       # selection order
    objective: float | None = None         # lives-saved estimate (greedy/brute force)

    def __len__(self) -> int:
        return len(self.nodes)


def select_random(ctx: SelectionContext, rng: np.random.Generator) -> SeedSet:
    """Uniform sample without replacement; k = 0 consumes no randomness."""
    k = min(ctx.budget, len(ctx.candidates))
    if k == 0:
        return SeedSet([])
    picked = rng.permutation(ctx.candidates)[:k]
    return SeedSet([int(v) for v in picked])


def select_degree(ctx: SelectionContext) -> SeedSet:
    """Top-k candidates by current in-degree, ties by ascending id."""
    k = min(ctx.budget, len(ctx.candidates))
    if k == 0:
        return SeedSet([])
    degrees = ctx.network.in_degrees()
    order = np.lexsort((ctx.candidates, -degrees[ctx.candidates]))
    return SeedSet([int(ctx.candidates[i]) for i in order[:k]])


def lives_saved(samples: SampleSet, infected, intervention) -> float:
    """Mean over samples of outbreak-size drop caused by the intervention."""
    scratch = _Scratch(samples.n_agents)
    base = 0
    cut = 0
    for s in samples.samples:
        base += sigma_on_sample(s, infected, (), scratch)
        cut += sigma_on_sample(s, infected, intervention, scratch)
    return (base - cut) / samples.n_samples


@njit(cache=True)
def _refresh_reach(indptr_stack, indices_flat, in_reach, base, sources,
                   blocked, picked, visited, vstamp0, queue):
    """Recompute reachable-from-infected sets and their sizes.

    Only samples whose current reachable set contains `picked` can change;
    picked < 0 forces a full (initial) pass. blocked[v] == 1 marks deleted
    vertices.
    """
    vst = vstamp0
    n_samples = indptr_stack.shape[0]
    n = in_reach.shape[1]
    for i in range(n_samples):
        if picked >= 0 and in_reach[i, picked] == 0:
            continue
        vst += 1
        count = 0
        head = 0
        tail = 0
        for s in range(sources.shape[0]):
            b = sources[s]
            if blocked[b] == 0 and visited[b] != vst:
                visited[b] = vst
                queue[tail] = b
                tail += 1
                count += 1
        while head < tail:
            u = queue[head]
            head += 1
            for e in range(indptr_stack[i, u], indptr_stack[i, u + 1]):
                w = indices_flat[e]
                if visited[w] != vst and blocked[w] == 0:
                    visited[w] = vst
                    queue[tail] = w
                    tail += 1
                    count += 1
        for x in range(n):
            in_reach[i, x] = 0
        for q in range(tail):
            in_reach[i, queue[q]] = 1
        base[i] = count
    return vst


@njit(cache=True)
def _marginal_gain(indptr_stack, indices_flat, in_reach, base, sources,
                   blocked, v, visited, vstamp0, queue):
    """Total (over samples) extra nodes saved by also deleting v.

    Samples whose reachable set misses v are skipped: deleting an
    unreachable vertex cannot change reachability from the sources.
    """
    vst = vstamp0
    total = 0
    for i in range(indptr_stack.shape[0]):
        if in_reach[i, v] == 0:
            continue
        vst += 1
        count = 0
        head = 0
        tail = 0
        for s in range(sources.shape[0]):
            b = sources[s]
            if b != v and blocked[b] == 0 and visited[b] != vst:
                visited[b] = vst
                queue[tail] = b
                tail += 1
                count += 1
        while head < tail:
            u = queue[head]
            head += 1
            for e in range(indptr_stack[i, u], indptr_stack[i, u + 1]):
                w = indices_flat[e]
                if w != v and visited[w] != vst and blocked[w] == 0:
                    visited[w] = vst
                    queue[tail] = w
                    tail += 1
                    count += 1
        total += base[i] - count
    return total, vst


@njit(cache=True)
def _sigma_total(indptr_stack, indices_flat, sources, blocked, bstamp,
                 visited, vstamp0, queue):
    """Sum over samples of reachable-set sizes with blocked == bstamp deleted."""
    vst = vstamp0
    total = 0
    for i in range(indptr_stack.shape[0]):
        vst += 1
        count = 0
        head = 0
        tail = 0
        for s in range(sources.shape[0]):
            b = sources[s]
            if blocked[b] != bstamp and visited[b] != vst:
                visited[b] = vst
                queue[tail] = b
                tail += 1
                count += 1
        while head < tail:
            u = queue[head]
            head += 1
            for e in range(indptr_stack[i, u], indptr_stack[i, u + 1]):
                w = indices_flat[e]
                if visited[w] != vst and blocked[w] != bstamp:
                    visited[w] = vst
                    queue[tail] = w
                    tail += 1
                    count += 1
        total += count
    return total, vst


def _bfs_sources(samples: SampleSet, infected: np.ndarray) -> np.ndarray:
    present = samples.samples[0].present
    return np.asarray([b for b in infected if present[b]], dtype=np.int32)


def select_preempt(ctx: SelectionContext, samples: SampleSet | None = None) -> SeedSet:
    """Lazy greedy maximization of expected lives saved.

    Draws a fresh sample set from the current masked network (unless one is
    injected, e.g. for oracle comparisons), then adds the candidate with the
    largest exact marginal gain until the budget is spent. Gains are integer
    sums over samples; ties break by ascending agent id.
    """
    if ctx.sampling_effort < 1:
        raise ValueError(f"sampling effort must be >= 1, got {ctx.sampling_effort}")
    k = min(ctx.budget, len(ctx.candidates))
    if k == 0:
        return SeedSet([], 0.0)
    if samples is None:
        samples = build_sample_set(ctx.network, ctx.sampling_effort, ctx.master_seed)

    n = samples.n_agents
    n_samples = samples.n_samples
    indptr_stack, indices_flat = samples.stacked()
    sources = _bfs_sources(samples, ctx.infected)

    in_reach = np.zeros((n_samples, n), dtype=np.uint8)
    base = np.zeros(n_samples, dtype=np.int64)
    visited = np.zeros(n, dtype=np.int64)
    blocked = np.zeros(n, dtype=np.int64)
    queue = np.zeros(n, dtype=np.int32)
    vst = 0

    if sources.size:
        vst = _refresh_reach(indptr_stack, indices_flat, in_reach, base, sources,
                             blocked, -1, visited, vst, queue)

    candidates = ctx.candidates.astype(np.int64)
    evaluable = candidates[in_reach[:, candidates].any(axis=0)]
    heap: list[tuple[int, int, int]] = []
    for v in evaluable:
        gain, vst = _marginal_gain(indptr_stack, indices_flat, in_reach, base,
                                   sources, blocked, v, visited, vst, queue)
        if gain > 0:
            heap.append((-gain, int(v), 0))
    heapq.heapify(heap)

    selected: list[int] = []
    chosen = set()
    total_saved = 0
    while len(selected) < k and heap:
        neg_gain, v, evaluated_at = heapq.heappop(heap)
        if -neg_gain <= 0:
            break
        if evaluated_at == len(selected):
            selected.append(v)
            chosen.add(v)
            total_saved += -neg_gain
            blocked[v] = 1
            vst = _refresh_reach(indptr_stack, indices_flat, in_reach, base,
                                 sources, blocked, v, visited, vst, queue)
        else:
            gain, vst = _marginal_gain(indptr_stack, indices_flat, in_reach, base,
                                       sources, blocked, v, visited, vst, queue)
            heapq.heappush(heap, (-gain, v, len(selected)))

    if len(selected) < k:
        # every remaining candidate has (provably permanent) zero gain
        for v in candidates:
            if len(selected) == k:
                break
            if int(v) not in chosen:
                selected.append(int(v))
                chosen.add(int(v))

    return SeedSet(selected, total_saved / n_samples)


def brute_force_optimal(samples: SampleSet, infected, candidates, k: int,
                        max_combinations: int = 2_000_000) -> tuple[SeedSet, float]:
    """Exact maximizer of lives saved over all k-subsets of the candidates.

    Test oracle for the greedy; refuses instances larger than
    `max_combinations` subsets. Ties go to the lexicographically smallest id
    sequence.
    """
    cands = sorted(set(int(c) for c in candidates))
    k_eff = min(k, len(cands))
    n_subsets = math.comb(len(cands), k_eff)
    if n_subsets > max_combinations:
        raise ValueError(
            f"{n_subsets} candidate subsets exceed the cap of {max_combinations}")
    if k_eff == 0:
        return SeedSet([], 0.0), 0.0

    n = samples.n_agents
    indptr_stack, indices_flat = samples.stacked()
    infected_arr = np.asarray(sorted(set(int(b) for b in infected)), dtype=np.int64)
    if infected_arr.size and (infected_arr.min() < 0 or infected_arr.max() >= n):
        raise ValueError(f"infected set contains an agent id out of range [0, {n})")
    sources = _bfs_sources(samples, infected_arr)
    visited = np.zeros(n, dtype=np.int64)
    blocked = np.zeros(n, dtype=np.int64)
    queue = np.zeros(n, dtype=np.int32)
    vst = 0
    bstamp = 0

    base_total, vst = _sigma_total(indptr_stack, indices_flat, sources, blocked,
                                   -1, visited, vst, queue)
    best_saved = -1
    best: tuple[int, ...] = ()
    subset_arr = np.zeros(k_eff, dtype=np.int64)
    for subset in itertools.combinations(cands, k_eff):
        bstamp += 1
        subset_arr[:] = subset
        blocked[subset_arr] = bstamp
        total, vst = _sigma_total(indptr_stack, indices_flat, sources, blocked,
                                  bstamp, visited, vst, queue)
        saved = base_total - total
        if saved > best_saved:
            best_saved = saved
            best = subset
    value = best_saved / samples.n_samples
    return SeedSet(list(best), value), value
