"""Live-edge realizations of the diffusion process.

A sample keeps each directed edge of the (masked) contact network
independently with probability equal to its weight. Infection-count queries
reduce to forward reachability on the sample: the expected outbreak size
from infected set B under intervention S is estimated by deleting S's
vertices and running one multi-source BFS from B per sample, then averaging
the reached counts.

Per-sample randomness is derived from (master_seed, sample_index) alone, so
a sample set is reproducible regardless of construction order or worker
count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .network import ContactNetwork, Layer
from .rng import TAG_SAMPLE_EDGES, child_rng


@dataclass
class LiveEdgeSample:
    """Retained out-edges of one realization, in CSR form.

    `present` marks nodes that were non-removed when the sample was drawn;
    removed nodes carry no edges and never count as reachable.
    """

    index: int
    indptr: np.ndarray            # (n+1,) int64
    indices: np.ndarray           # (m_kept,) int32
    present: np.ndarray           # (n,) bool
    edge_ids: np.ndarray = field(default=None, repr=False)  # into source network

    @property
    def n_agents(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return len(self.indices)


@dataclass
class SampleSet:
    samples: list[LiveEdgeSample]
    master_seed: int

    def __post_init__(self):
        self._stacked = None

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def n_agents(self) -> int:
        return self.samples[0].n_agents

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr_stack, indices_flat) with row i addressing sample i's
        slice of the flat index array; built once, then cached."""
        if self._stacked is None:
            n = self.n_agents
            stack = np.empty((self.n_samples, n + 1), dtype=np.int64)
            offset = 0
            chunks = []
            for i, s in enumerate(self.samples):
                stack[i] = s.indptr + offset
                chunks.append(s.indices)
                offset += s.n_edges
            flat = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int32)
            self._stacked = (stack, flat)
        return self._stacked


def sample_subgraph(network: ContactNetwork, sample_index: int,
                    master_seed: int) -> LiveEdgeSample:
    """Flip every live edge once; keep it with probability = its weight."""
    n = network.n_agents
    if n < 1:
        raise ValueError("cannot sample an empty network")
    rng = child_rng(master_seed, TAG_SAMPLE_EDGES, sample_index)
    draws = rng.random(network.n_edges)
    keep = (draws < network.edge_weight) & network.alive_edge_mask()
    kept_ids = np.flatnonzero(keep)
    indices = network.edge_dst[kept_ids].astype(np.int32)
    counts = np.bincount(network.edge_src[kept_ids], minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return LiveEdgeSample(index=sample_index, indptr=indptr, indices=indices,
                          present=network.alive_mask().copy(), edge_ids=kept_ids)


def build_sample_set(network: ContactNetwork, n_samples: int,
                     master_seed: int) -> SampleSet:
    if n_samples < 1:
        raise ValueError(f"sample count must be >= 1, got {n_samples}")
    return SampleSet(
        samples=[sample_subgraph(network, i, master_seed) for i in range(n_samples)],
        master_seed=master_seed)


@njit(cache=True)
def _reach_count(indptr, indices, sources, blocked, bstamp, visited, vstamp, queue):
    """Nodes reachable from `sources`, skipping nodes with blocked == bstamp.

    `visited`/`queue` are reusable scratch; a fresh vstamp makes the visited
    array logically clean without clearing it.
    """
    count = 0
    head = 0
    tail = 0
    for k in range(sources.shape[0]):
        b = sources[k]
        if blocked[b] != bstamp and visited[b] != vstamp:
            visited[b] = vstamp
            queue[tail] = b
            tail += 1
            count += 1
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if visited[v] != vstamp and blocked[v] != bstamp:
                visited[v] = vstamp
                queue[tail] = v
                tail += 1
                count += 1
    return count


class _Scratch:
    """Reusable BFS workspace for one node count."""

    def __init__(self, n: int):
        self.visited = np.zeros(n, dtype=np.int64)
        self.blocked = np.zeros(n, dtype=np.int64)
        self.queue = np.zeros(n, dtype=np.int32)
        self.vstamp = 0
        self.bstamp = 0

    def stamp_blocked(self, nodes: np.ndarray) -> int:
        self.bstamp += 1
        self.blocked[nodes] = self.bstamp
        return self.bstamp

    def next_vstamp(self) -> int:
        self.vstamp += 1
        return self.vstamp


def _check_node_ids(nodes: np.ndarray, n: int, what: str) -> None:
    if nodes.size and (nodes.min() < 0 or nodes.max() >= n):
        raise ValueError(f"{what} contains an agent id out of range [0, {n})")


def _as_id_array(ids) -> np.ndarray:
    return np.asarray(sorted(set(int(i) for i in ids)), dtype=np.int32)


def _sigma_sources(sample_present: np.ndarray, infected: np.ndarray,
                   blocked_set: set[int]) -> np.ndarray:
    keep = [b for b in infected if sample_present[b] and b not in blocked_set]
    return np.asarray(keep, dtype=np.int32)


def sigma_on_sample(sample: LiveEdgeSample, infected, intervention,
                    scratch: _Scratch | None = None) -> int:
    """Outbreak size on one sample: nodes reachable from the infected set
    after deleting the intervention vertices (a deleted source contributes
    nothing; a surviving source counts itself)."""
    n = sample.n_agents
    infected = _as_id_array(infected)
    intervention = _as_id_array(intervention)
    _check_node_ids(infected, n, "infected set")
    _check_node_ids(intervention, n, "intervention set")
    if scratch is None:
        scratch = _Scratch(n)
    bstamp = scratch.stamp_blocked(intervention)
    sources = _sigma_sources(sample.present, infected, set(intervention.tolist()))
    if sources.size == 0:
        return 0
    return int(_reach_count(sample.indptr, sample.indices, sources,
                            scratch.blocked, bstamp,
                            scratch.visited, scratch.next_vstamp(), scratch.queue))


def sigma_estimate(samples: SampleSet, infected, intervention) -> float:
    """Mean outbreak size across all samples (integer sum, then divide)."""
    scratch = _Scratch(samples.n_agents)
    total = 0
    for s in samples.samples:
        total += sigma_on_sample(s, infected, intervention, scratch)
    return total / samples.n_samples


def dump_sample(network: ContactNetwork, sample: LiveEdgeSample, path) -> None:
    """Debug export of one sample in the edge-list text format."""
    with open(path, "w") as fh:
        fh.write(f"# nodes={sample.n_agents}\n")
        for e in sample.edge_ids:
            fh.write(f"{network.edge_src[e]} {network.edge_dst[e]} "
                     f"{Layer(network.edge_layer[e]).label} {network.edge_weight[e]:.8f}\n")
