"""Multi-layer weighted contact network.

The population is a directed graph over agents 0..n-1. Adjacent agents carry
one edge in each direction per shared layer (household, school, work,
community); the two directions may have different weights because the weight
mixes a source-side transmissibility factor with a destination-side
susceptibility factor. Edge weights are per-day transmission probabilities.

The synthetic generator is deliberately simple: households, school classes
and workplaces are disjoint cliques, the community layer is uniform random
matching up to a target mean degree. Vaccinated and dead agents are masked
("removed") rather than compacted so agent ids stay stable for a whole run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidConfigError
from .rng import child_rng


class Layer(IntEnum):
    HOUSEHOLD = 0
    SCHOOL = 1
    WORK = 2
    COMMUNITY = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Layer":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValueError(f"unknown layer name: {label!r}") from None


SCHOOL_AGE = (5, 18)    # inclusive
WORK_AGE = (19, 65)     # inclusive


@dataclass
class PopulationConfig:
    """Inputs to the synthetic population generator.

    Group sizes are means for Poisson-distributed cliques (clamped to >= 1),
    except school classes which have a fixed size. Per-agent relative
    transmissibility/susceptibility factors are log-normal with mean 1.0 and
    the given sigma (sigma 0 disables the heterogeneity).
    """

    n: int = 1000
    household_mean_size: float = 4.0
    school_class_size: int = 20
    workplace_mean_size: float = 10.0
    community_mean_degree: float = 8.0
    beta_household: float = 0.10
    beta_school: float = 0.05
    beta_work: float = 0.05
    beta_community: float = 0.02
    rel_transmissibility_sigma: float = 0.2
    rel_susceptibility_sigma: float = 0.2
    contact_freq_household: float = 1.0
    contact_freq_school: float = 1.0
    contact_freq_work: float = 1.0
    contact_freq_community: float = 1.0
    age_histogram: Sequence[float] | None = None  # 101 bins, ages 0..100

    def beta(self, layer: Layer) -> float:
        return (self.beta_household, self.beta_school,
                self.beta_work, self.beta_community)[layer]

    def contact_freq(self, layer: Layer) -> float:
        return (self.contact_freq_household, self.contact_freq_school,
                self.contact_freq_work, self.contact_freq_community)[layer]

    def validate(self) -> None:
        if self.n < 1:
            raise InvalidConfigError(f"population.n must be >= 1, got {self.n}")
        if self.household_mean_size < 1 or self.workplace_mean_size < 1:
            raise InvalidConfigError("group mean sizes must be >= 1")
        if self.school_class_size < 1:
            raise InvalidConfigError("population.school_class_size must be >= 1")
        if self.community_mean_degree < 0:
            raise InvalidConfigError("population.community_mean_degree must be >= 0")
        for layer in Layer:
            b = self.beta(layer)
            if not 0.0 <= b <= 1.0:
                raise InvalidConfigError(
                    f"population.beta_{layer.label} must be in [0,1], got {b}")
            f = self.contact_freq(layer)
            if not 0.0 < f <= 1.0:
                raise InvalidConfigError(
                    f"population.contact_freq_{layer.label} must be in (0,1], got {f}")
        if self.rel_transmissibility_sigma < 0 or self.rel_susceptibility_sigma < 0:
            raise InvalidConfigError("log-normal sigmas must be >= 0")
        if self.age_histogram is not None:
            hist = np.asarray(self.age_histogram, dtype=float)
            if hist.shape != (101,) or (hist < 0).any() or hist.sum() <= 0:
                raise InvalidConfigError(
                    "population.age_histogram must be 101 nonnegative bins with positive sum")


def edge_weight(beta_layer: float, rel_trans_src: float, rel_sus_dst: float,
                contact_freq: float) -> float:
    """Per-day transmission probability along one directed edge.

    Product of layer infectiousness, source transmissibility, destination
    susceptibility and contact frequency, clamped to [0, 1].
    """
    for name, v in (("beta_layer", beta_layer), ("rel_trans_src", rel_trans_src),
                    ("rel_sus_dst", rel_sus_dst), ("contact_freq", contact_freq)):
        if v < 0:
            raise ValueError(f"{name} must be >= 0, got {v}")
    return min(1.0, beta_layer * rel_trans_src * rel_sus_dst * contact_freq)


@dataclass
class ContactNetwork:
    """Compressed sparse out-edge adjacency plus a removal mask.

    Edge arrays are sorted by (src, dst, layer) and never change after
    construction; removal only flips bits in ``removed``. All queries mask
    removed endpoints.
    """

    ages: np.ndarray                 # (n,) int16
    indptr: np.ndarray               # (n+1,) int64, CSR row pointers
    edge_dst: np.ndarray             # (m,) int32
    edge_layer: np.ndarray           # (m,) int8
    edge_weight: np.ndarray          # (m,) float64
    removed: np.ndarray = field(default=None)  # (n,) bool
    _edge_src: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.removed is None:
            self.removed = np.zeros(self.n_agents, dtype=bool)
        if self._edge_src is None:
            counts = np.diff(self.indptr)
            self._edge_src = np.repeat(
                np.arange(self.n_agents, dtype=np.int32), counts)

    @property
    def n_agents(self) -> int:
        return len(self.ages)

    @property
    def n_edges(self) -> int:
        """Directed edge count, ignoring the removal mask."""
        return len(self.edge_dst)

    @property
    def edge_src(self) -> np.ndarray:
        return self._edge_src

    def alive_mask(self) -> np.ndarray:
        return ~self.removed

    def alive_edge_mask(self) -> np.ndarray:
        """Edges whose both endpoints are currently non-removed."""
        alive = ~self.removed
        return alive[self._edge_src] & alive[self.edge_dst]

    def out_edges(self, u: int):
        """(dst, layer, weight) arrays for u's non-removed out-edges."""
        self._check_ids([u])
        if self.removed[u]:
            empty = slice(0, 0)
            return self.edge_dst[empty], self.edge_layer[empty], self.edge_weight[empty]
        lo, hi = self.indptr[u], self.indptr[u + 1]
        dst = self.edge_dst[lo:hi]
        keep = ~self.removed[dst]
        return dst[keep], self.edge_layer[lo:hi][keep], self.edge_weight[lo:hi][keep]

    def neighbors_out(self, u: int) -> np.ndarray:
        return self.out_edges(u)[0]

    def remove_nodes(self, nodes: Iterable[int]) -> "ContactNetwork":
        """Mask the given agents; idempotent, ids stay valid."""
        nodes = np.asarray(list(nodes), dtype=np.int64)
        if nodes.size:
            self._check_ids(nodes)
            self.removed[nodes] = True
        return self

    def in_degrees(self) -> np.ndarray:
        """Current in-degree per agent (0 for removed agents).

        Pair symmetry makes the in-edge set of a node mirror its out-edge
        set, so counting live out-edges gives the same numbers.
        """
        live = self.alive_edge_mask()
        return np.bincount(self._edge_src[live], minlength=self.n_agents)

    def layer_counts(self) -> dict[str, int]:
        """Directed edge count per layer, ignoring the removal mask."""
        counts = np.bincount(self.edge_layer, minlength=len(Layer))
        return {layer.label: int(counts[layer]) for layer in Layer}

    def copy(self) -> "ContactNetwork":
        return ContactNetwork(
            ages=self.ages.copy(), indptr=self.indptr, edge_dst=self.edge_dst,
            edge_layer=self.edge_layer, edge_weight=self.edge_weight,
            removed=self.removed.copy(), _edge_src=self._edge_src)

    def _check_ids(self, nodes) -> None:
        nodes = np.asarray(nodes)
        if nodes.size and (nodes.min() < 0 or nodes.max() >= self.n_agents):
            raise ValueError(f"agent id out of range [0, {self.n_agents})")


def network_from_edges(ages: Sequence[int],
                       edges: Iterable[tuple[int, int, Layer, float]],
                       validate: bool = True) -> ContactNetwork:
    """Build a network from explicit directed edges (both directions given).

    Mostly for tests and for importing exported edge lists; the generator
    below goes through here too.
    """
    ages = np.asarray(ages, dtype=np.int16)
    n = len(ages)
    edges = list(edges)
    src = np.array([e[0] for e in edges], dtype=np.int32)
    dst = np.array([e[1] for e in edges], dtype=np.int32)
    lay = np.array([int(e[2]) for e in edges], dtype=np.int8)
    wgt = np.array([e[3] for e in edges], dtype=np.float64)

    if validate:
        if n == 0:
            raise InvalidConfigError("network must have at least one agent")
        if len(edges):
            if src.min() < 0 or src.max() >= n or dst.min() < 0 or dst.max() >= n:
                raise ValueError("edge endpoint out of range")
            if (src == dst).any():
                raise ValueError("self-loops are not allowed")
            if (wgt < 0).any() or (wgt > 1).any():
                raise ValueError("edge weights must be in [0, 1]")
            fwd = set(zip(src.tolist(), dst.tolist(), lay.tolist()))
            if len(fwd) != len(edges):
                raise ValueError("duplicate (src, dst, layer) edge")
            for u, v, l in fwd:
                if (v, u, l) not in fwd:
                    raise ValueError(
                        f"missing reverse edge for ({u}, {v}, {Layer(l).label})")

    order = np.lexsort((lay, dst, src))
    src, dst, lay, wgt = src[order], dst[order], lay[order], wgt[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return ContactNetwork(ages=ages, indptr=indptr, edge_dst=dst,
                          edge_layer=lay, edge_weight=wgt)


def _poisson_group_sizes(rng: np.random.Generator, mean: float, total: int) -> list[int]:
    """Poisson(mean) sizes clamped to >= 1, covering exactly `total` agents."""
    sizes: list[int] = []
    remaining = total
    while remaining > 0:
        s = max(1, int(rng.poisson(mean)))
        s = min(s, remaining)
        sizes.append(s)
        remaining -= s
    return sizes


def _clique_pairs(members: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All ordered pairs (u, v), u != v, within one group."""
    k = len(members)
    src = np.repeat(members, k)
    dst = np.tile(members, k)
    keep = src != dst
    return src[keep], dst[keep]


def generate_synthetic_population(config: PopulationConfig, seed: int) -> ContactNetwork:
    """Generate the multi-layer contact network for a synthetic population.

    Deterministic in (config, seed): the same inputs always produce the
    identical edge list.
    """
    config.validate()
    rng = child_rng(seed)
    n = config.n

    if config.age_histogram is not None:
        p = np.asarray(config.age_histogram, dtype=float)
        ages = rng.choice(101, size=n, p=p / p.sum()).astype(np.int16)
    else:
        ages = rng.integers(0, 101, size=n).astype(np.int16)

    st = config.rel_transmissibility_sigma
    ss = config.rel_susceptibility_sigma
    # mean-1 log-normal: exp(mu + sigma^2/2) = 1  =>  mu = -sigma^2/2
    rel_trans = rng.lognormal(-st * st / 2.0, st, n) if st > 0 else np.ones(n)
    rel_sus = rng.lognormal(-ss * ss / 2.0, ss, n) if ss > 0 else np.ones(n)

    src_parts: list[np.ndarray] = []
    dst_parts: list[np.ndarray] = []
    lay_parts: list[np.ndarray] = []

    def add_cliques(member_pool: np.ndarray, sizes: Sequence[int], layer: Layer):
        offset = 0
        for s in sizes:
            group = member_pool[offset:offset + s]
            offset += s
            if s >= 2:
                ps, pd = _clique_pairs(group)
                src_parts.append(ps)
                dst_parts.append(pd)
                lay_parts.append(np.full(len(ps), int(layer), dtype=np.int8))

    # households cover everyone
    pool = rng.permutation(n).astype(np.int32)
    add_cliques(pool, _poisson_group_sizes(rng, config.household_mean_size, n), Layer.HOUSEHOLD)

    # school classes: fixed size, ages 5-18
    students = np.flatnonzero((ages >= SCHOOL_AGE[0]) & (ages <= SCHOOL_AGE[1])).astype(np.int32)
    students = rng.permutation(students)
    class_sizes = [config.school_class_size] * (len(students) // config.school_class_size)
    if len(students) % config.school_class_size:
        class_sizes.append(len(students) % config.school_class_size)
    add_cliques(students, class_sizes, Layer.SCHOOL)

    # workplaces: Poisson sizes, ages 19-65
    workers = np.flatnonzero((ages >= WORK_AGE[0]) & (ages <= WORK_AGE[1])).astype(np.int32)
    workers = rng.permutation(workers)
    if len(workers):
        add_cliques(workers, _poisson_group_sizes(rng, config.workplace_mean_size, len(workers)),
                    Layer.WORK)

    # community: uniform random distinct pairs up to the target mean degree
    target_pairs = int(round(n * config.community_mean_degree / 2.0))
    target_pairs = min(target_pairs, n * (n - 1) // 2)
    if target_pairs > 0 and n >= 2:
        chosen: set[tuple[int, int]] = set()
        while len(chosen) < target_pairs:
            need = target_pairs - len(chosen)
            cand = rng.integers(0, n, size=(max(need * 2, 16), 2))
            for a, b in cand:
                if a == b:
                    continue
                pair = (int(a), int(b)) if a < b else (int(b), int(a))
                if pair not in chosen:
                    chosen.add(pair)
                    if len(chosen) == target_pairs:
                        break
        pairs = np.array(sorted(chosen), dtype=np.int32)
        src_parts.append(np.concatenate([pairs[:, 0], pairs[:, 1]]))
        dst_parts.append(np.concatenate([pairs[:, 1], pairs[:, 0]]))
        lay_parts.append(np.full(2 * len(pairs), int(Layer.COMMUNITY), dtype=np.int8))

    if src_parts:
        src = np.concatenate(src_parts)
        dst = np.concatenate(dst_parts)
        lay = np.concatenate(lay_parts)
    else:
        src = np.empty(0, dtype=np.int32)
        dst = np.empty(0, dtype=np.int32)
        lay = np.empty(0, dtype=np.int8)

    betas = np.array([config.beta(l) for l in Layer])
    freqs = np.array([config.contact_freq(l) for l in Layer])
    wgt = np.minimum(1.0, betas[lay] * rel_trans[src] * rel_sus[dst] * freqs[lay])

    order = np.lexsort((lay, dst, src))
    src, dst, lay, wgt = src[order], dst[order], lay[order], wgt[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return ContactNetwork(ages=ages.astype(np.int16), indptr=indptr, edge_dst=dst,
                          edge_layer=lay, edge_weight=wgt)


def degree_distribution(network: ContactNetwork) -> dict[int, int]:
    """In-degree histogram {degree: node count} over non-removed agents."""
    degs = network.in_degrees()[network.alive_mask()]
    values, counts = np.unique(degs, return_counts=True)
    return {int(d): int(c) for d, c in zip(values, counts)}


def write_edge_list(network: ContactNetwork, path) -> None:
    """Plain-text export: header `# nodes=<n>`, then `src dst layer weight`."""
    live = network.alive_edge_mask()
    src = network.edge_src[live]
    dst = network.edge_dst[live]
    lay = network.edge_layer[live]
    wgt = network.edge_weight[live]
    with open(path, "w") as fh:
        fh.write(f"# nodes={network.n_agents}\n")
        for s, d, l, w in zip(src, dst, lay, wgt):
            fh.write(f"{s} {d} {Layer(l).label} {w:.8f}\n")


def write_ages(network: ContactNetwork, path) -> None:
    """Companion file: one `id age` line per agent."""
    with open(path, "w") as fh:
        for i, a in enumerate(network.ages):
            fh.write(f"{i} {a}\n")


def read_edge_list(path, ages_path=None) -> ContactNetwork:
    """Load a network exported by write_edge_list (+ optional ages file)."""
    n = None
    edges: list[tuple[int, int, Layer, float]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "nodes=" in line:
                    n = int(line.split("nodes=")[1])
                continue
            s, d, l, w = line.split()
            edges.append((int(s), int(d), Layer.from_label(l), float(w)))
    if n is None:
        raise ValueError(f"{path}: missing '# nodes=<n>' header")
    ages = np.zeros(n, dtype=np.int16)
    if ages_path is not None:
        for line in open(ages_path):
            line = line.strip()
            if line and not line.startswith("#"):
                i, a = line.split()
                ages[int(i)] = int(a)
    return network_from_edges(ages, edges)
