"""Discrete-time stochastic SEIR+death+vaccination dynamics, one step per day.

Within a day the order is: latent-period expiries first (Exposed agents can
become Infectious and transmit the same day), then transmission along live
out-edges, then infectious-period expiries (death or recovery). A node
exposed today can never transmit today, and all iteration is in ascending
agent id so a full trajectory is a pure function of (network, params, seeds,
rng stream).

Durations are geometric: an agent entering Exposed or Infectious draws an
integer duration with mean equal to the configured period, i.e. it exits
each day with probability 1/mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import InvalidConfigError
from .network import ContactNetwork
from .rng import child_rng


class Compartment(IntEnum):
    SUSCEPTIBLE = 0
    EXPOSED = 1
    INFECTIOUS = 2
    RECOVERED = 3
    DEAD = 4
    VACCINATED = 5


@dataclass
class DiseaseParams:
    latent_mean_days: float = 3.0
    infectious_mean_days: float = 7.0
    case_fatality: float = 0.02
    initial_infections: int = 20

    def validate(self) -> None:
        if self.latent_mean_days <= 0 or self.infectious_mean_days <= 0:
            raise InvalidConfigError("disease period means must be > 0")
        if not 0.0 <= self.case_fatality <= 1.0:
            raise InvalidConfigError(
                f"disease.case_fatality must be in [0,1], got {self.case_fatality}")
        if self.initial_infections < 0:
            raise InvalidConfigError("disease.initial_infections must be >= 0")

    @property
    def latent_exit_prob(self) -> float:
        return min(1.0, 1.0 / self.latent_mean_days)

    @property
    def infectious_exit_prob(self) -> float:
        return min(1.0, 1.0 / self.infectious_mean_days)


@dataclass
class DayOutcome:
    new_infections: int = 0
    new_deaths: int = 0
    new_recoveries: int = 0


@dataclass
class SimState:
    """Per-agent compartments plus counters; mutated in place day by day."""

    comp: np.ndarray                  # (n,) int8 Compartment codes
    latent_rem: np.ndarray            # (n,) int32 days left in Exposed
    infectious_rem: np.ndarray        # (n,) int32 days left in Infectious
    day: int = 0
    ever_infected: int = 0            # seeds + all S->E transitions
    deaths: int = 0
    ever_infected_mask: np.ndarray = field(default=None)
    vaccinated_from_s: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.comp)
        if self.ever_infected_mask is None:
            self.ever_infected_mask = np.zeros(n, dtype=bool)
        if self.vaccinated_from_s is None:
            self.vaccinated_from_s = np.zeros(n, dtype=bool)

    @classmethod
    def all_susceptible(cls, n: int) -> "SimState":
        return cls(comp=np.zeros(n, dtype=np.int8),
                   latent_rem=np.zeros(n, dtype=np.int32),
                   infectious_rem=np.zeros(n, dtype=np.int32))

    @property
    def n_agents(self) -> int:
        return len(self.comp)

    def compartment_counts(self) -> dict[Compartment, int]:
        counts = np.bincount(self.comp, minlength=len(Compartment))
        return {c: int(counts[c]) for c in Compartment}

    def infected_ids(self) -> np.ndarray:
        """Currently Exposed or Infectious agents, ascending — the live
        transmission sources handed to seed selection."""
        return np.flatnonzero((self.comp == Compartment.EXPOSED)
                              | (self.comp == Compartment.INFECTIOUS))


def seed_infections(state: SimState, count: int, seed: int,
                    params: DiseaseParams) -> SimState:
    """Expose `count` uniformly random Susceptible agents."""
    susceptible = np.flatnonzero(state.comp == Compartment.SUSCEPTIBLE)
    if count > len(susceptible):
        raise ValueError(
            f"cannot seed {count} infections with {len(susceptible)} susceptible agents")
    if count == 0:
        return state
    rng = child_rng(seed)
    chosen = rng.choice(susceptible, size=count, replace=False)
    state.comp[chosen] = Compartment.EXPOSED
    state.latent_rem[chosen] = rng.geometric(params.latent_exit_prob, size=count)
    state.ever_infected += count
    state.ever_infected_mask[chosen] = True
    return state


def step_day(state: SimState, network: ContactNetwork, params: DiseaseParams,
             rng: np.random.Generator) -> tuple[SimState, DayOutcome]:
    """Advance the epidemic by one day; dead agents leave the network."""
    comp = state.comp
    out = DayOutcome()

    # Exposed -> Infectious
    exposed = np.flatnonzero(comp == Compartment.EXPOSED)
    if len(exposed):
        state.latent_rem[exposed] -= 1
        becoming = exposed[state.latent_rem[exposed] <= 0]
        if len(becoming):
            comp[becoming] = Compartment.INFECTIOUS
            state.infectious_rem[becoming] = rng.geometric(
                params.infectious_exit_prob, size=len(becoming))

    # transmission: infectious agents in ascending id; a node exposed now
    # is no longer Susceptible, so it cannot be exposed twice or transmit
    infectious = np.flatnonzero(comp == Compartment.INFECTIOUS)
    indptr, dst, wgt = network.indptr, network.edge_dst, network.edge_weight
    p_latent = params.latent_exit_prob
    for u in infectious:
        lo, hi = indptr[u], indptr[u + 1]
        if lo == hi:
            continue
        nbrs = dst[lo:hi]
        open_mask = comp[nbrs] == Compartment.SUSCEPTIBLE
        k = int(open_mask.sum())
        if k == 0:
            continue
        hits = rng.random(k) < wgt[lo:hi][open_mask]
        if hits.any():
            newly = np.unique(nbrs[open_mask][hits])
            comp[newly] = Compartment.EXPOSED
            state.latent_rem[newly] = rng.geometric(p_latent, size=len(newly))
            state.ever_infected_mask[newly] = True
            out.new_infections += len(newly)

    # Infectious -> Dead / Recovered
    infectious = np.flatnonzero(comp == Compartment.INFECTIOUS)
    if len(infectious):
        state.infectious_rem[infectious] -= 1
        exiting = infectious[state.infectious_rem[infectious] <= 0]
        if len(exiting):
            dies = rng.random(len(exiting)) < params.case_fatality
            dead = exiting[dies]
            comp[dead] = Compartment.DEAD
            comp[exiting[~dies]] = Compartment.RECOVERED
            if len(dead):
                network.remove_nodes(dead)
            out.new_deaths = len(dead)
            out.new_recoveries = len(exiting) - len(dead)

    state.ever_infected += out.new_infections
    state.deaths += out.new_deaths
    state.day += 1
    return state, out


def apply_vaccination(state: SimState, network: ContactNetwork,
                      seeds) -> SimState:
    """Vaccinate the given agents.

    Susceptible seeds gain perfect immunity and leave the network; a dose
    given to any other compartment is wasted (no state change). Consumes no
    randomness.
    """
    seeds = np.asarray(sorted(set(int(s) for s in seeds)), dtype=np.int64)
    if seeds.size == 0:
        return state
    if seeds.min() < 0 or seeds.max() >= state.n_agents:
        raise ValueError(f"agent id out of range [0, {state.n_agents})")
    takers = seeds[state.comp[seeds] == Compartment.SUSCEPTIBLE]
    if len(takers):
        state.comp[takers] = Compartment.VACCINATED
        state.vaccinated_from_s[takers] = True
        network.remove_nodes(takers)
    return state
