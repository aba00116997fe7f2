"""End-to-end experiment orchestration.

A run simulates `horizon` days per replicate: the epidemic spreads
unhindered until the first scheduled vaccination round, then each round day
builds a selection context from the current state, asks the configured
strategy for seeds, vaccinates before that day's transmission step, and
records metrics. Replicates are independent and derive every random stream
from (master_seed, replicate, ...), so they can run on any number of workers
with identical results, and different strategies under the same master seed
share networks and epidemic randomness (common random numbers).
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .disease import (Compartment, DiseaseParams, SimState, apply_vaccination,
                      seed_infections, step_day)
from .errors import InvalidConfigError
from .metrics import (MetricsTimeSeries, SummaryRow, mean_rows, record_day,
                      summarize)
from .network import PopulationConfig, generate_synthetic_population
from .rng import (TAG_DISEASE, TAG_INITIAL_INFECTIONS, TAG_NETWORK,
                  TAG_SAMPLES, TAG_SELECTION, child_rng, child_seed)
from .selection import (SelectionContext, SeedSet, select_degree,
                        select_preempt, select_random)

STRATEGIES = ("none", "random", "degree", "preempt")


@dataclass
class InterventionSchedule:
    """Ordered (day, batch size) vaccination rounds."""

    rounds: list[tuple[int, int]]
    label: str = ""

    def validate(self, horizon: int) -> None:
        last_day = 0
        for day, batch in self.rounds:
            if day <= last_day:
                raise InvalidConfigError(
                    f"schedule days must be strictly increasing and >= 1, got day {day}")
            if day > horizon:
                raise InvalidConfigError(
                    f"schedule round on day {day} is beyond the horizon {horizon}")
            if batch < 0:
                raise InvalidConfigError(f"negative batch size {batch} on day {day}")
            last_day = day

    def total_doses(self) -> int:
        return sum(b for _, b in self.rounds)


@dataclass(frozen=True)
class ScheduleSpec:
    """Declarative schedule: one big round, uniform weekly batches, or an
    explicit per-round batch list (weekly from the first round day)."""

    kind: str = "none"                 # none | single | uniform | explicit
    amount: int = 0                    # single: doses at the first round
    batch: int = 0                     # uniform: doses per round
    n_rounds: int = 0                  # uniform: number of rounds
    batches: tuple[int, ...] = ()      # explicit

    def label(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "single":
            return f"single{self.amount}"
        if self.kind == "uniform":
            return f"uniform{self.batch}x{self.n_rounds}"
        groups = [f"{b}x{len(list(g))}" for b, g in itertools.groupby(self.batches)]
        return "explicit" + "-".join(groups)


def build_schedule(spec: ScheduleSpec, first_day: int, interval: int,
                   horizon: int) -> InterventionSchedule:
    if first_day < 1 or interval < 1:
        raise InvalidConfigError("first round day and round interval must be >= 1")
    if spec.kind == "none":
        rounds = []
    elif spec.kind == "single":
        rounds = [(first_day, spec.amount)]
    elif spec.kind == "uniform":
        rounds = [(first_day + i * interval, spec.batch) for i in range(spec.n_rounds)]
    elif spec.kind == "explicit":
        rounds = [(first_day + i * interval, b) for i, b in enumerate(spec.batches)]
    else:
        raise InvalidConfigError(f"unknown schedule kind {spec.kind!r}")
    schedule = InterventionSchedule(rounds=rounds, label=spec.label())
    schedule.validate(horizon)
    return schedule


@dataclass
class ExperimentConfig:
    population: PopulationConfig = field(default_factory=PopulationConfig)
    disease: DiseaseParams = field(default_factory=DiseaseParams)
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    strategy: str = "none"
    horizon: int = 170
    first_round_day: int = 31
    round_interval: int = 7
    replicates: int = 1
    master_seed: int = 0
    sampling_effort: int = 128
    workers: int = 1

    def validate(self) -> None:
        if self.strategy not in STRATEGIES:
            raise InvalidConfigError(
                f"strategy must be one of {', '.join(STRATEGIES)}, got {self.strategy!r}")
        if self.horizon < 1:
            raise InvalidConfigError("run.horizon must be >= 1")
        if self.replicates < 1:
            raise InvalidConfigError("run.replicates must be >= 1")
        if self.sampling_effort < 1:
            raise InvalidConfigError("run.sampling_effort must be >= 1")
        if self.workers < 1:
            raise InvalidConfigError("run.workers must be >= 1")
        self.population.validate()
        self.disease.validate()
        build_schedule(self.schedule, self.first_round_day, self.round_interval,
                       self.horizon)

    @property
    def label(self) -> str:
        if self.strategy == "none" or self.schedule.kind == "none":
            return self.strategy
        return f"{self.strategy}_{self.schedule.label()}"


def _select_seeds(strategy: str, ctx: SelectionContext, master_seed: int,
                  replicate: int, day: int) -> SeedSet:
    if strategy == "random":
        return select_random(ctx, child_rng(master_seed, TAG_SELECTION, replicate, day))
    if strategy == "degree":
        return select_degree(ctx)
    if strategy == "preempt":
        return select_preempt(ctx)
    raise InvalidConfigError(f"unknown strategy {strategy!r}")


def run_replicate(config: ExperimentConfig, replicate: int) -> MetricsTimeSeries:
    """Simulate one replicate; a pure function of (config, replicate)."""
    seed = config.master_seed
    network = generate_synthetic_population(
        config.population, child_seed(seed, TAG_NETWORK, replicate))
    n = network.n_agents

    state = SimState.all_susceptible(n)
    seed_infections(state, config.disease.initial_infections,
                    child_seed(seed, TAG_INITIAL_INFECTIONS, replicate), config.disease)
    disease_rng = child_rng(seed, TAG_DISEASE, replicate)

    schedule = build_schedule(config.schedule, config.first_round_day,
                              config.round_interval, config.horizon)
    round_on = dict(schedule.rounds) if config.strategy != "none" else {}

    series = MetricsTimeSeries(strategy=config.strategy,
                               schedule_label=schedule.label,
                               replicate=replicate, master_seed=seed)
    for day in range(1, config.horizon + 1):
        doses = 0
        batch = round_on.get(day, 0)
        if batch > 0:
            ctx = SelectionContext.from_state(
                network, state, budget=batch,
                sampling_effort=config.sampling_effort,
                master_seed=child_seed(seed, TAG_SAMPLES, replicate, day))
            seeds = _select_seeds(config.strategy, ctx, seed, replicate, day)
            apply_vaccination(state, network, seeds.nodes)
            doses = len(seeds.nodes)
            if doses < batch:
                series.dose_shortfalls.append((day, batch - doses))
        state, outcome = step_day(state, network, config.disease, disease_rng)
        record_day(series, outcome, state, doses)
        _audit_day(series, state, n)

    if (state.vaccinated_from_s & state.ever_infected_mask).any():
        series.invariant_violations.append("vaccinated-from-susceptible agent was infected")
    return series


def _audit_day(series: MetricsTimeSeries, state: SimState, n: int) -> None:
    rec = series.records[-1]
    total = (rec.susceptible + rec.exposed + rec.infectious + rec.recovered
             + rec.dead + rec.vaccinated)
    if total != n:
        series.invariant_violations.append(
            f"day {rec.day}: compartment counts sum to {total}, expected {n}")
    if len(series.records) >= 2:
        prev = series.records[-2]
        if rec.cum_infections < prev.cum_infections or rec.cum_deaths < prev.cum_deaths:
            series.invariant_violations.append(
                f"day {rec.day}: cumulative series decreased")
        if rec.cum_infections - prev.cum_infections != rec.new_infections:
            series.invariant_violations.append(
                f"day {rec.day}: new_infections does not match cumulative delta")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    label: str
    series: list[MetricsTimeSeries]
    mean: list[list[float]]

    @property
    def final_cum_infections(self) -> list[int]:
        return [s.final.cum_infections for s in self.series]


def _replicate_task(args) -> MetricsTimeSeries:
    config, replicate = args
    return run_replicate(config, replicate)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run all replicates (in parallel if config.workers > 1)."""
    config.validate()
    tasks = [(config, r) for r in range(config.replicates)]
    if config.workers > 1 and config.replicates > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            series = list(pool.map(_replicate_task, tasks))
    else:
        series = [run_replicate(config, r) for r in range(config.replicates)]
    return ExperimentResult(config=config, label=config.label, series=series,
                            mean=mean_rows(series))


@dataclass
class ComparisonResult:
    results: dict[str, ExperimentResult]
    summary: list[SummaryRow]


def run_comparison(configs: list[ExperimentConfig]) -> ComparisonResult:
    """Run several configurations under common random numbers.

    All configurations must agree on horizon, population, replicate count
    and master seed so that outcome differences are attributable to the
    strategy/schedule alone.
    """
    if not configs:
        raise InvalidConfigError("run_comparison needs at least one configuration")
    first = configs[0]
    for c in configs[1:]:
        if c.horizon != first.horizon:
            raise InvalidConfigError("compared configurations have mismatched horizons")
        if c.population != first.population:
            raise InvalidConfigError("compared configurations have mismatched populations")
        if c.replicates != first.replicates or c.master_seed != first.master_seed:
            raise InvalidConfigError(
                "compared configurations must share replicates and master seed")
    results: dict[str, ExperimentResult] = {}
    for c in configs:
        res = run_experiment(c)
        if res.label in results:
            raise InvalidConfigError(f"duplicate configuration label {res.label!r}")
        results[res.label] = res
    baseline = "none" if "none" in results else None
    summary = summarize({k: v.series for k, v in results.items()}, baseline)
    return ComparisonResult(results=results, summary=summary)


def baseline_config(config: ExperimentConfig) -> ExperimentConfig:
    """The matching no-vaccine configuration (same seeds and population)."""
    return replace(config, strategy="none", schedule=ScheduleSpec(kind="none"))
