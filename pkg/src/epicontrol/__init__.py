"""Epidemic simulation with network-based vaccination strategies.

Builds multi-layer synthetic contact networks, runs discrete-time stochastic
SEIR+death dynamics over them, and interrupts the epidemic with scheduled
vaccination rounds whose seeds come from pluggable strategies: uniform
random, highest degree, or greedy maximization of expected lives saved over
live-edge samples of the diffusion process.
"""

from .disease import (Compartment, DayOutcome, DiseaseParams, SimState,
                      apply_vaccination, seed_infections, step_day)
from .errors import InvalidConfigError
from .metrics import (CSV_HEADER, DayRecord, MetricsTimeSeries, SummaryRow,
                      format_summary_table, mean_rows, record_day, summarize,
                      write_csv, write_summary_csv)
from .network import (ContactNetwork, Layer, PopulationConfig,
                      degree_distribution, edge_weight,
                      generate_synthetic_population, network_from_edges,
                      read_edge_list, write_ages, write_edge_list)
from .sampling import (LiveEdgeSample, SampleSet, build_sample_set,
                       dump_sample, sample_subgraph, sigma_estimate,
                       sigma_on_sample)
from .selection import (SeedSet, SelectionContext, brute_force_optimal,
                        lives_saved, select_degree, select_preempt,
                        select_random)
from .workflow import (STRATEGIES, ComparisonResult, ExperimentConfig,
                       ExperimentResult, InterventionSchedule, ScheduleSpec,
                       build_schedule, run_comparison, run_experiment,
                       run_replicate)

__version__ = "0.1.0"
