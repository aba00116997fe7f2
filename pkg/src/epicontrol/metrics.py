"""Per-day observables and plot-ready CSV output.

One record per simulated day tracks the three headline metrics (cumulative
infections, new infections per day, cumulative deaths) plus compartment
counts and doses given. The CSV column contract is frozen:

    day,new_infections,cum_infections,cum_deaths,susceptible,exposed,
    infectious,recovered,dead,vaccinated,doses

Per-replicate files carry integers; replicate-mean files carry 6-decimal
floats. Formatting is deterministic so identical runs re-emit byte-identical
files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .disease import Compartment, DayOutcome, SimState

CSV_HEADER = ("day,new_infections,cum_infections,cum_deaths,susceptible,"
              "exposed,infectious,recovered,dead,vaccinated,doses")

SUMMARY_HEADER = ("label,final_cum_infections_mean,final_cum_infections_std,"
                  "final_cum_deaths_mean,final_cum_deaths_std,"
                  "pct_reduction_vs_baseline")

UNDEFINED = "undefined"

_FIELDS = ("day", "new_infections", "cum_infections", "cum_deaths",
           "susceptible", "exposed", "infectious", "recovered", "dead",
           "vaccinated", "doses")


@dataclass
class DayRecord:
    day: int
    new_infections: int
    cum_infections: int
    cum_deaths: int
    susceptible: int
    exposed: int
    infectious: int
    recovered: int
    dead: int
    vaccinated: int
    doses: int


@dataclass
class MetricsTimeSeries:
    strategy: str = ""
    schedule_label: str = ""
    replicate: int = 0
    master_seed: int = 0
    records: list[DayRecord] = field(default_factory=list)
    dose_shortfalls: list[tuple[int, int]] = field(default_factory=list)  # (day, missing)
    invariant_violations: list[str] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return len(self.records)

    @property
    def final(self) -> DayRecord:
        return self.records[-1]


def record_day(series: MetricsTimeSeries, outcome: DayOutcome, state: SimState,
               doses: int) -> MetricsTimeSeries:
    """Append the day that just ran; days must arrive in order."""
    expected = series.records[-1].day + 1 if series.records else 1
    if state.day != expected:
        raise ValueError(f"out-of-order day: expected {expected}, got {state.day}")
    counts = state.compartment_counts()
    series.records.append(DayRecord(
        day=state.day,
        new_infections=outcome.new_infections,
        cum_infections=state.ever_infected,
        cum_deaths=state.deaths,
        susceptible=counts[Compartment.SUSCEPTIBLE],
        exposed=counts[Compartment.EXPOSED],
        infectious=counts[Compartment.INFECTIOUS],
        recovered=counts[Compartment.RECOVERED],
        dead=counts[Compartment.DEAD],
        vaccinated=counts[Compartment.VACCINATED],
        doses=doses,
    ))
    return series


def mean_rows(series_list: list[MetricsTimeSeries]) -> list[list[float]]:
    """Per-day means across replicates, in CSV column order (day stays int)."""
    horizons = {s.horizon for s in series_list}
    if len(horizons) != 1:
        raise ValueError("replicate series have differing horizons")
    table = np.array([[[getattr(r, f) for f in _FIELDS] for r in s.records]
                      for s in series_list], dtype=float)
    return table.mean(axis=0).tolist()


def write_csv(series, path) -> None:
    """Write a per-replicate series or replicate-mean rows to CSV."""
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        if isinstance(series, MetricsTimeSeries):
            for r in series.records:
                fh.write(",".join(str(getattr(r, f)) for f in _FIELDS) + "\n")
        else:
            for row in series:
                cells = [str(int(row[0]))] + [f"{v:.6f}" for v in row[1:]]
                fh.write(",".join(cells) + "\n")


@dataclass
class SummaryRow:
    label: str
    final_cum_infections_mean: float
    final_cum_infections_std: float
    final_cum_deaths_mean: float
    final_cum_deaths_std: float
    pct_reduction_vs_baseline: float | None  # None when undefined


def _mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std


def summarize(results: dict[str, list[MetricsTimeSeries]],
              baseline_label: str | None = None) -> list[SummaryRow]:
    """One row per configuration with percent reduction vs the baseline.

    Reduction is 100 * (baseline - value) / baseline on mean final cumulative
    infections; it is undefined (None) when no baseline is present or the
    baseline saw zero infections.
    """
    baseline_mean = None
    if baseline_label is not None:
        if baseline_label not in results:
            raise ValueError(f"baseline label {baseline_label!r} missing from results")
        baseline_mean, _ = _mean_std([s.final.cum_infections
                                      for s in results[baseline_label]])
    rows = []
    for label, series_list in results.items():
        inf_mean, inf_std = _mean_std([s.final.cum_infections for s in series_list])
        dth_mean, dth_std = _mean_std([s.final.cum_deaths for s in series_list])
        if baseline_mean is None or baseline_mean == 0:
            pct = None
        else:
            pct = 100.0 * (baseline_mean - inf_mean) / baseline_mean
        rows.append(SummaryRow(label, inf_mean, inf_std, dth_mean, dth_std, pct))
    return rows


def write_summary_csv(rows: list[SummaryRow], path) -> None:
    with open(path, "w") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for r in rows:
            pct = UNDEFINED if r.pct_reduction_vs_baseline is None \
                else f"{r.pct_reduction_vs_baseline:.6f}"
            fh.write(f"{r.label},{r.final_cum_infections_mean:.6f},"
                     f"{r.final_cum_infections_std:.6f},"
                     f"{r.final_cum_deaths_mean:.6f},"
                     f"{r.final_cum_deaths_std:.6f},{pct}\n")


def format_summary_table(rows: list[SummaryRow]) -> str:
    """Aligned plain-text rendering of the summary for standard output."""
    headers = ["label", "cum_infections", "cum_deaths", "reduction_vs_baseline"]
    body = []
    for r in rows:
        pct = UNDEFINED if r.pct_reduction_vs_baseline is None \
            else f"{r.pct_reduction_vs_baseline:.1f}%"
        body.append([r.label,
                     f"{r.final_cum_infections_mean:.1f} ± {r.final_cum_infections_std:.1f}",
                     f"{r.final_cum_deaths_mean:.1f} ± {r.final_cum_deaths_std:.1f}",
                     pct])
    widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)
