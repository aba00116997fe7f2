"""Command-line entry point.

Subcommands:
  run          simulate one configuration (all replicates) and write CSVs
  compare      run several strategies under common random numbers
  gen-network  write a synthetic contact network as an edge-list file
  degree-hist  in-degree histogram of an edge-list network file

Exit codes: 0 success, 2 usage/validation error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import (manifest_text, parse_config_file, parse_schedule_flag,
                     resolve_config)
from .errors import InvalidConfigError
from .metrics import format_summary_table, summarize, write_csv, write_summary_csv
from .network import (degree_distribution, generate_synthetic_population,
                      read_edge_list, write_ages, write_edge_list)
from .rng import TAG_NETWORK, child_seed
from .workflow import STRATEGIES, ScheduleSpec, run_comparison, run_experiment

from dataclasses import replace


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epicontrol",
        description="Epidemic simulation with network-based vaccination strategies.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p, with_run_flags=True):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any configuration key (repeatable)")
        p.add_argument("--seed", type=int, help="master random seed")
        if with_run_flags:
            p.add_argument("--schedule", help="single:<k> | uniform:<b>x<r> | "
                                            "explicit:<b1,b2,...> | none "
                                            "(dose values may be fractions of n)")
            p.add_argument("--replicates", type=int)
            p.add_argument("--horizon", type=int)
            p.add_argument("--sampling-effort", type=int, dest="sampling_effort")
            p.add_argument("--out", default="out", help="output directory")
            p.add_argument("--workers", type=int, default=None,
                           help="replicate-level parallelism (default: all cores)")

    p_run = sub.add_parser("run", help="run one experiment configuration")
    add_config_flags(p_run)
    p_run.add_argument("--strategy", help="none | random | degree | preempt")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run strategies under common random numbers")
    add_config_flags(p_cmp)
    p_cmp.add_argument("--strategies", required=True,
                       help="comma-separated strategy names")
    p_cmp.set_defaults(func=cmd_compare)

    p_gen = sub.add_parser("gen-network", help="generate and export a contact network")
    add_config_flags(p_gen, with_run_flags=False)
    p_gen.add_argument("--n", type=int, help="population size")
    p_gen.add_argument("--out", required=True, help="edge-list output path")
    p_gen.add_argument("--ages-out", dest="ages_out",
                       help="companion ages file (default: <out>.ages)")
    p_gen.set_defaults(func=cmd_gen_network)

    p_deg = sub.add_parser("degree-hist", help="degree histogram of an edge-list file")
    p_deg.add_argument("--network", required=True, help="edge-list file to read")
    p_deg.add_argument("--out", help="CSV output path (default: stdout)")
    p_deg.set_defaults(func=cmd_degree_hist)

    return parser


def _flag_overrides(args) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for pair in args.set:
        if "=" not in pair:
            raise InvalidConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        key, value = (part.strip() for part in pair.split("=", 1))
        overrides[key] = value
    if getattr(args, "strategy", None) is not None:
        overrides["run.strategy"] = args.strategy
    if args.seed is not None:
        overrides["run.seed"] = str(args.seed)
    if getattr(args, "replicates", None) is not None:
        overrides["run.replicates"] = str(args.replicates)
    if getattr(args, "horizon", None) is not None:
        overrides["run.horizon"] = str(args.horizon)
    if getattr(args, "sampling_effort", None) is not None:
        overrides["run.sampling_effort"] = str(args.sampling_effort)
    if getattr(args, "schedule", None):
        overrides.update(parse_schedule_flag(args.schedule))
    return overrides


def _resolve(args, extra_overrides=None, workers: int = 1):
    file_values = parse_config_file(args.config) if args.config else {}
    overrides = _flag_overrides(args)
    overrides.update(extra_overrides or {})
    return resolve_config(file_values, overrides, workers=workers)


def _workers(args) -> int:
    import os
    if getattr(args, "workers", None):
        return args.workers
    return os.cpu_count() or 1


def _print_banner(resolved: dict[str, str]) -> None:
    print("resolved configuration:")
    for key in sorted(resolved):
        print(f"  {key} = {resolved[key]}")


def _write_series_files(series_list, mean, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for s in series_list:
        write_csv(s, outdir / f"rep{s.replicate:03d}.csv")
    write_csv(mean, outdir / "mean.csv")


def _report_shortfalls(series_list) -> None:
    for s in series_list:
        for day, missing in s.dose_shortfalls:
            print(f"note: replicate {s.replicate}, day {day}: "
                  f"{missing} doses unfilled (candidates exhausted)")


def cmd_run(args) -> int:
    config, resolved = _resolve(args, workers=_workers(args))
    _print_banner(resolved)
    result = run_experiment(config)
    outdir = Path(args.out)
    _write_series_files(result.series, result.mean, outdir)
    baseline = result.label if config.strategy == "none" else None
    rows = summarize({result.label: result.series}, baseline)
    write_summary_csv(rows, outdir / "summary.csv")
    (outdir / "manifest.txt").write_text(manifest_text(resolved))
    _report_shortfalls(result.series)
    print(format_summary_table(rows))
    print(f"wrote {config.replicates} replicate file(s), mean.csv, "
          f"summary.csv, manifest.txt to {outdir}")
    return 0


def cmd_compare(args) -> int:
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    if not strategies:
        raise InvalidConfigError("strategies: expected at least one strategy name")
    for s in strategies:
        if s not in STRATEGIES:
            raise InvalidConfigError(
                f"strategy must be one of {', '.join(STRATEGIES)}, got {s!r}")

    workers = _workers(args)
    base_config, resolved = _resolve(args, workers=workers)
    configs = []
    for s in strategies:
        cfg = replace(base_config, strategy=s)
        if s == "none":
            cfg = replace(cfg, schedule=ScheduleSpec(kind="none"))
        cfg.validate()
        configs.append(cfg)

    comparison = run_comparison(configs)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for label, result in comparison.results.items():
        _write_series_files(result.series, result.mean, outdir / label)
        _report_shortfalls(result.series)
    write_summary_csv(comparison.summary, outdir / "summary.csv")
    (outdir / "manifest.txt").write_text(manifest_text(
        resolved, (f"# compare strategies: {','.join(strategies)}",)))
    _print_banner(resolved)
    print(format_summary_table(comparison.summary))
    return 0


def cmd_gen_network(args) -> int:
    extra = {}
    if args.n is not None:
        extra["population.n"] = str(args.n)
    config, resolved = _resolve(args, extra_overrides=extra)
    network = generate_synthetic_population(
        config.population, child_seed(config.master_seed, TAG_NETWORK, 0))
    write_edge_list(network, args.out)
    ages_path = args.ages_out or (str(args.out) + ".ages")
    write_ages(network, ages_path)
    print(f"wrote {network.n_agents} agents, {network.n_edges} directed edges "
          f"to {args.out} (ages: {ages_path})")
    return 0


def cmd_degree_hist(args) -> int:
    network = read_edge_list(args.network)
    hist = degree_distribution(network)
    lines = ["degree,count"] + [f"{d},{c}" for d, c in sorted(hist.items())]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except InvalidConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
