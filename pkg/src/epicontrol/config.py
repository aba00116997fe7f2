"""Flat `key = value` configuration grammar and resolution.

Keys are dot-namespaced (population.*, disease.*, run.*, schedule.*).
Resolution precedence: built-in defaults < EPICONTROL_SEED (seed only) <
config file < explicit flag overrides. Schedule dose values written as
fractions (e.g. 0.2) resolve against population.n at config time, so the
resolved mapping — which is what the run manifest records — contains only
concrete counts and reproduces the run exactly.
"""

from __future__ import annotations

import os

from .disease import DiseaseParams
from .errors import InvalidConfigError
from .network import PopulationConfig
from .workflow import ExperimentConfig, ScheduleSpec

SEED_ENV_VAR = "EPICONTROL_SEED"

DEFAULTS: dict[str, str] = {
    "population.n": "1000",
    "population.household_mean_size": "4.0",
    "population.school_class_size": "20",
    "population.workplace_mean_size": "10.0",
    "population.community_mean_degree": "8.0",
    "population.beta_household": "0.1",
    "population.beta_school": "0.05",
    "population.beta_work": "0.05",
    "population.beta_community": "0.02",
    "population.rel_transmissibility_sigma": "0.2",
    "population.rel_susceptibility_sigma": "0.2",
    "population.contact_freq_household": "1.0",
    "population.contact_freq_school": "1.0",
    "population.contact_freq_work": "1.0",
    "population.contact_freq_community": "1.0",
    "population.age_histogram": "",
    "disease.latent_mean_days": "3.0",
    "disease.infectious_mean_days": "7.0",
    "disease.case_fatality": "0.02",
    "disease.initial_infections": "20",
    "run.strategy": "none",
    "run.horizon": "170",
    "run.first_round_day": "31",
    "run.round_interval": "7",
    "run.replicates": "1",
    "run.seed": "0",
    "run.sampling_effort": "128",
    "schedule.kind": "none",
    "schedule.amount": "0",
    "schedule.batch": "0",
    "schedule.rounds": "0",
    "schedule.batches": "",
}


def parse_config_file(path) -> dict[str, str]:
    """Read `key = value` lines; `#` starts a comment; unknown keys fail."""
    values: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in DEFAULTS:
                raise InvalidConfigError(f"{path}:{lineno}: unknown configuration key: {key}")
            values[key] = value
    return values


def merge_values(file_values: dict[str, str] | None,
                 overrides: dict[str, str] | None,
                 env: dict[str, str] | None = None) -> dict[str, str]:
    """Apply the precedence chain and reject unknown override keys."""
    env = os.environ if env is None else env
    merged = dict(DEFAULTS)
    if env.get(SEED_ENV_VAR):
        merged["run.seed"] = env[SEED_ENV_VAR]
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key not in DEFAULTS:
                raise InvalidConfigError(f"unknown configuration key: {key}")
            merged[key] = value
    return merged


def _parse_int(values: dict[str, str], key: str) -> int:
    try:
        return int(values[key])
    except ValueError:
        raise InvalidConfigError(f"invalid integer for {key}: {values[key]!r}") from None


def _parse_float(values: dict[str, str], key: str) -> float:
    try:
        return float(values[key])
    except ValueError:
        raise InvalidConfigError(f"invalid number for {key}: {values[key]!r}") from None


def _parse_count(token: str, n: int, key: str) -> int:
    """A dose count: an integer, or a fraction of the population."""
    token = token.strip()
    try:
        if "." in token or "e" in token.lower():
            frac = float(token)
            if not 0.0 <= frac <= 1.0:
                raise InvalidConfigError(
                    f"{key}: fraction {token} must be within [0, 1]")
            return int(round(frac * n))
        value = int(token)
    except ValueError:
        raise InvalidConfigError(f"invalid dose count for {key}: {token!r}") from None
    if value < 0:
        raise InvalidConfigError(f"{key}: dose count must be >= 0, got {value}")
    return value


def parse_schedule_flag(text: str) -> dict[str, str]:
    """CLI grammar: single:<count-or-fraction> | uniform:<batch>x<rounds> |
    explicit:<b1,b2,...> | none."""
    text = text.strip()
    if text == "none":
        return {"schedule.kind": "none"}
    if ":" not in text:
        raise InvalidConfigError(f"schedule: expected kind:args, got {text!r}")
    kind, args = text.split(":", 1)
    if kind == "single":
        return {"schedule.kind": "single", "schedule.amount": args}
    if kind == "uniform":
        if "x" not in args:
            raise InvalidConfigError(f"schedule: uniform needs <batch>x<rounds>, got {args!r}")
        batch, rounds = args.split("x", 1)
        return {"schedule.kind": "uniform", "schedule.batch": batch,
                "schedule.rounds": rounds}
    if kind == "explicit":
        return {"schedule.kind": "explicit", "schedule.batches": args}
    raise InvalidConfigError(f"schedule: unknown kind {kind!r}")


def resolve_config(file_values: dict[str, str] | None = None,
                   overrides: dict[str, str] | None = None,
                   env: dict[str, str] | None = None,
                   workers: int = 1) -> tuple[ExperimentConfig, dict[str, str]]:
    """Produce a validated ExperimentConfig plus the canonical resolved
    mapping (every key concrete — what the manifest records)."""
    values = merge_values(file_values, overrides, env)
    n = _parse_int(values, "population.n")

    hist_raw = values["population.age_histogram"].strip()
    age_histogram = None
    if hist_raw:
        try:
            age_histogram = tuple(float(x) for x in hist_raw.split(","))
        except ValueError:
            raise InvalidConfigError("invalid population.age_histogram entry") from None

    population = PopulationConfig(
        n=n,
        household_mean_size=_parse_float(values, "population.household_mean_size"),
        school_class_size=_parse_int(values, "population.school_class_size"),
        workplace_mean_size=_parse_float(values, "population.workplace_mean_size"),
        community_mean_degree=_parse_float(values, "population.community_mean_degree"),
        beta_household=_parse_float(values, "population.beta_household"),
        beta_school=_parse_float(values, "population.beta_school"),
        beta_work=_parse_float(values, "population.beta_work"),
        beta_community=_parse_float(values, "population.beta_community"),
        rel_transmissibility_sigma=_parse_float(values, "population.rel_transmissibility_sigma"),
        rel_susceptibility_sigma=_parse_float(values, "population.rel_susceptibility_sigma"),
        contact_freq_household=_parse_float(values, "population.contact_freq_household"),
        contact_freq_school=_parse_float(values, "population.contact_freq_school"),
        contact_freq_work=_parse_float(values, "population.contact_freq_work"),
        contact_freq_community=_parse_float(values, "population.contact_freq_community"),
        age_histogram=age_histogram,
    )
    disease = DiseaseParams(
        latent_mean_days=_parse_float(values, "disease.latent_mean_days"),
        infectious_mean_days=_parse_float(values, "disease.infectious_mean_days"),
        case_fatality=_parse_float(values, "disease.case_fatality"),
        initial_infections=_parse_int(values, "disease.initial_infections"),
    )

    kind = values["schedule.kind"]
    if kind == "none":
        schedule = ScheduleSpec(kind="none")
    elif kind == "single":
        amount = _parse_count(values["schedule.amount"], n, "schedule.amount")
        values["schedule.amount"] = str(amount)
        schedule = ScheduleSpec(kind="single", amount=amount)
    elif kind == "uniform":
        batch = _parse_count(values["schedule.batch"], n, "schedule.batch")
        rounds = _parse_int(values, "schedule.rounds")
        values["schedule.batch"] = str(batch)
        schedule = ScheduleSpec(kind="uniform", batch=batch, n_rounds=rounds)
    elif kind == "explicit":
        raw = values["schedule.batches"].strip()
        if not raw:
            raise InvalidConfigError("schedule.batches must be non-empty for explicit schedules")
        batches = tuple(_parse_count(tok, n, "schedule.batches") for tok in raw.split(","))
        values["schedule.batches"] = ",".join(str(b) for b in batches)
        schedule = ScheduleSpec(kind="explicit", batches=batches)
    else:
        raise InvalidConfigError(f"schedule.kind must be none|single|uniform|explicit, got {kind!r}")

    config = ExperimentConfig(
        population=population,
        disease=disease,
        schedule=schedule,
        strategy=values["run.strategy"],
        horizon=_parse_int(values, "run.horizon"),
        first_round_day=_parse_int(values, "run.first_round_day"),
        round_interval=_parse_int(values, "run.round_interval"),
        replicates=_parse_int(values, "run.replicates"),
        master_seed=_parse_int(values, "run.seed"),
        sampling_effort=_parse_int(values, "run.sampling_effort"),
        workers=workers,
    )
    config.validate()
    return config, values


def manifest_text(resolved: dict[str, str], extra_comments: tuple[str, ...] = ()) -> str:
    """Self-sufficient run manifest; valid as a config file for --config.

    Worker count and output paths are execution details, not semantics, and
    are deliberately absent: a rerun from this file is byte-identical no
    matter how it is parallelized.
    """
    lines = ["# epicontrol run manifest",
             "# reproduce with: epicontrol run --config <this file>"]
    lines.extend(extra_comments)
    for key in sorted(resolved):
        lines.append(f"{key} = {resolved[key]}")
    return "\n".join(lines) + "\n"
