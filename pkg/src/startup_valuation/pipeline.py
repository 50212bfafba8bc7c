"""Run manifests, the rank -> size -> value pipeline, and sensitivity sweeps."""

from __future__ import annotations

import itertools
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import reports
from .dataset import CountryProfile, IndicatorDataset, country_code, parse_country_profile, parse_indicator_dataset, validate_dataset
from .dcf import ValuationResult, valuate
from .errors import ConfigError, IoError, UnknownParameter
from .market import SamBreakdown, SomSchedule, TamBreakdown, compute_sam, compute_som_schedule, compute_tam
from .ranking import RankingTable, load_reference_ranking, rank_dataset
from .scenario import SWEEPABLE_FIELDS, ScenarioSet, load_scenarios, with_overrides

log = logging.getLogger(__name__)

DATA_DIR_ENV = "STARTUP_VALUATION_DATA"
BUNDLED_DATA = Path(__file__).parent / "data"

STAGES = {
    "rank": ("rank",),
    "size": ("size",),
    "value": ("rank", "size", "value"),
}

_MANIFEST_KEYS = {
    "indicators",
    "observations",
    "profiles",
    "scenario",
    "ranks",
    "countries",
    "output_dir",
    "sweep",
    "min_coverage",
}


def data_dir() -> Path:
    env = os.environ.get(DATA_DIR_ENV)
    return Path(env) if env else BUNDLED_DATA


@dataclass(frozen=True)
class RunManifest:
    indicators: Path | None = None
    observations: Path | None = None
    profiles: Path | None = None
    scenario: Path | None = None
    ranks: Path | None = None
    countries: tuple[str, ...] = ()
    output_dir: Path = Path("out")
    sweep: tuple[tuple[str, tuple[float, ...]], ...] = ()
    min_coverage: float = 0.5


def _parse_sweep(raw) -> tuple[tuple[str, tuple[float, ...]], ...]:
    axes = []
    for axis in raw or ():
        try:
            name = axis["parameter"]
            values = tuple(float(v) for v in axis["values"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad sweep axis {axis!r}: {exc}") from None
        if name not in SWEEPABLE_FIELDS:
            raise UnknownParameter(f"sweep parameter {name!r} is not a scenario field")
        if not values or not all(math.isfinite(v) for v in values):
            raise ConfigError(f"sweep grid for {name!r} must be nonempty and finite")
        axes.append((name, values))
    return tuple(axes)


def manifest_from_dict(data: dict, base: Path = Path(".")) -> RunManifest:
    unknown = sorted(set(data) - _MANIFEST_KEYS)
    if unknown:
        raise ConfigError(f"unknown manifest key(s): {', '.join(unknown)}")

    def resolve(key):
        value = data.get(key)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    try:
        countries = tuple(country_code(c) for c in data.get("countries") or ())
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunManifest(
        indicators=resolve("indicators"),
        observations=resolve("observations"),
        profiles=resolve("profiles"),
        scenario=resolve("scenario"),
        ranks=resolve("ranks"),
        countries=countries,
        output_dir=resolve("output_dir") or base / "out",
        sweep=_parse_sweep(data.get("sweep")),
        min_coverage=float(data.get("min_coverage", 0.5)),
    )


def resolve_manifest_path(path) -> Path:
    """Use ``path`` as given, falling back to the default data directory."""
    p = Path(path)
    if p.exists() or p.is_absolute():
        return p
    fallback = data_dir() / p
    return fallback if fallback.exists() else p


def load_manifest(path) -> RunManifest:
    path = resolve_manifest_path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(path, exc) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: manifest must be a JSON object")
    return manifest_from_dict(data, path.parent)


@dataclass
class PipelineContext:
    manifest: RunManifest
    dataset: IndicatorDataset | None = None
    ranking: RankingTable | None = None
    reference_ranks: dict | None = None
    scenarios: ScenarioSet = field(default_factory=ScenarioSet)
    profiles: dict[str, CountryProfile] = field(default_factory=dict)

    def rank_of(self, country: str) -> int | None:
        if self.reference_ranks is not None:
            ref = self.reference_ranks.get(country)
            return ref.overall_rank if ref else None
        if self.ranking is not None:
            return self.ranking.ranks().get(country)
        return None


def _require(path: Path | None, what: str) -> Path:
    if path is None:
        raise ConfigError(f"manifest does not name a {what}")
    if not path.exists():
        raise IoError(path, FileNotFoundError(f"{what} not found"))
    return path


def load_context(manifest: RunManifest, stages) -> PipelineContext:
    ctx = PipelineContext(manifest)
    if "rank" in stages:
        ind = _require(manifest.indicators, "indicators file")
        obs = _require(manifest.observations, "observations file")
        ctx.dataset = parse_indicator_dataset(ind, obs)
        ctx.ranking = rank_dataset(ctx.dataset)
        if manifest.ranks is not None:
            ctx.reference_ranks = load_reference_ranking(_require(manifest.ranks, "reference ranking"))
    if "size" in stages or "value" in stages:
        if manifest.scenario is not None:
            ctx.scenarios = load_scenarios(_require(manifest.scenario, "scenario file"))
        if manifest.profiles is not None:
            profile_dir = _require(manifest.profiles, "profiles directory")
            for p in sorted(profile_dir.glob("*.json")):
                profile = parse_country_profile(p)
                ctx.profiles[profile.country] = profile
    return ctx


@dataclass(frozen=True)
class CountryOutcome:
    country: str
    status: str
    rank: int | None = None
    tam: TamBreakdown | None = None
    sam: SamBreakdown | None = None
    schedule: SomSchedule | None = None
    valuation: ValuationResult | None = None
    note: str = ""


def evaluate_country(ctx: PipelineContext, country: str, stages, overrides: dict | None = None) -> CountryOutcome:
    """Size and value one country. Data findings become a status, never an exception."""
    config = ctx.scenarios.for_country(country)
    if overrides:
        config = with_overrides(config, overrides)
    profile = ctx.profiles.get(country)
    tam = sam = schedule = None
    if profile is not None:
        tam = compute_tam(profile)
        sam = compute_sam(profile, tam)
    sam_usd = config.sam_usd_override if config.sam_usd_override is not None else (sam.sam_usd_annual if sam else None)
    if sam_usd is not None:
        schedule = compute_som_schedule(sam_usd, config)
    rank = ctx.rank_of(country)

    if "value" not in stages:
        status = "ok" if profile is not None else "no_profile"
        if status == "ok" and sam.nonviable:
            status = "nonviable"
        return CountryOutcome(country, status, rank, tam, sam, schedule)

    if sam is not None and sam.nonviable and config.sam_usd_override is None and config.revenue_override is None:
        return CountryOutcome(country, "nonviable", rank, tam, sam, schedule, note="valuation skipped")
    if schedule is None:
        if config.revenue_override is None:
            return CountryOutcome(country, "no_market_data", rank, note="no profile, SAM or revenue input")
        schedule = SomSchedule(0.0, ())
    if rank is None and config.discount_rate is None:
        return CountryOutcome(country, "unranked", rank, tam, sam, schedule, note="no rank and no discount_rate")
    result = valuate(schedule, rank, config)
    if not schedule.years:
        schedule = None
    return CountryOutcome(country, "ok", rank, tam, sam, schedule, result)


def _map(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def select_countries(ctx: PipelineContext, countries=None) -> tuple[str, ...]:
    chosen = tuple(countries or ctx.manifest.countries)
    if chosen:
        return tuple(sorted(set(chosen)))
    pool = set(ctx.profiles) | set(ctx.scenarios.countries)
    return tuple(sorted(pool))


@dataclass(frozen=True)
class PipelineResult:
    files: tuple[Path, ...]
    outcomes: tuple[CountryOutcome, ...]


SUMMARY_HEADER = ("country", "overall_rank", "discount_rate", "sam_usd", "nonviable", "total_present_value", "status")


def _summary_row(o: CountryOutcome) -> list:
    return [
        o.country,
        "" if o.rank is None else o.rank,
        "" if o.valuation is None else reports.rate(o.valuation.discount_rate),
        "" if o.sam is None else reports.money(o.sam.sam_usd_annual),
        "" if o.sam is None else int(o.sam.nonviable),
        "" if o.valuation is None else reports.money(o.valuation.total_present_value),
        o.status,
    ]


def run_pipeline(
    manifest: RunManifest,
    command: str = "value",
    fmt: str = "csv",
    jobs: int = 1,
    out_dir=None,
    countries=None,
) -> PipelineResult:
    if command not in STAGES:
        raise ConfigError(f"unknown command {command!r}")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    stages = STAGES[command]
    out = Path(out_dir) if out_dir is not None else manifest.output_dir
    ctx = load_context(manifest, stages)
    written = []

    def emit(name, text):
        written.append(reports.write_text(out / name, text))

    selected = tuple(countries or manifest.countries)
    if "rank" in stages:
        report = validate_dataset(ctx.dataset, manifest.min_coverage)
        emit("coverage.csv", reports.coverage_csv(report))
        if fmt == "csv":
            emit("ranking.csv", reports.ranking_csv(ctx.ranking, selected))
            emit("ranking_excluded.csv", reports.excluded_csv(ctx.ranking))
        else:
            emit("ranking.json", reports.ranking_json(ctx.ranking, selected))
        for country in report.flagged:
            log.info("%s below coverage threshold %.2f", country, manifest.min_coverage)

    outcomes = ()
    if "size" in stages:
        chosen = select_countries(ctx, countries)
        outcomes = tuple(_map(lambda c: evaluate_country(ctx, c, stages), chosen, jobs))
        for o in outcomes:
            profile = ctx.profiles.get(o.country)
            if o.sam is not None:
                if fmt == "csv":
                    emit(f"funnel_{o.country}.csv", reports.funnel_csv(profile, o.tam, o.sam, o.schedule))
                else:
                    emit(f"funnel_{o.country}.json", reports.funnel_json(profile, o.tam, o.sam, o.schedule))
            if o.schedule is not None:
                if fmt == "csv":
                    emit(f"schedule_{o.country}.csv", reports.schedule_csv(o.schedule))
                else:
                    emit(f"schedule_{o.country}.json", reports.schedule_only_json(o.schedule))
            if o.valuation is not None:
                if fmt == "csv":
                    emit(f"valuation_{o.country}.csv", reports.valuation_csv(o.valuation))
                else:
                    emit(f"valuation_{o.country}.json", reports.valuation_json(o.valuation))
        rows = [_summary_row(o) for o in outcomes]
        if fmt == "csv":
            emit("summary.csv", reports.table_csv(SUMMARY_HEADER, rows))
        else:
            emit("summary.json", reports.table_json(SUMMARY_HEADER, rows))
    return PipelineResult(tuple(written), outcomes)


@dataclass(frozen=True)
class SweepRow:
    point: tuple[float, ...]
    country: str
    status: str
    discount_rate: float | None
    total_present_value: float | None


def sensitivity_sweep(manifest: RunManifest, jobs: int = 1, countries=None) -> tuple[tuple[str, ...], list[SweepRow]]:
    """Evaluate every grid point of the manifest's sweep axes for each country."""
    if not manifest.sweep:
        raise UnknownParameter("sweep needs at least one axis")
    names = tuple(name for name, _ in manifest.sweep)
    stages = STAGES["value"]
    ctx = load_context(manifest, stages)
    chosen = select_countries(ctx, countries)
    tasks = [(point, c) for point in itertools.product(*(grid for _, grid in manifest.sweep)) for c in chosen]

    def run(task):
        point, country = task
        o = evaluate_country(ctx, country, stages, dict(zip(names, point)))
        v = o.valuation
        return SweepRow(
            point, country, o.status, None if v is None else v.discount_rate, None if v is None else v.total_present_value
        )

    rows = _map(run, tasks, jobs)
    rows.sort(key=lambda r: (r.point, r.country))
    return names, rows


def write_sweep(names, rows, out_dir, fmt="csv") -> Path:
    header = (*names, "country", "status", "discount_rate", "total_present_value")
    out = Path(out_dir)
    if fmt == "json":
        data = [
            {**dict(zip(names, r.point)), "country": r.country, "status": r.status,
             "discount_rate": r.discount_rate, "total_present_value": r.total_present_value}
            for r in rows
        ]
        return reports.write_text(out / "sweep.json", reports.json_text(data))
    table = [
        [*(repr(v) for v in r.point), r.country, r.status, "" if r.discount_rate is None else reports.rate(r.discount_rate),
         "" if r.total_present_value is None else reports.money(r.total_present_value)]
        for r in rows
    ]
    return reports.write_text(out / "sweep.csv", reports.table_csv(header, table))
