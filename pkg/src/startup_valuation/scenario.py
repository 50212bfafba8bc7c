"""Scenario assumptions and the rank-to-discount-rate tier table."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .dataset import country_code
from .errors import ConfigError, IoError, RankOutOfRange, UnknownParameter


@dataclass(frozen=True)
class DiscountTier:
    rank_lo: int
    rank_hi: int
    rate: float


DEFAULT_TIER_TABLE: tuple[DiscountTier, ...] = (
    DiscountTier(1, 3, 0.35),
    DiscountTier(4, 6, 0.38),
    DiscountTier(7, 10, 0.40),
    DiscountTier(11, 13, 0.42),
    DiscountTier(14, 16, 0.45),
    DiscountTier(17, 19, 0.50),
)


def validate_tier_table(tiers) -> tuple[DiscountTier, ...]:
    """Check that the tiers cover ``1..N`` contiguously with no overlap."""
    tiers = tuple(tiers)
    if not tiers:
        raise ConfigError("tier table is empty")
    expected = 1
    for tier in tiers:
        if tier.rank_lo != expected or tier.rank_hi < tier.rank_lo:
            raise ConfigError(f"tier {tier.rank_lo}-{tier.rank_hi} breaks contiguous coverage starting at {expected}")
        if not (math.isfinite(tier.rate) and tier.rate > -1.0):
            raise ConfigError(f"tier {tier.rank_lo}-{tier.rank_hi} has invalid rate {tier.rate}")
        expected = tier.rank_hi + 1
    return tiers


def tier_table_from_list(raw) -> tuple[DiscountTier, ...]:
    try:
        tiers = [DiscountTier(int(t["rank_lo"]), int(t["rank_hi"]), float(t["rate"])) for t in raw]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad tier table entry: {exc}") from None
    return validate_tier_table(tiers)


def max_rank(tiers) -> int:
    return tiers[-1].rank_hi


def discount_rate_for_rank(rank: int, tiers=DEFAULT_TIER_TABLE) -> float:
    for tier in tiers:
        if tier.rank_lo <= rank <= tier.rank_hi:
            return tier.rate
    raise RankOutOfRange(f"rank {rank} is outside the tier table (1..{max_rank(tiers)})")


_RATIO_FIELDS = (
    "market_share",
    "initial_capture_rate",
    "capture_escalation",
    "initial_revenue_fraction",
    "revenue_fraction_step",
    "cogs_ratio",
    "opex_ratio_of_gross",
    "tax_rate",
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Assumptions for one country's sizing and valuation run.

    The last five fields are optional replication channels: ``discount_rate``
    bypasses the tier table, ``tv_override`` replaces the Gordon terminal
    value, ``sam_usd_override`` feeds a published SAM into the SOM step and
    ``revenue_override`` feeds published revenues straight into the pro-forma.
    """

    country: str = ""
    market_share: float = 0.10
    initial_capture_rate: float = 0.005
    capture_escalation: float = 0.10
    horizon_years: int = 5
    initial_revenue_fraction: float = 0.10
    revenue_fraction_step: float = 0.01
    cogs_ratio: float = 0.25
    opex_ratio_of_gross: float = 0.30
    tax_rate: float = 0.30
    terminal_growth: float = 0.0
    discount_tier_table: tuple[DiscountTier, ...] = DEFAULT_TIER_TABLE
    start_year: int = 2025
    discount_rate: float | None = None
    tv_override: float | None = None
    sam_usd_override: float | None = None
    revenue_override: tuple[float, ...] | None = None

    def __post_init__(self):
        for name in _RATIO_FIELDS:
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
                raise ConfigError(f"{name}={value!r} must be a fraction in [0, 1]")
        if not isinstance(self.horizon_years, int) or self.horizon_years < 1:
            raise ConfigError(f"horizon_years={self.horizon_years!r} must be an integer >= 1")
        validate_tier_table(self.discount_tier_table)
        rates = [t.rate for t in self.discount_tier_table]
        if self.discount_rate is not None:
            if not self.discount_rate > -1.0:
                raise ConfigError(f"discount_rate={self.discount_rate} must be > -1")
            rates.append(self.discount_rate)
        if not math.isfinite(self.terminal_growth):
            raise ConfigError("terminal_growth must be finite")
        if self.tv_override is None and any(self.terminal_growth >= r for r in rates):
            raise ConfigError(
                f"terminal_growth={self.terminal_growth} must be below every discount rate ({min(rates)})"
            )
        if self.revenue_override is not None and len(self.revenue_override) != self.horizon_years:
            raise ConfigError(
                f"revenue_override has {len(self.revenue_override)} entries, horizon_years is {self.horizon_years}"
            )

    def snapshot(self) -> dict:
        data = asdict(self)
        data["discount_tier_table"] = [asdict(t) for t in self.discount_tier_table]
        if self.revenue_override is not None:
            data["revenue_override"] = list(self.revenue_override)
        data["negative_tax_rule"] = "taxes floored at 0 when operating income is negative"
        return data


CONFIG_FIELDS = tuple(f.name for f in fields(ScenarioConfig))
SWEEPABLE_FIELDS = tuple(
    name for name in CONFIG_FIELDS if name not in ("country", "discount_tier_table", "revenue_override")
)


def config_from_dict(data: dict) -> ScenarioConfig:
    unknown = sorted(set(data) - set(CONFIG_FIELDS))
    if unknown:
        raise UnknownParameter(f"unknown scenario field(s): {', '.join(unknown)}")
    kwargs = dict(data)
    if "discount_tier_table" in kwargs:
        kwargs["discount_tier_table"] = tier_table_from_list(kwargs["discount_tier_table"])
    if kwargs.get("revenue_override") is not None:
        kwargs["revenue_override"] = tuple(float(v) for v in kwargs["revenue_override"])
    for name in ("horizon_years", "start_year"):
        if name in kwargs and isinstance(kwargs[name], float) and kwargs[name].is_integer():
            kwargs[name] = int(kwargs[name])
    return ScenarioConfig(**kwargs)


def with_overrides(config: ScenarioConfig, overrides: dict) -> ScenarioConfig:
    unknown = sorted(set(overrides) - set(SWEEPABLE_FIELDS))
    if unknown:
        raise UnknownParameter(f"cannot override: {', '.join(unknown)}")
    values = dict(overrides)
    for name in ("horizon_years", "start_year"):
        if name in values and isinstance(values[name], float) and values[name].is_integer():
            values[name] = int(values[name])
    return replace(config, **values)


@dataclass(frozen=True)
class ScenarioSet:
    """Shared defaults plus per-country overrides, as stored in ``scenario.json``."""

    defaults: dict = field(default_factory=dict)
    countries: dict = field(default_factory=dict)

    def for_country(self, country: str) -> ScenarioConfig:
        merged = dict(self.defaults)
        merged.update(self.countries.get(country, {}))
        merged["country"] = country
        return config_from_dict(merged)


def load_scenarios(path) -> ScenarioSet:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(path, exc) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    unknown = sorted(set(data) - {"defaults", "countries"})
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(unknown)}")
    countries = {country_code(k): dict(v) for k, v in (data.get("countries") or {}).items()}
    scenarios = ScenarioSet(dict(data.get("defaults") or {}), countries)
    # fail early on bad defaults
    scenarios.for_country("XX")
    for code in countries:
        scenarios.for_country(code)
    return scenarios
