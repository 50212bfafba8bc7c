"""TAM -> SAM -> SOM funnel for one country and industry."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dataset import CountryProfile
from .scenario import ScenarioConfig

MONTHS = 12


@dataclass(frozen=True)
class TamBreakdown:
    population_over_14: float
    urban_population: float
    rural_population: float
    tam_local_annual: float
    tam_usd_annual: float


@dataclass(frozen=True)
class SamBreakdown:
    eligible_population: float
    prorated_basket_monthly: float
    sam_local_annual: float
    sam_usd_annual: float
    nonviable: bool
    exclusion_ledger: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class SomYear:
    year: int
    obtainable_usd: float
    capture_rate: float


@dataclass(frozen=True)
class SomSchedule:
    som_base_usd: float
    years: tuple[SomYear, ...]

    @property
    def obtainable(self) -> list[float]:
        return [y.obtainable_usd for y in self.years]


def compute_tam(profile: CountryProfile) -> TamBreakdown:
    over_14 = profile.population_total * (1.0 - profile.share_under_14)
    urban = over_14 * profile.urban_share
    rural = over_14 * profile.rural_share
    local = MONTHS * (urban * profile.basket_urban_monthly + rural * profile.basket_rural_monthly)
    return TamBreakdown(over_14, urban, rural, local, local / profile.fx_to_usd)


def exclusion_ledger(profile: CountryProfile) -> tuple[tuple[str, float], ...]:
    """Every population group removed from the SAM base, in persons.

    Groups are subtracted independently; overlaps (e.g. a person both blind
    and offline) are deliberately counted twice.
    """
    P = profile.population_total
    ledger = list(profile.excluded_counts)
    ledger.extend((label, share * P) for label, share in profile.excluded_shares)
    ledger.append(("Population > 64", profile.share_over_64 * P))
    ledger.append(("Population < 14", profile.share_under_14 * P))
    return tuple(ledger)


def compute_sam(profile: CountryProfile, tam: TamBreakdown | None = None) -> SamBreakdown:
    """Serviceable market: total population minus exclusions, priced at the prorated basket.

    A non-positive eligible population is kept as is and flagged nonviable.
    ``tam`` is accepted for call symmetry; the SAM base is the total
    population, not the over-14 TAM base.
    """
    ledger = exclusion_ledger(profile)
    eligible = math.fsum([profile.population_total] + [-persons for _, persons in ledger])
    basket = profile.urban_share * profile.basket_urban_monthly + profile.rural_share * profile.basket_rural_monthly
    local = eligible * basket * MONTHS
    return SamBreakdown(
        eligible_population=eligible,
        prorated_basket_monthly=basket,
        sam_local_annual=local,
        sam_usd_annual=local / profile.fx_to_usd,
        nonviable=eligible <= 0,
        exclusion_ledger=ledger,
    )


def compute_som_schedule(sam_usd: float, config: ScenarioConfig, start_year: int | None = None) -> SomSchedule:
    """SOM base (SAM x market share) and its yearly capture schedule.

    The capture rate starts at ``initial_capture_rate`` and compounds by
    ``capture_escalation`` each year; each year's obtainable value is the
    fixed base times that year's rate.
    """
    start = config.start_year if start_year is None else start_year
    base = sam_usd * config.market_share
    rate = config.initial_capture_rate
    growth = 1.0 + config.capture_escalation
    years = []
    for t in range(config.horizon_years):
        if t:
            rate *= growth
        years.append(SomYear(start + t, base * rate, rate))
    return SomSchedule(base, tuple(years))
