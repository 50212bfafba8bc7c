"""Pro-forma projection and discounted cash flow valuation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import GordonInvalid, NonviableRevenue
from .market import SomSchedule
from .scenario import ScenarioConfig, discount_rate_for_rank


@dataclass(frozen=True)
class ProFormaRow:
    year: int
    revenue: float
    cogs: float
    gross_profit: float
    operating_expenses: float
    operating_income: float
    taxes: float
    cash_flow: float


@dataclass(frozen=True)
class ValuationResult:
    rows: tuple[ProFormaRow, ...]
    discount_rate: float
    pv_cash_flows: tuple[float, ...]
    terminal_value: float
    pv_terminal_value: float
    total_present_value: float
    assumptions_snapshot: dict

    @property
    def mean_cash_flow(self) -> float:
        return math.fsum(r.cash_flow for r in self.rows) / len(self.rows) if self.rows else 0.0


def project_revenue(schedule: SomSchedule, config: ScenarioConfig) -> list[tuple[int, float]]:
    """Revenue per year as a growing slice of that year's obtainable market.

    Year ``t`` (1-based) takes ``initial_revenue_fraction + (t-1) * step`` of
    obtainable, the step being in absolute fraction points; capped at 1.
    """
    out = []
    for t, year in enumerate(schedule.years):
        fraction = min(1.0, config.initial_revenue_fraction + config.revenue_fraction_step * t)
        out.append((year.year, fraction * year.obtainable_usd))
    return out


def build_pro_forma(revenues: Sequence[tuple[int, float]], config: ScenarioConfig) -> list[ProFormaRow]:
    rows = []
    for year, revenue in revenues:
        if revenue < 0:
            raise NonviableRevenue(f"revenue {revenue} in {year} is negative; the market is not viable")
        cogs = config.cogs_ratio * revenue
        gross = revenue - cogs
        opex = config.opex_ratio_of_gross * gross
        operating = gross - opex
        taxes = max(0.0, config.tax_rate * operating)
        rows.append(ProFormaRow(year, revenue, cogs, gross, opex, operating, taxes, operating - taxes))
    return rows


def discount_cash_flows(cash_flows: Sequence[float], rate: float) -> list[float]:
    """End-of-year discounting; the first flow is discounted one full period."""
    if not rate > -1.0:
        raise ValueError(f"discount rate {rate} must be > -1")
    return [cf / (1.0 + rate) ** t for t, cf in enumerate(cash_flows, start=1)]


def terminal_value(last_cash_flow: float, rate: float, terminal_growth: float) -> float:
    """Gordon growth value of the flows after the last projected year."""
    if rate <= terminal_growth:
        raise GordonInvalid(f"discount rate {rate} must exceed terminal growth {terminal_growth}")
    return last_cash_flow * (1.0 + terminal_growth) / (rate - terminal_growth)


def implied_terminal_growth(last_cash_flow: float, rate: float, tv: float) -> float:
    """Growth rate at which the Gordon formula returns ``tv``."""
    return (tv * rate - last_cash_flow) / (tv + last_cash_flow)


def resolve_discount_rate(rank: int | None, config: ScenarioConfig) -> float:
    if config.discount_rate is not None:
        return config.discount_rate
    if rank is None:
        raise ValueError("a rank is required when the scenario sets no discount_rate")
    return discount_rate_for_rank(rank, config.discount_tier_table)


def valuate_revenues(
    revenues: Sequence[tuple[int, float]],
    rank: int | None,
    config: ScenarioConfig,
    tv_override: float | None = None,
) -> ValuationResult:
    rate = resolve_discount_rate(rank, config)
    rows = build_pro_forma(revenues, config)
    pvs = discount_cash_flows([r.cash_flow for r in rows], rate)
    if tv_override is None:
        tv_override = config.tv_override
    if tv_override is not None:
        tv = float(tv_override)
    elif rows:
        tv = terminal_value(rows[-1].cash_flow, rate, config.terminal_growth)
    else:
        tv = 0.0
    pv_tv = tv / (1.0 + rate) ** len(rows)
    snapshot = config.snapshot()
    snapshot["rank"] = rank
    snapshot["tv_source"] = "override" if tv_override is not None else "gordon"
    return ValuationResult(
        rows=tuple(rows),
        discount_rate=rate,
        pv_cash_flows=tuple(pvs),
        terminal_value=tv,
        pv_terminal_value=pv_tv,
        total_present_value=math.fsum(pvs + [pv_tv]),
        assumptions_snapshot=snapshot,
    )


def valuate(
    schedule: SomSchedule,
    rank: int | None,
    config: ScenarioConfig,
    tv_override: float | None = None,
) -> ValuationResult:
    """Project revenue from ``schedule`` and value it at the rank's discount rate.

    ``config.revenue_override``, when set, replaces the projected revenues
    (years still come from the schedule, or from ``config.start_year``).
    """
    if config.revenue_override is not None:
        years = [y.year for y in schedule.years] or [config.start_year + t for t in range(config.horizon_years)]
        revenues = list(zip(years, config.revenue_override))
    else:
        revenues = project_revenue(schedule, config)
    return valuate_revenues(revenues, rank, config, tv_override)
