"""CSV and JSON report emission with fixed, deterministic number formatting."""

from __future__ import annotations

import csv
import io
import json
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path

from .dcf import ValuationResult
from .market import SamBreakdown, SomSchedule, TamBreakdown
from .ranking import RankingTable

RANKING_HEADER = (
    "country",
    "infra_score",
    "edu_score",
    "econ_score",
    "infra_rank",
    "edu_rank",
    "econ_rank",
    "overall_score",
    "overall_rank",
    "discount_rate",
)
FUNNEL_HEADER = ("stage", "quantity", "local_value", "usd_value", "flag")
SCHEDULE_HEADER = ("year", "capture_rate", "obtainable_usd")
VALUATION_HEADER = (
    "year",
    "revenue",
    "cogs",
    "gross_profit",
    "opex",
    "operating_income",
    "taxes",
    "cash_flow",
    "pv_cash_flow",
)
VALUATION_SUMMARY_HEADER = ("discount_rate", "terminal_value", "pv_terminal_value", "total_present_value")


def fixed(value: float | None, places: int = 2) -> str:
    """Round-half-even on the exact binary value; ``None`` becomes an empty cell."""
    if value is None:
        return ""
    q = Decimal(value).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN)
    if q == 0:
        q = abs(q)
    return f"{q:f}"


def money(value):
    return fixed(value, 2)


def rate(value):
    return fixed(value, 4)


def score(value):
    return fixed(value, 6)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def json_text(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def ranking_csv(table: RankingTable, countries=None) -> str:
    rows = []
    for r in table.rows:
        if countries and r.country not in countries:
            continue
        rows.append(
            [r.country, *(score(s) for s in r.pillar_scores), *r.pillar_ranks, score(r.overall_score), r.overall_rank]
            + [rate(r.discount_rate) if r.discount_rate is not None else "NA"]
        )
    return _csv_text(RANKING_HEADER, rows)


def excluded_csv(table: RankingTable) -> str:
    return _csv_text(("country", "reason"), [list(e) for e in table.excluded])


def ranking_json(table: RankingTable, countries=None) -> str:
    rows = [
        {
            "country": r.country,
            "infra_score": r.pillar_scores[0],
            "edu_score": r.pillar_scores[1],
            "econ_score": r.pillar_scores[2],
            "infra_rank": r.pillar_ranks[0],
            "edu_rank": r.pillar_ranks[1],
            "econ_rank": r.pillar_ranks[2],
            "overall_score": r.overall_score,
            "overall_rank": r.overall_rank,
            "discount_rate": r.discount_rate,
        }
        for r in table.rows
        if not countries or r.country in countries
    ]
    excluded = [{"country": c, "reason": why} for c, why in table.excluded]
    return json_text({"rows": rows, "excluded": excluded})


def coverage_csv(report) -> str:
    from .dataset import PILLAR_ORDER

    rows = [
        [c.country, c.present, c.total, rate(c.coverage), *(rate(c.by_pillar[p]) for p in PILLAR_ORDER), int(c.flagged)]
        for c in report.countries
    ]
    header = ("country", "present", "total", "coverage", "infra_coverage", "edu_coverage", "econ_coverage", "flagged")
    return _csv_text(header, rows)


def funnel_rows(profile, tam: TamBreakdown, sam: SamBreakdown, schedule: SomSchedule | None):
    flag = "nonviable" if sam.nonviable else ""
    rows = [
        ["population_total", money(profile.population_total), "", "", ""],
        ["population_over_14", money(tam.population_over_14), "", "", ""],
        ["urban_population", money(tam.urban_population), "", "", ""],
        ["rural_population", money(tam.rural_population), "", "", ""],
        ["tam", money(tam.population_over_14), money(tam.tam_local_annual), money(tam.tam_usd_annual), ""],
    ]
    for label, persons in sam.exclusion_ledger:
        rows.append([f"exclusion:{label}", money(persons), "", "", ""])
    rows.append(["eligible_population", money(sam.eligible_population), "", "", flag])
    rows.append(["prorated_basket_monthly", "", money(sam.prorated_basket_monthly), "", ""])
    rows.append(
        ["sam", money(sam.eligible_population), money(sam.sam_local_annual), money(sam.sam_usd_annual), flag]
    )
    if schedule is not None:
        rows.append(["som_base", "", "", money(schedule.som_base_usd), flag])
    return rows


def funnel_csv(profile, tam, sam, schedule) -> str:
    return _csv_text(FUNNEL_HEADER, funnel_rows(profile, tam, sam, schedule))


def schedule_csv(schedule: SomSchedule) -> str:
    return _csv_text(SCHEDULE_HEADER, [[y.year, rate(y.capture_rate), money(y.obtainable_usd)] for y in schedule.years])


def funnel_json(profile, tam, sam, schedule) -> str:
    data = {
        "country": profile.country,
        "currency_code": profile.currency_code,
        "fx_to_usd": profile.fx_to_usd,
        "tam": {
            "population_total": profile.population_total,
            "population_over_14": tam.population_over_14,
            "urban_population": tam.urban_population,
            "rural_population": tam.rural_population,
            "tam_local_annual": tam.tam_local_annual,
            "tam_usd_annual": tam.tam_usd_annual,
        },
        "sam": {
            "eligible_population": sam.eligible_population,
            "prorated_basket_monthly": sam.prorated_basket_monthly,
            "sam_local_annual": sam.sam_local_annual,
            "sam_usd_annual": sam.sam_usd_annual,
            "nonviable": sam.nonviable,
            "exclusions": [{"label": l, "persons": p} for l, p in sam.exclusion_ledger],
        },
        "som": None
        if schedule is None
        else {
            "som_base_usd": schedule.som_base_usd,
            "years": [
                {"year": y.year, "capture_rate": y.capture_rate, "obtainable_usd": y.obtainable_usd}
                for y in schedule.years
            ],
        },
    }
    return json_text(data)


def schedule_only_json(schedule: SomSchedule) -> str:
    return json_text(
        {
            "som_base_usd": schedule.som_base_usd,
            "years": [
                {"year": y.year, "capture_rate": y.capture_rate, "obtainable_usd": y.obtainable_usd}
                for y in schedule.years
            ],
        }
    )


def valuation_csv(result: ValuationResult) -> str:
    rows = [
        [
            r.year,
            money(r.revenue),
            money(r.cogs),
            money(r.gross_profit),
            money(r.operating_expenses),
            money(r.operating_income),
            money(r.taxes),
            money(r.cash_flow),
            money(pv),
        ]
        for r, pv in zip(result.rows, result.pv_cash_flows)
    ]
    table = _csv_text(VALUATION_HEADER, rows)
    summary = _csv_text(
        VALUATION_SUMMARY_HEADER,
        [
            [
                rate(result.discount_rate),
                money(result.terminal_value),
                money(result.pv_terminal_value),
                money(result.total_present_value),
            ]
        ],
    )
    return table + "\n" + summary


def valuation_json(result: ValuationResult) -> str:
    data = {
        "rows": [
            {
                "year": r.year,
                "revenue": r.revenue,
                "cogs": r.cogs,
                "gross_profit": r.gross_profit,
                "opex": r.operating_expenses,
                "operating_income": r.operating_income,
                "taxes": r.taxes,
                "cash_flow": r.cash_flow,
                "pv_cash_flow": pv,
            }
            for r, pv in zip(result.rows, result.pv_cash_flows)
        ],
        "discount_rate": result.discount_rate,
        "terminal_value": result.terminal_value,
        "pv_terminal_value": result.pv_terminal_value,
        "total_present_value": result.total_present_value,
        "assumptions_snapshot": result.assumptions_snapshot,
    }
    return json_text(data)


def table_csv(header, rows) -> str:
    return _csv_text(header, rows)


def table_json(header, rows) -> str:
    return json_text([dict(zip(header, row)) for row in rows])
