"""Builders shared by several test modules."""

from startup_valuation.dataset import (
    CountryObservation,
    CountryProfile,
    IndicatorDataset,
    IndicatorDefinition,
    Polarity,
)

MEXICO = dict(
    country="MX",
    population_total=126_705_138.0,
    share_under_14=0.2495,
    share_over_64=0.0813,
    urban_share=0.79,
    rural_share=0.21,
    basket_urban_monthly=1644.0,
    basket_rural_monthly=2144.0,
    currency_code="MXN",
    fx_to_usd=18.65589,
    excluded_counts=(("Blind population", 415_800.0), ("Extreme poverty", 10_900_000.0)),
    excluded_shares=(("Population without internet connection", 0.315),),
)

BRAZIL_REVENUES = [1_666_519.87, 1_979_825.60, 2_332_594.53, 2_729_135.60, 3_400_922.82]
# reference pro-forma columns, Brazil, 2025-2029
BRAZIL_TABLE = {
    "cogs": [416_629.97, 494_956.40, 583_148.63, 682_283.90, 850_230.71],
    "gross_profit": [1_249_889.90, 1_484_869.20, 1_749_445.90, 2_046_851.70, 2_550_692.12],
    "operating_expenses": [374_966.97, 445_460.76, 524_833.77, 614_055.51, 765_207.64],
    "operating_income": [874_922.93, 1_039_408.44, 1_224_612.13, 1_432_796.19, 1_785_484.48],
    "taxes": [262_476.88, 311_822.53, 367_383.64, 429_838.86, 535_645.34],
    "cash_flow": [612_446.05, 727_585.91, 857_228.49, 1_002_957.33, 1_249_839.14],
}
BRAZIL_PV = [453_663.74, 399_224.09, 348_413.75, 301_958.59, 278_731.00]
BRAZIL_TV = 3_387_721.87
TABLE_VII = [18_887_886.08, 20_776_674.69, 22_854_342.16, 25_139_776.37, 27_653_754.01]
TABLE_VII_SOM = 3_777_577_216.14


def mexico_profile(**changes) -> CountryProfile:
    data = dict(MEXICO)
    data.update(changes)
    return CountryProfile(**data)


def rel(a, b):
    return abs(a - b) / abs(b)


def make_dataset(table, polarity=None):
    """``table`` maps (pillar, indicator_id) -> {country: value}."""
    polarity = polarity or {}
    defs = tuple(
        IndicatorDefinition(ind, pillar, "element", ind, "", polarity.get(ind, Polarity.HIGHER_IS_BETTER), "src")
        for pillar, ind in table
    )
    obs = tuple(
        CountryObservation(c, ind, v, 2023) for (pillar, ind), values in table.items() for c, v in values.items()
    )
    return IndicatorDataset(defs, obs)

