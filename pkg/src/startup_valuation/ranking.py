"""Z-score normalization, pillar scores and the overall country ranking.

Means and variances are accumulated as exact rationals. A z-value is then a
function of the exact ratio ``(x - mu)**2 / var`` alone, so any positive
affine map of a series that is itself exact in binary floating point leaves
every z-value bit-identical, and row order never matters.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .dataset import (
    NA,
    PILLAR_ORDER,
    IndicatorDataset,
    IndicatorDefinition,
    Pillar,
    Polarity,
    Value,
    country_code,
    is_na,
)
from .errors import AllMissing, IoError, MalformedRow, NoDataForPillar, RankOutOfRange
from .scenario import DEFAULT_TIER_TABLE, discount_rate_for_rank


@dataclass(frozen=True)
class ZScores:
    values: tuple[Value, ...]
    mu: float
    sigma: float
    degenerate: bool


def zscore_normalize(series: Sequence[Value]) -> ZScores:
    """Standardize ``series`` over its non-NA entries using population sigma.

    NA positions stay NA. A constant series yields all zeros with
    ``degenerate`` set.
    """
    present = [Fraction(x) for x in series if not is_na(x)]
    if not present:
        raise AllMissing("series has no non-NA values")
    n = len(present)
    mu = sum(present, Fraction(0)) / n
    var = sum(((x - mu) ** 2 for x in present), Fraction(0)) / n
    sigma = math.sqrt(var)
    degenerate = var == 0
    out = []
    for x in series:
        if is_na(x):
            out.append(NA)
        elif degenerate:
            out.append(0.0)
        else:
            d = Fraction(x) - mu
            out.append(math.copysign(math.sqrt(d * d / var), d) if d else 0.0)
    return ZScores(tuple(out), float(mu), sigma, degenerate)


@dataclass(frozen=True)
class NormalizedMatrix:
    countries: tuple[str, ...]
    indicators: tuple[str, ...]
    z: Mapping[str, tuple[Value, ...]]
    mu: Mapping[str, float]
    sigma: Mapping[str, float]
    degenerate: Mapping[str, bool]

    def value(self, country: str, indicator_id: str) -> Value:
        return self.z[indicator_id][self.countries.index(country)]


def normalize_dataset(dataset: IndicatorDataset) -> NormalizedMatrix:
    """Z-normalize every indicator that has at least one observation.

    Indicators with no values at all are dropped from the matrix.
    """
    countries = dataset.countries
    z, mu, sigma, degenerate = {}, {}, {}, {}
    kept = []
    for d in dataset.definitions:
        series = dataset.series(d.id, countries)
        if all(is_na(v) for v in series):
            continue
        res = zscore_normalize(series)
        kept.append(d.id)
        z[d.id] = res.values
        mu[d.id] = res.mu
        sigma[d.id] = res.sigma
        degenerate[d.id] = res.degenerate
    return NormalizedMatrix(countries, tuple(kept), z, mu, sigma, degenerate)


@dataclass(frozen=True)
class PillarScore:
    country: str
    pillar: Pillar
    score: float
    indicators_used: int


def pillar_score(
    matrix: NormalizedMatrix,
    definitions: Iterable[IndicatorDefinition],
    country: str,
    pillar: Pillar,
    weights: Mapping[str, float] | None = None,
) -> PillarScore:
    """Weighted mean of the country's polarity-adjusted z-values in one pillar."""
    signed = []
    used_weights = []
    for d in definitions:
        if d.pillar is not pillar or d.id not in matrix.z:
            continue
        z = matrix.value(country, d.id)
        if is_na(z):
            continue
        if d.polarity is Polarity.LOWER_IS_BETTER:
            z = -z
        w = 1.0 if weights is None else float(weights.get(d.id, 1.0))
        signed.append(w * z)
        used_weights.append(w)
    if not signed:
        raise NoDataForPillar(f"{country} has no data in pillar {pillar.value}")
    return PillarScore(country, pillar, math.fsum(signed) / math.fsum(used_weights), len(signed))


@dataclass(frozen=True)
class RankingRow:
    country: str
    pillar_scores: tuple[float, float, float]
    pillar_ranks: tuple[int, int, int]
    overall_score: float
    overall_rank: int
    discount_rate: float | None

    @property
    def infra_score(self) -> float:
        return self.pillar_scores[0]

    @property
    def edu_score(self) -> float:
        return self.pillar_scores[1]

    @property
    def econ_score(self) -> float:
        return self.pillar_scores[2]


@dataclass(frozen=True)
class RankingTable:
    rows: tuple[RankingRow, ...]
    excluded: tuple[tuple[str, str], ...] = ()

    def row(self, country: str) -> RankingRow:
        for r in self.rows:
            if r.country == country:
                return r
        raise KeyError(country)

    def ranks(self) -> dict[str, int]:
        return {r.country: r.overall_rank for r in self.rows}


def _rank_positions(keys: dict[str, tuple]) -> dict[str, int]:
    ordered = sorted(keys, key=lambda c: keys[c])
    return {c: i + 1 for i, c in enumerate(ordered)}


def overall_rank(pillar_scores: Iterable[PillarScore], tier_table=DEFAULT_TIER_TABLE) -> RankingTable:
    """Combine pillar scores into the ranking table.

    Overall score is the unweighted mean of the three pillar scores. Ties fall
    back to Infrastructure, then Education, then Economic score, then ISO code.
    Countries missing a pillar are listed in ``excluded`` instead of ranked.
    """
    by_country: dict[str, dict[Pillar, float]] = {}
    for ps in pillar_scores:
        by_country.setdefault(ps.country, {})[ps.pillar] = ps.score
    complete = {}
    excluded = []
    for country in sorted(by_country):
        scores = by_country[country]
        missing = [p.value for p in PILLAR_ORDER if p not in scores]
        if missing:
            excluded.append((country, "missing pillar: " + "/".join(missing)))
        else:
            complete[country] = tuple(scores[p] for p in PILLAR_ORDER)

    pillar_ranks = [
        _rank_positions({c: (-s[i], c) for c, s in complete.items()}) for i in range(len(PILLAR_ORDER))
    ]
    overall = {c: math.fsum(s) / len(s) for c, s in complete.items()}
    positions = _rank_positions({c: (-overall[c], -s[0], -s[1], -s[2], c) for c, s in complete.items()})

    rows = []
    for country in sorted(complete, key=positions.__getitem__):
        rank = positions[country]
        try:
            rate = discount_rate_for_rank(rank, tier_table)
        except RankOutOfRange:
            rate = None
        rows.append(
            RankingRow(
                country=country,
                pillar_scores=complete[country],
                pillar_ranks=tuple(pr[country] for pr in pillar_ranks),
                overall_score=overall[country],
                overall_rank=rank,
                discount_rate=rate,
            )
        )
    return RankingTable(tuple(rows), tuple(excluded))


def rank_dataset(
    dataset: IndicatorDataset,
    tier_table=DEFAULT_TIER_TABLE,
    weights: Mapping[str, float] | None = None,
) -> RankingTable:
    """Normalize, score every pillar and rank all countries in ``dataset``."""
    matrix = normalize_dataset(dataset)
    scores = []
    no_data = []
    for country in matrix.countries:
        for pillar in PILLAR_ORDER:
            try:
                scores.append(pillar_score(matrix, dataset.definitions, country, pillar, weights))
            except NoDataForPillar:
                no_data.append(country)
    table = overall_rank(scores, tier_table)
    # countries with no pillar data at all never reach overall_rank
    seen = {r.country for r in table.rows} | {c for c, _ in table.excluded}
    extra = tuple((c, "missing pillar: all") for c in sorted(set(no_data) - seen))
    if extra:
        table = RankingTable(table.rows, tuple(sorted(table.excluded + extra)))
    return table


@dataclass(frozen=True)
class ReferenceRank:
    country: str
    infra_rank: int
    edu_rank: int
    econ_rank: int
    overall_rank: int


REFERENCE_HEADER = ("country_name", "country", "infra_rank", "edu_rank", "econ_rank", "overall_rank")


def load_reference_ranking(path) -> dict[str, ReferenceRank]:
    """Read a published ranking (``country_name,country,infra_rank,...``) keyed by ISO code."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(path, exc) from exc
    reader = csv.DictReader(text.splitlines())
    if tuple(reader.fieldnames or ()) != REFERENCE_HEADER:
        raise MalformedRow(path, 1, "", f"expected header {','.join(REFERENCE_HEADER)}")
    out = {}
    for row in reader:
        try:
            code = country_code(row["country"] or row["country_name"])
            out[code] = ReferenceRank(
                code, int(row["infra_rank"]), int(row["edu_rank"]), int(row["econ_rank"]), int(row["overall_rank"])
            )
        except (TypeError, ValueError) as exc:
            raise MalformedRow(path, reader.line_num, "", str(exc)) from None
    return out
