"""Indicator catalog, country observations and country profiles.

Indicator data lives in two CSV files::

    indicators.csv    indicator_id,pillar,element,label,unit,polarity,source_label
    observations.csv  country,indicator_id,value,reference_year

Missing observations are the literal token ``NA`` (or an empty cell) and are
parsed into the :data:`NA` sentinel, which refuses to take part in arithmetic.
Country profiles are JSON documents, one per country.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

from .errors import (
    DuplicateDefinition,
    DuplicateObservation,
    IoError,
    MalformedRow,
    MissingField,
    RangeViolation,
    UnknownIndicator,
)

INDICATOR_HEADER = ("indicator_id", "pillar", "element", "label", "unit", "polarity", "source_label")
OBSERVATION_HEADER = ("country", "indicator_id", "value", "reference_year")

SHARE_TOLERANCE = 1e-9


class _NAType:
    """Explicit missing-value marker. Any arithmetic or ordering on it raises."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NA"

    def __bool__(self) -> bool:
        raise TypeError("NA has no truth value")

    def __reduce__(self):
        return (_NAType, ())

    def _refuse(self, *_args):
        raise TypeError("NA cannot participate in arithmetic")

    __add__ = __radd__ = __sub__ = __rsub__ = _refuse
    __mul__ = __rmul__ = __truediv__ = __rtruediv__ = _refuse
    __pow__ = __rpow__ = __neg__ = __pos__ = __abs__ = _refuse
    __float__ = __int__ = _refuse
    __lt__ = __le__ = __gt__ = __ge__ = _refuse


NA = _NAType()
Value = Union[float, _NAType]


def is_na(value) -> bool:
    return value is NA


class Pillar(str, enum.Enum):
    INFRASTRUCTURE = "Infrastructure"
    EDUCATION_RESEARCH = "EducationResearch"
    ECONOMIC = "Economic"


PILLAR_ORDER = (Pillar.INFRASTRUCTURE, Pillar.EDUCATION_RESEARCH, Pillar.ECONOMIC)


class Polarity(str, enum.Enum):
    HIGHER_IS_BETTER = "HigherIsBetter"
    LOWER_IS_BETTER = "LowerIsBetter"


# Case-study countries; lower-cased display name -> ISO-3166 alpha-2.
COUNTRY_ALIASES = {
    "brazil": "BR",
    "mexico": "MX",
    "méxico": "MX",
    "chile": "CL",
    "argentina": "AR",
    "colombia": "CO",
    "uruguay": "UY",
    "costa rica": "CR",
    "panama": "PA",
    "panamá": "PA",
    "dominican republic": "DO",
    "ecuador": "EC",
    "peru": "PE",
    "venezuela": "VE",
    "cuba": "CU",
    "honduras": "HN",
    "el salvador": "SV",
    "paraguay": "PY",
    "guatemala": "GT",
    "bolivia": "BO",
    "nicaragua": "NI",
}


def country_code(name_or_code: str) -> str:
    """Resolve a country name or ISO code to an upper-case alpha-2 code."""
    text = name_or_code.strip()
    alias = COUNTRY_ALIASES.get(text.lower())
    if alias:
        return alias
    if len(text) == 2 and text.isalpha():
        return text.upper()
    raise ValueError(f"unknown country {name_or_code!r}")


@dataclass(frozen=True)
class IndicatorDefinition:
    id: str
    pillar: Pillar
    element: str
    label: str
    unit: str = ""
    polarity: Polarity = Polarity.HIGHER_IS_BETTER
    source_label: str = ""


@dataclass(frozen=True)
class CountryObservation:
    country: str
    indicator_id: str
    value: Value
    reference_year: int | None = None


@dataclass(frozen=True)
class IndicatorDataset:
    definitions: tuple[IndicatorDefinition, ...]
    observations: tuple[CountryObservation, ...]

    def __post_init__(self):
        seen = set()
        for d in self.definitions:
            if d.id in seen:
                raise DuplicateDefinition(f"indicator {d.id!r} defined twice")
            seen.add(d.id)
        keys = set()
        for obs in self.observations:
            if obs.indicator_id not in seen:
                raise UnknownIndicator(f"observation for {obs.country} references undeclared indicator {obs.indicator_id!r}")
            key = (obs.country, obs.indicator_id)
            if key in keys:
                raise DuplicateObservation(f"more than one observation for {key}")
            keys.add(key)
            if not is_na(obs.value) and not math.isfinite(obs.value):
                raise RangeViolation(f"non-finite value for {key}")

    @property
    def countries(self) -> tuple[str, ...]:
        return tuple(sorted({o.country for o in self.observations}))

    def definition(self, indicator_id: str) -> IndicatorDefinition:
        for d in self.definitions:
            if d.id == indicator_id:
                return d
        raise UnknownIndicator(indicator_id)

    def value(self, country: str, indicator_id: str) -> Value:
        """Observed value, or NA when the cell is NA or the row is absent."""
        return self._lookup().get((country, indicator_id), NA)

    def _lookup(self) -> dict:
        cache = self.__dict__.get("_cache")
        if cache is None:
            cache = {(o.country, o.indicator_id): o.value for o in self.observations}
            object.__setattr__(self, "_cache", cache)
        return cache

    def series(self, indicator_id: str, countries: Iterable[str] | None = None) -> list[Value]:
        countries = self.countries if countries is None else countries
        return [self.value(c, indicator_id) for c in countries]


def _read_rows(path: Path, header: tuple[str, ...]):
    try:
        text = path.read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise IoError(path, exc) from exc
    reader = csv.reader(io.StringIO(text))
    try:
        found = next(reader)
    except StopIteration:
        raise MalformedRow(path, 1, "", "empty file") from None
    found = [h.strip() for h in found]
    if tuple(found) != header:
        raise MalformedRow(path, 1, "", f"expected header {','.join(header)}, got {','.join(found)}")
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise MalformedRow(path, reader.line_num, "", f"expected {len(header)} fields, got {len(row)}")
        yield reader.line_num, dict(zip(header, (cell.strip() for cell in row)))


def parse_value(text: str) -> Value:
    if text == "" or text == "NA":
        return NA
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("non-finite value")
    return value


def _parse_definitions(path: Path) -> list[IndicatorDefinition]:
    out = []
    seen = set()
    for line, row in _read_rows(path, INDICATOR_HEADER):
        if not row["indicator_id"]:
            raise MalformedRow(path, line, "indicator_id", "empty id")
        try:
            pillar = Pillar(row["pillar"])
        except ValueError:
            raise MalformedRow(path, line, "pillar", f"unknown pillar {row['pillar']!r}") from None
        try:
            polarity = Polarity(row["polarity"]) if row["polarity"] else Polarity.HIGHER_IS_BETTER
        except ValueError:
            raise MalformedRow(path, line, "polarity", f"unknown polarity {row['polarity']!r}") from None
        if row["indicator_id"] in seen:
            raise DuplicateDefinition(f"{path}:{line}: indicator {row['indicator_id']!r} defined twice")
        seen.add(row["indicator_id"])
        out.append(
            IndicatorDefinition(
                id=row["indicator_id"],
                pillar=pillar,
                element=row["element"],
                label=row["label"],
                unit=row["unit"],
                polarity=polarity,
                source_label=row["source_label"],
            )
        )
    return out


def _parse_observations(path: Path, known: set[str]) -> list[CountryObservation]:
    out = []
    seen = set()
    for line, row in _read_rows(path, OBSERVATION_HEADER):
        try:
            country = country_code(row["country"])
        except ValueError as exc:
            raise MalformedRow(path, line, "country", str(exc)) from None
        indicator_id = row["indicator_id"]
        if indicator_id not in known:
            raise UnknownIndicator(f"{path}:{line}: indicator {indicator_id!r} is not in the catalog")
        try:
            value = parse_value(row["value"])
        except ValueError:
            raise MalformedRow(path, line, "value", f"not a number: {row['value']!r}") from None
        year_text = row["reference_year"]
        try:
            year = int(year_text) if year_text else None
        except ValueError:
            raise MalformedRow(path, line, "reference_year", f"not an integer: {year_text!r}") from None
        key = (country, indicator_id)
        if key in seen:
            raise DuplicateObservation(f"{path}:{line}: second observation for {country}/{indicator_id}")
        seen.add(key)
        out.append(CountryObservation(country, indicator_id, value, year))
    return out


def parse_indicator_dataset(indicators, observations=None) -> IndicatorDataset:
    """Load a dataset from ``indicators.csv`` and ``observations.csv``.

    ``indicators`` may be a directory holding both files, in which case
    ``observations`` is omitted.
    """
    indicators = Path(indicators)
    if observations is None:
        observations = indicators / "observations.csv"
        indicators = indicators / "indicators.csv"
    definitions = _parse_definitions(indicators)
    obs = _parse_observations(Path(observations), {d.id for d in definitions})
    return IndicatorDataset(tuple(definitions), tuple(obs))


def _format_value(value: Value) -> str:
    return "NA" if is_na(value) else repr(float(value))


def serialize_indicator_dataset(dataset: IndicatorDataset, directory) -> tuple[Path, Path]:
    """Write ``dataset`` as the two CSV files; values use ``repr`` so they round-trip."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ind_path = directory / "indicators.csv"
    obs_path = directory / "observations.csv"
    with ind_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(INDICATOR_HEADER)
        for d in dataset.definitions:
            w.writerow([d.id, d.pillar.value, d.element, d.label, d.unit, d.polarity.value, d.source_label])
    with obs_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(OBSERVATION_HEADER)
        for o in dataset.observations:
            year = "" if o.reference_year is None else str(o.reference_year)
            w.writerow([o.country, o.indicator_id, _format_value(o.value), year])
    return ind_path, obs_path


@dataclass(frozen=True)
class CountryProfile:
    country: str
    population_total: float
    share_under_14: float
    share_over_64: float
    urban_share: float
    rural_share: float
    basket_urban_monthly: float
    basket_rural_monthly: float
    currency_code: str
    fx_to_usd: float
    excluded_counts: tuple[tuple[str, float], ...] = ()
    excluded_shares: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        for name in ("share_under_14", "share_over_64", "urban_share", "rural_share"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise RangeViolation(f"{self.country}: {name}={value} outside [0, 1]")
        if abs(self.urban_share + self.rural_share - 1.0) > SHARE_TOLERANCE:
            raise RangeViolation(
                f"{self.country}: urban_share + rural_share = {self.urban_share + self.rural_share}, expected 1"
            )
        if self.share_under_14 + self.share_over_64 > 1.0 + SHARE_TOLERANCE:
            raise RangeViolation(f"{self.country}: share_under_14 + share_over_64 exceeds 1")
        for name in ("population_total", "basket_urban_monthly", "basket_rural_monthly"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise RangeViolation(f"{self.country}: {name}={value} must be finite and >= 0")
        if not (math.isfinite(self.fx_to_usd) and self.fx_to_usd > 0):
            raise RangeViolation(f"{self.country}: fx_to_usd must be > 0")
        for label, persons in self.excluded_counts:
            if not (math.isfinite(persons) and persons >= 0):
                raise RangeViolation(f"{self.country}: excluded count {label!r}={persons} must be >= 0")
        for label, share in self.excluded_shares:
            if not 0.0 <= share <= 1.0:
                raise RangeViolation(f"{self.country}: excluded share {label!r}={share} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "country": self.country,
            "population_total": self.population_total,
            "share_under_14": self.share_under_14,
            "share_over_64": self.share_over_64,
            "urban_share": self.urban_share,
            "rural_share": self.rural_share,
            "basket_urban_monthly": self.basket_urban_monthly,
            "basket_rural_monthly": self.basket_rural_monthly,
            "currency_code": self.currency_code,
            "fx_to_usd": self.fx_to_usd,
            "excluded_counts": [{"label": l, "persons": p} for l, p in self.excluded_counts],
            "excluded_shares": [{"label": l, "share": s} for l, s in self.excluded_shares],
        }


_REQUIRED_PROFILE_FIELDS = (
    "country",
    "population_total",
    "share_under_14",
    "share_over_64",
    "basket_urban_monthly",
    "basket_rural_monthly",
    "currency_code",
    "fx_to_usd",
)


def _pairs(raw, value_key: str, what: str) -> tuple[tuple[str, float], ...]:
    out = []
    for item in raw or ():
        if isinstance(item, dict):
            try:
                out.append((str(item["label"]), float(item[value_key])))
            except KeyError as exc:
                raise MissingField(f"{what} entry missing {exc.args[0]!r}") from None
        else:
            label, value = item
            out.append((str(label), float(value)))
    return tuple(out)


def profile_from_dict(data: dict) -> CountryProfile:
    missing = [k for k in _REQUIRED_PROFILE_FIELDS if k not in data]
    if "urban_share" not in data and "rural_share" not in data:
        missing.append("urban_share")
    if missing:
        raise MissingField(f"profile missing field(s): {', '.join(missing)}")
    urban = data.get("urban_share")
    rural = data.get("rural_share")
    if urban is None:
        urban = 1.0 - float(rural)
    if rural is None:
        rural = 1.0 - float(urban)
    try:
        return CountryProfile(
            country=country_code(str(data["country"])),
            population_total=float(data["population_total"]),
            share_under_14=float(data["share_under_14"]),
            share_over_64=float(data["share_over_64"]),
            urban_share=float(urban),
            rural_share=float(rural),
            basket_urban_monthly=float(data["basket_urban_monthly"]),
            basket_rural_monthly=float(data["basket_rural_monthly"]),
            currency_code=str(data["currency_code"]),
            fx_to_usd=float(data["fx_to_usd"]),
            excluded_counts=_pairs(data.get("excluded_counts"), "persons", "excluded_counts"),
            excluded_shares=_pairs(data.get("excluded_shares"), "share", "excluded_shares"),
        )
    except (TypeError, ValueError) as exc:
        raise RangeViolation(f"profile field has the wrong type: {exc}") from None


def parse_country_profile(path) -> CountryProfile:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(path, exc) from exc
    except json.JSONDecodeError as exc:
        raise MissingField(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise MissingField(f"{path}: expected a JSON object")
    return profile_from_dict(data)


@dataclass(frozen=True)
class CountryCoverage:
    country: str
    present: int
    total: int
    by_pillar: dict = field(default_factory=dict)
    flagged: bool = False

    @property
    def coverage(self) -> float:
        return self.present / self.total if self.total else 0.0


@dataclass(frozen=True)
class ValidationReport:
    min_coverage: float
    countries: tuple[CountryCoverage, ...]

    @property
    def flagged(self) -> tuple[str, ...]:
        return tuple(c.country for c in self.countries if c.flagged)

    def for_country(self, country: str) -> CountryCoverage:
        for c in self.countries:
            if c.country == country:
                return c
        raise KeyError(country)


def validate_dataset(dataset: IndicatorDataset, min_coverage: float = 0.5) -> ValidationReport:
    """Per-country share of indicators with a value, overall and per pillar.

    Countries under ``min_coverage`` are flagged but kept.
    """
    rows = []
    for country in dataset.countries:
        by_pillar = {}
        present = 0
        for pillar in PILLAR_ORDER:
            ids = [d.id for d in dataset.definitions if d.pillar is pillar]
            have = sum(1 for i in ids if not is_na(dataset.value(country, i)))
            present += have
            by_pillar[pillar] = have / len(ids) if ids else 0.0
        total = len(dataset.definitions)
        coverage = present / total if total else 0.0
        rows.append(CountryCoverage(country, present, total, by_pillar, coverage < min_coverage))
    return ValidationReport(min_coverage, tuple(rows))
