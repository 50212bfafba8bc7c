import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from startup_valuation.dataset import (
    NA,
    CountryObservation,
    IndicatorDataset,
    IndicatorDefinition,
    Pillar,
    Polarity,
    country_code,
    parse_country_profile,
    parse_indicator_dataset,
    profile_from_dict,
    serialize_indicator_dataset,
    validate_dataset,
)
from startup_valuation.errors import (
    DuplicateDefinition,
    DuplicateObservation,
    IoError,
    MalformedRow,
    MissingField,
    RangeViolation,
    UnknownIndicator,
)

from helpers import MEXICO, make_dataset

IND_HEADER = "indicator_id,pillar,element,label,unit,polarity,source_label\n"
OBS_HEADER = "country,indicator_id,value,reference_year\n"


def write(tmp_path, indicators, observations):
    (tmp_path / "indicators.csv").write_text(IND_HEADER + indicators)
    (tmp_path / "observations.csv").write_text(OBS_HEADER + observations)
    return tmp_path


THREE_DEFS = (
    "elec,Infrastructure,Electricity,Access to electricity,%,HigherIsBetter,World Bank\n"
    "univ,EducationResearch,Education,Top universities,count,,QS\n"
    "salary,Economic,Salaries,Median salary,USD,LowerIsBetter,Glassdoor\n"
)


def test_parse_single_na(tmp_path):
    obs = "BO,elec,97.6,2021\nAR,elec,100,2021\nBR,univ,27,2023\nAR,univ,NA,2023\nAR,salary,15050,2023\nCU,salary,6350,2023\n"
    ds = parse_indicator_dataset(write(tmp_path, THREE_DEFS, obs))
    assert len(ds.definitions) == 3
    assert len(ds.observations) == 6
    assert sum(1 for o in ds.observations if o.value is NA) == 1
    assert ds.value("BO", "elec") == 97.6
    assert ds.definition("univ").polarity is Polarity.HIGHER_IS_BETTER
    assert ds.definition("salary").polarity is Polarity.LOWER_IS_BETTER


def test_empty_cell_is_na_and_absent_row_is_na(tmp_path):
    ds = parse_indicator_dataset(write(tmp_path, THREE_DEFS, "AR,elec,,2021\n"))
    assert ds.value("AR", "elec") is NA
    assert ds.value("AR", "univ") is NA


def test_country_names_resolve_to_iso(tmp_path):
    ds = parse_indicator_dataset(write(tmp_path, THREE_DEFS, "Bolivia,elec,97.6,2021\nDominican Republic,elec,NA,\n"))
    assert ds.countries == ("BO", "DO")
    assert ds.observations[1].reference_year is None


def test_unknown_indicator(tmp_path):
    with pytest.raises(UnknownIndicator):
        parse_indicator_dataset(write(tmp_path, THREE_DEFS, "AR,xyz,1,2021\n"))


def test_duplicate_definition(tmp_path):
    with pytest.raises(DuplicateDefinition):
        parse_indicator_dataset(write(tmp_path, THREE_DEFS + THREE_DEFS.splitlines()[0] + "\n", ""))


def test_duplicate_observation_rejected(tmp_path):
    with pytest.raises(DuplicateObservation):
        parse_indicator_dataset(write(tmp_path, THREE_DEFS, "AR,elec,1,2020\nAR,elec,2,2021\n"))


@pytest.mark.parametrize(
    "indicators,observations,line,column",
    [
        (THREE_DEFS, "AR,elec,abc,2021\n", 2, "value"),
        (THREE_DEFS, "AR,elec,1,2021\nAR,univ,1,twenty\n", 3, "reference_year"),
        (THREE_DEFS, "Atlantis,elec,1,2021\n", 2, "country"),
        (THREE_DEFS, "AR,elec,inf,2021\n", 2, "value"),
    ],
)
def test_malformed_observation_reports_position(tmp_path, indicators, observations, line, column):
    with pytest.raises(MalformedRow) as info:
        parse_indicator_dataset(write(tmp_path, indicators, observations))
    assert info.value.line == line
    assert info.value.column == column


def test_malformed_pillar(tmp_path):
    with pytest.raises(MalformedRow) as info:
        parse_indicator_dataset(write(tmp_path, "x,Health,e,l,u,,s\n", ""))
    assert info.value.column == "pillar"
    assert info.value.line == 2


def test_wrong_header(tmp_path):
    (tmp_path / "indicators.csv").write_text("id,pillar\n")
    (tmp_path / "observations.csv").write_text(OBS_HEADER)
    with pytest.raises(MalformedRow):
        parse_indicator_dataset(tmp_path)


def test_missing_file(tmp_path):
    with pytest.raises(IoError):
        parse_indicator_dataset(tmp_path)


def test_na_refuses_arithmetic():
    for op in (lambda: NA + 1, lambda: 1 + NA, lambda: NA * 2.0, lambda: -NA, lambda: float(NA), lambda: NA < 1):
        with pytest.raises(TypeError):
            op()
    assert NA is type(NA)()


def test_bundled_dataset_has_real_values(paper_data):
    ds = parse_indicator_dataset(paper_data)
    assert ds.value("BO", "electricity_access") == 97.6
    assert ds.definition("cs_salary_median").polarity is Polarity.LOWER_IS_BETTER
    assert len(ds.countries) == 19


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
value_or_na = st.one_of(st.just(NA), finite)
labels = st.text(alphabet=st.characters(blacklist_categories=("Cc", "Cs", "Zl", "Zp")), max_size=8)


@st.composite
def datasets(draw):
    n_ind = draw(st.integers(1, 5))
    defs = tuple(
        IndicatorDefinition(
            f"i{k}",
            draw(st.sampled_from(list(Pillar))),
            draw(labels),
            draw(labels),
            "u",
            draw(st.sampled_from(list(Polarity))),
            "s, with comma",
        )
        for k in range(n_ind)
    )
    countries = draw(st.lists(st.sampled_from(["AR", "BR", "CL", "MX", "PE"]), unique=True, max_size=5))
    obs = tuple(
        CountryObservation(c, d.id, draw(value_or_na), draw(st.one_of(st.none(), st.integers(1990, 2030))))
        for c in countries
        for d in defs
    )
    return IndicatorDataset(defs, obs)


@settings(max_examples=60, deadline=None)
@given(datasets())
def test_round_trip(tmp_path_factory, ds):
    # leading/trailing whitespace is stripped on parse, so normalize generated text first
    ds = IndicatorDataset(
        tuple(
            IndicatorDefinition(d.id, d.pillar, d.element.strip(), d.label.strip(), d.unit, d.polarity, d.source_label)
            for d in ds.definitions
        ),
        ds.observations,
    )
    out = tmp_path_factory.mktemp("rt")
    serialize_indicator_dataset(ds, out)
    back = parse_indicator_dataset(out)
    assert back == ds
    assert [o.value is NA for o in back.observations] == [o.value is NA for o in ds.observations]


def test_profile_mexico(tmp_path):
    data = dict(MEXICO)
    data["excluded_counts"] = [{"label": l, "persons": p} for l, p in data["excluded_counts"]]
    data["excluded_shares"] = [{"label": l, "share": s} for l, s in data["excluded_shares"]]
    path = tmp_path / "MX.json"
    path.write_text(json.dumps(data))
    profile = parse_country_profile(path)
    assert profile.population_total == 126_705_138
    assert profile.share_under_14 == 0.2495
    assert profile.urban_share == 0.79


def test_profile_rural_complement():
    data = {k: v for k, v in MEXICO.items() if k != "rural_share"}
    assert profile_from_dict(data).rural_share == pytest.approx(0.21, abs=1e-15)


def test_profile_urban_from_rural():
    data = {k: v for k, v in MEXICO.items() if k != "urban_share"}
    assert profile_from_dict(data).urban_share == pytest.approx(0.79, abs=1e-15)


def test_profile_shares_must_sum_to_one():
    with pytest.raises(RangeViolation):
        profile_from_dict({**MEXICO, "urban_share": 0.5, "rural_share": 0.6})


@pytest.mark.parametrize(
    "change",
    [{"urban_share": 1.2, "rural_share": -0.2}, {"fx_to_usd": 0.0}, {"population_total": -1}, {"share_under_14": 0.7, "share_over_64": 0.4}],
)
def test_profile_range_violations(change):
    with pytest.raises(RangeViolation):
        profile_from_dict({**MEXICO, **change})


def test_profile_missing_field():
    data = {k: v for k, v in MEXICO.items() if k != "fx_to_usd"}
    with pytest.raises(MissingField):
        profile_from_dict(data)


def test_country_code():
    assert country_code("México") == "MX"
    assert country_code("br") == "BR"
    with pytest.raises(ValueError):
        country_code("Narnia")


def _coverage_dataset(present: int, total: int = 10):
    table = {}
    for k in range(total):
        pillar = list(Pillar)[k % 3]
        table[(pillar, f"i{k}")] = {"AR": float(k) if k < present else NA, "BR": 1.0}
    return make_dataset(table)


def test_coverage_empty_flagged():
    report = validate_dataset(_coverage_dataset(0), 0.5)
    ar = report.for_country("AR")
    assert ar.coverage == 0.0 and ar.flagged
    assert report.flagged == ("AR",)


def test_coverage_full():
    ar = validate_dataset(_coverage_dataset(10), 0.5).for_country("AR")
    assert ar.coverage == 1.0 and not ar.flagged


def test_coverage_partial_counting_oracle():
    ds = _coverage_dataset(4)
    ar = validate_dataset(ds, 0.3).for_country("AR")
    expected = sum(1 for d in ds.definitions if ds.value("AR", d.id) is not NA) / len(ds.definitions)
    assert expected == 0.4
    assert ar.coverage == expected and not ar.flagged
    # i0, i3 infra; i1 edu; i2 econ are present out of 4/3/3
    assert ar.by_pillar[Pillar.INFRASTRUCTURE] == 2 / 4
    assert ar.by_pillar[Pillar.EDUCATION_RESEARCH] == 1 / 3
