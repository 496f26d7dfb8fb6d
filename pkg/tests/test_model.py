import pytest

from netmem.model import (
    BaselineSource,
    CitationGroup,
    CitationTooLow,
    DNEScore,
    FieldOfScience,
    ProbeRecord,
    Region,
    ResponseClass,
    SampleSummary,
    TestResult,
    UnknownCountry,
    UnknownSubfield,
    stars_for_p,
    validate_seed,
)
from netmem import taxonomy


GOOD = {
    "full_name": "Ada Lovelace",
    "subfield": "Software Engineering",
    "affiliation": "Analytical Engines Institute",
    "country": "US",
    "citations": 101,
}


def test_validate_seed_accepts_and_resolves():
    seed = validate_seed(GOOD)
    assert seed.field is FieldOfScience.INFORMATION_COMMUNICATION_TECHNOLOGIES
    assert seed.region is Region.NORTH_AMERICA
    assert seed.citation_count == 101
    assert seed.group is None
    assert seed.id


def test_validate_seed_citation_boundary_is_strict():
    with pytest.raises(CitationTooLow):
        validate_seed({**GOOD, "citations": 100})
    validate_seed({**GOOD, "citations": 101})


def test_validate_seed_unknown_subfield():
    with pytest.raises(UnknownSubfield):
        validate_seed({**GOOD, "subfield": "Astrology"})


def test_validate_seed_unknown_country():
    with pytest.raises(UnknownCountry):
        validate_seed({**GOOD, "country": "ZZ"})


def test_validate_seed_id_is_stable():
    assert validate_seed(GOOD).id == validate_seed(dict(GOOD)).id
    other = validate_seed({**GOOD, "affiliation": "Somewhere Else"})
    assert other.id != validate_seed(GOOD).id


def test_validate_seed_keeps_explicit_id_and_group():
    seed = validate_seed({**GOOD, "id": "seed-1", "group": "high"})
    assert seed.id == "seed-1"
    assert seed.group is CitationGroup.HIGH


def test_taxonomy_totality_round_trip():
    for fld, subs in taxonomy.FIELD_SUBFIELDS.items():
        for sub in subs:
            resolved = taxonomy.field_for_subfield(sub)
            assert resolved is fld
            assert sub in taxonomy.subfields_of(resolved)
    assert len(FieldOfScience) == 10
    assert taxonomy.field_for_subfield("not a subfield") is None


def test_taxonomy_is_a_function():
    seen = {}
    for fld, subs in taxonomy.FIELD_SUBFIELDS.items():
        for sub in subs:
            key = sub.casefold()
            assert key not in seen, f"{sub} maps to two fields"
            seen[key] = fld


def test_region_mapping_totality():
    assert len(Region) == 8
    # every bundled country resolves; spot-check conventions
    for code, region in taxonomy.COUNTRY_REGION.items():
        assert isinstance(region, Region)
        assert len(code) == 2 and code.isupper()
    # all 193 UN member states are covered (plus a few extras)
    assert len(taxonomy.COUNTRY_REGION) >= 193
    assert taxonomy.region_for_country("us") is Region.NORTH_AMERICA
    assert taxonomy.region_for_country("IR") is Region.MIDDLE_EAST
    assert taxonomy.region_for_country("BR") is Region.SOUTH_CENTRAL_AMERICA
    assert taxonomy.region_for_country("NG") is Region.SUB_SAHARAN_AFRICA
    assert taxonomy.region_for_country("EG") is Region.NORTH_AFRICA
    assert taxonomy.region_for_country("JP") is Region.EAST_SOUTHEAST_ASIA
    assert taxonomy.region_for_country("NZ") is Region.OCEANIC
    assert taxonomy.region_for_country("DE") is Region.EUROPE


def test_dne_score_bounds_enforced():
    DNEScore("s", "m", BaselineSource.OPENALEX, 0.6, 5, 10, 0.5)
    with pytest.raises(ValueError):
        DNEScore("s", "m", BaselineSource.OPENALEX, 0.6, 15, 10, 1.5)
    with pytest.raises(ValueError):
        DNEScore("s", "m", BaselineSource.OPENALEX, 0.6, 1, 0, 0.0)


def test_probe_record_valid_requires_names():
    with pytest.raises(ValueError):
        ProbeRecord("s", "m", "p", "raw", ResponseClass.VALID, (), "t")
    ProbeRecord("s", "m", "p", "raw", ResponseClass.NULL, (), "t")


def test_stars_strict_boundaries():
    assert stars_for_p(0.0009) == "***"
    assert stars_for_p(0.001) == "**"
    assert stars_for_p(0.0099) == "**"
    assert stars_for_p(0.01) == "*"
    assert stars_for_p(0.049) == "*"
    assert stars_for_p(0.05) == "ns"
    assert stars_for_p(0.5) == "ns"


def test_test_result_autofills_stars():
    result = TestResult(SampleSummary(3, 0.8, 0.1), SampleSummary(3, 0.3, 0.1),
                        t_stat=6.1, p_value=0.0018)
    assert result.stars == "**"
    explicit = TestResult(SampleSummary(3, 0.8, 0.1), SampleSummary(3, 0.3, 0.1),
                          t_stat=21.04, p_value=1e-60, stars="***")
    assert explicit.stars == "***"
