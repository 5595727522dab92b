import pytest

from wagetidy.demographics import (
    GRADE_LABELS,
    DemographicsError,
    build_demog_table,
    decode_race,
    decode_sex,
    derive_age_1979,
    derive_birth_year,
    derive_ged,
    derive_hgc_ever,
)
from wagetidy.ingest import load_raw_table
from wagetidy.tables import read_demog_csv


def test_birth_year_agreement():
    result = derive_birth_year(1961, 1961)
    assert result.year == 1961 and result.consistent


def test_birth_year_single_source():
    assert derive_birth_year(1961, None).year == 1961
    assert derive_birth_year(None, 1958).year == 1958
    assert derive_birth_year(1961, None).consistent


def test_birth_year_conflict_prefers_1979():
    result = derive_birth_year(1961, 1962)
    assert result.year == 1961
    assert not result.consistent


def test_birth_year_both_missing():
    assert derive_birth_year(None, None).year is None


@pytest.mark.parametrize("birth,age", [(1961, 18), (1957, 22), (1964, 15)])
def test_age_arithmetic(birth, age):
    assert derive_age_1979(birth) == age


def test_age_rejects_out_of_range():
    with pytest.raises(DemographicsError):
        derive_age_1979(1970)
    with pytest.raises(DemographicsError):
        derive_age_1979(1950)


def test_sex_race_codes():
    assert decode_sex(1) == "m" and decode_sex(2) == "f"
    assert decode_race(1) == "H" and decode_race(2) == "B" and decode_race(3) == "NBH"
    with pytest.raises(DemographicsError):
        decode_sex(3)
    with pytest.raises(DemographicsError):
        decode_race(0)


@pytest.mark.parametrize(
    "grade,label",
    [(9, "9TH GRADE"), (15, "3RD YEAR COLLEGE"), (0, "NONE"), (12, "12TH GRADE"),
     (13, "1ST YEAR COLLEGE"), (20, "8TH YEAR COLLEGE OR MORE")],
)
def test_grade_labels(grade, label):
    assert derive_hgc_ever(grade) == (label, grade)


def test_grade_label_bijection():
    labels = [GRADE_LABELS[g] for g in range(21)]
    assert len(set(labels)) == 21
    for grade in range(21):
        label, value = derive_hgc_ever(grade)
        assert value == grade and label == GRADE_LABELS[grade]


def test_grade_outside_registry():
    with pytest.raises(DemographicsError):
        derive_hgc_ever(95)
    with pytest.raises(DemographicsError):
        derive_hgc_ever(-1)


def test_ged_latest_wins():
    assert derive_ged({1980: 1, 1990: 2}) == 2
    assert derive_ged({1984: 3}) == 3
    assert derive_ged({}) is None
    assert derive_ged({1980: None, 1984: None}) is None
    assert derive_ged({1980: 2, 1990: None}) == 2


def test_build_demog_matches_manifest(raw_fixture_path, manifest, golden_dir):
    raw = load_raw_table(raw_fixture_path)
    result = build_demog_table(raw)
    assert len(result.rows) == manifest["expected"]["demog_rows"]
    assert [row.id for row in result.rows] == sorted(row.id for row in result.rows)

    golden = read_demog_csv(golden_dir / "demog_nlsy79.csv")
    assert result.rows == golden

    conflict_id = manifest["planted"]["birth_conflict_id"]
    conflicts = [f for f in result.flags if f.category == "birth_year_conflict"]
    assert [f.case_id for f in conflicts] == [conflict_id]

    deferred_id = manifest["planted"]["deferred_hgc_missing_id"]
    by_id = {row.id: row for row in result.rows}
    assert by_id[deferred_id].hgc is None and by_id[deferred_id].hgc_i is None


def test_demog_marginals_match_manifest(raw_fixture_path, manifest):
    raw = load_raw_table(raw_fixture_path)
    rows = build_demog_table(raw).rows
    sex_counts = {"m": 0, "f": 0}
    race_counts = {"H": 0, "B": 0, "NBH": 0}
    for row in rows:
        sex_counts[row.sex] += 1
        race_counts[row.race] += 1
    assert sex_counts == manifest["expected"]["sex_counts"]
    assert race_counts == manifest["expected"]["race_counts"]


def test_demog_label_integer_bijection_per_row(raw_fixture_path):
    raw = load_raw_table(raw_fixture_path)
    for row in build_demog_table(raw).rows:
        assert (row.hgc is None) == (row.hgc_i is None)
        if row.hgc_i is not None:
            assert GRADE_LABELS[row.hgc_i] == row.hgc


def test_build_demog_empty_table(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("CASEID_1979,SAMPLE_SEX_1979\n")
    raw = load_raw_table(path)
    result = build_demog_table(raw)
    assert result.rows == [] and result.flags == []
