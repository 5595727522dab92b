import pytest

from wagetidy.columns import QuestionFamily
from wagetidy.ingest import (
    DEFAULT_SENTINELS,
    IngestError,
    Missing,
    MissingReason,
    decode_cell,
    load_raw_table,
)


def test_load_fixture_counts(raw_fixture_path, manifest):
    table = load_raw_table(raw_fixture_path)
    assert table.n_rows == manifest["n_persons"]
    assert table.n_columns == len(manifest["columns"])
    assert [col.name for col in table.columns] == manifest["columns"]
    assert list(table.case_ids) == list(range(1, 51))


def test_load_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("CASEID_1979,HRP1_1980,HGC_EVER_XRND\n")
    table = load_raw_table(path)
    assert table.n_rows == 0
    assert table.n_columns == 3
    assert table.column("HRP1_1980").descriptor.job_slot == 1


def test_load_is_deterministic(raw_fixture_path):
    a = load_raw_table(raw_fixture_path)
    b = load_raw_table(raw_fixture_path)
    assert a.case_ids == b.case_ids
    for col_a, col_b in zip(a.columns, b.columns):
        assert col_a.name == col_b.name
        assert (col_a.values == col_b.values).all()
        assert (col_a.blank == col_b.blank).all()


@pytest.mark.parametrize(
    "content,match",
    [
        ("CASEID_1979,WAT_1984\n1,2\n", "cannot ingest header"),
        ("CASEID_1979,HRP1_1980\n1,xyz\n", "non-integer"),
        ("CASEID_1979,HRP1_1980\n1,3\n1,4\n", "duplicate case ids"),
        ("CASEID_1979,HRP1_1980\n0,3\n", "positive"),
        ("CASEID_1979,HRP1_1980\n1,3,9\n", "expected 2 cells"),
        ("HRP1_1980,HRP2_1980\n3,4\n", "exactly one case-id"),
        ("CASEID_1979,CASEID_1980\n1,1\n", "exactly one case-id"),
    ],
)
def test_load_rejects_bad_files(tmp_path, content, match):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(IngestError, match=match):
        load_raw_table(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(IngestError, match="cannot read"):
        load_raw_table(tmp_path / "nope.csv")


def test_decode_wage_cents_to_dollars():
    assert decode_cell(328, QuestionFamily.HRP) == 3.28
    assert decode_cell(0, QuestionFamily.HRP) == 0.0
    assert decode_cell(120000, QuestionFamily.HRP) == 1200.0


def test_decode_sentinels_map_to_reasons():
    for code, reason in DEFAULT_SENTINELS.items():
        for family in (QuestionFamily.HRP, QuestionFamily.WKSWK):
            result = decode_cell(code, family)
            assert result == Missing(reason)
    assert decode_cell(-5, QuestionFamily.HGC) == Missing(MissingReason.NON_INTERVIEW)


def test_decode_blank_is_structural():
    assert decode_cell(None, QuestionFamily.HRP) == Missing(MissingReason.STRUCTURAL_NA)


def test_decode_passthrough_families():
    assert decode_cell(11, QuestionFamily.HGCREV) == 11
    assert decode_cell(1984, QuestionFamily.STARTDATE) == 1984


def test_decode_never_negative_and_sentinels_injective():
    reasons = [DEFAULT_SENTINELS[code] for code in sorted(DEFAULT_SENTINELS)]
    assert len(set(reasons)) == len(reasons)
    assert sorted(DEFAULT_SENTINELS) == [-5, -4, -3, -2, -1]
    for value in range(-9, 200):
        decoded = decode_cell(value, QuestionFamily.HRP)
        if isinstance(decoded, Missing):
            assert value < 0
        else:
            assert decoded >= 0


def test_sentinel_counts_on_fixture(raw_fixture_path):
    table = load_raw_table(raw_fixture_path)
    counts = table.sentinel_counts()
    # Planted sentinel variety on person 7's GED history.
    assert counts["refusal"] >= 1
    assert counts["dont_know"] >= 1
    assert counts["invalid_skip"] >= 1
    assert counts["non_interview"] > 0
    assert counts["structural_na"] > 0
