import csv
import io
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aerosim.engine import run_episode
from aerosim.geometry import RelativeGeometry
from aerosim.results import (
    ENTITY_KEYS,
    GEOMETRY_KEYS,
    ORIENTATION_HEADER,
    RECORD_KEYS,
    EntityRecord,
    TraceParseError,
    TraceRecord,
    export_orientation_csv,
    parse_trace,
    q9,
    serialize_trace,
    summarize,
    summarize_from_header,
)
from aerosim.scoring import EmptyTraceError, ScoringConfig

CFG = ScoringConfig()


def rec(tick, aa, ata, rng=500.0, s3=0, cat="Offensive"):
    ent = EntityRecord("blue", "blue", 0.0, 0.0, 1000.0, 0.0, 0.0, 0.0, 200.0, "", "")
    return TraceRecord(tick, q9((tick + 1) * 0.1), (ent,), RelativeGeometry(ata, aa, rng, 0.0, 0.0),
                       1, 0.5, s3, cat)


def test_single_tick_line_has_every_key():
    text = serialize_trace([rec(0, 0.0, 0.0)])
    assert text.count("\n") == 1
    obj = json.loads(text)
    assert tuple(obj) == RECORD_KEYS
    assert tuple(obj["entities"][0]) == ENTITY_KEYS
    assert tuple(obj["geometry"]) == GEOMETRY_KEYS


def test_empty_trace_serializes_to_nothing():
    assert serialize_trace([]) == ""
    assert parse_trace("") == (None, [])


def test_orientation_rows():
    text = export_orientation_csv([rec(0, 0.0, 0.0), rec(1, math.pi, 0.0, cat="HeadOn")])
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == ORIENTATION_HEADER
    assert rows[1][1:3] == ["0.0", "0.0"] and rows[1][4] == "Offensive"
    assert rows[2][1:3] == ["180.0", "0.0"] and rows[2][4] == "HeadOn"


def test_orientation_empty_is_error():
    with pytest.raises(EmptyTraceError):
        export_orientation_csv([])
    with pytest.raises(EmptyTraceError):
        summarize([], CFG, 0.1)


def test_all_offensive_time_in_category():
    recs = [rec(i, 0.1, 0.1) for i in range(50)]
    s = summarize(recs, CFG, 0.1)
    assert s.score.time_in_category["Offensive"] == 5.0
    assert s.duration == 5.0


def test_hold_exactly_t_hold_succeeds():
    recs = [rec(i, 0.0, 0.0, s3=1) for i in range(30)]
    s = summarize(recs, CFG, 0.1)
    assert s.score.shaw_hold_success and s.termination == "shaw_hold_success"


@pytest.fixture(scope="module")
def stern_run(stern_cfg):
    return run_episode(stern_cfg, 0)


def test_acceptance_run_final_tick(stern_run):
    rows = list(csv.DictReader(io.StringIO(export_orientation_csv(stern_run.records))))
    last = rows[-1]
    assert last["category"] == "Offensive"
    assert float(last["abs_aa_deg"]) <= 60.0 and float(last["abs_ata_deg"]) <= 30.0
    assert len(rows) == len(stern_run.records)
    assert stern_run.summary.termination == "shaw_hold_success"


def test_roundtrip_exact(stern_run):
    text = serialize_trace(stern_run.records, stern_run.header)
    header, records = parse_trace(text)
    assert records == stern_run.records
    assert header == json.loads(json.dumps(stern_run.header))
    assert serialize_trace(records, header) == text


def test_summary_from_header_matches(stern_run):
    header, records = parse_trace(serialize_trace(stern_run.records, stern_run.header))
    assert summarize_from_header(header, records).to_json() == stern_run.summary.to_json()


def test_means_match_raw_scores(stern_run):
    recs = stern_run.records
    s = stern_run.summary.score
    assert s.mean_s2 == pytest.approx(sum(r.s2 for r in recs) / len(recs), abs=1e-12)
    assert s.mean_s1 == pytest.approx(sum(r.s1 for r in recs) / len(recs), abs=1e-12)


def test_records_consistent_with_classification(stern_run):
    from aerosim.geometry import classify_orientation
    for r in stern_run.records:
        assert r.category == classify_orientation(r.geometry).value
        assert all(math.isfinite(v) for v in r.geometry)


@pytest.mark.parametrize("text, line", [
    ('{"tick": 0}\n', 1),
    ("not json\n", 1),
    ('{"header": {}}\n{"tick":0}', 2),
])
def test_malformed_traces_name_the_line(text, line):
    with pytest.raises(TraceParseError) as exc:
        parse_trace(text)
    assert exc.value.line == line


def test_truncated_final_line(stern_run):
    text = serialize_trace(stern_run.records[:3], stern_run.header)
    with pytest.raises(TraceParseError) as exc:
        parse_trace(text[:-20])
    assert exc.value.line == 4


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_q9_is_idempotent_and_json_stable(x):
    y = q9(x)
    assert q9(y) == y
    assert json.loads(json.dumps(y)) == y
