"""Binary frame-log round trips and corruption handling."""
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roomsense.errors import FrameLogError
from roomsense.labels import ActivityLabel, ScaleClass
from roomsense.logio.framelog import (MAGIC, FrameLogWriter, GroundTruthRecord,
                                      InferenceLogRecord, PointcloudRecord,
                                      RangeDopplerRecord, StateTransitionRecord,
                                      read_framelog)
from roomsense.modes import Mode, TransitionReason
from roomsense.radar.config import Profile


def write_records(path, records):
    with FrameLogWriter(path) as w:
        for rec in records:
            w.write(rec)


def test_empty_log_is_magic_only(tmp_path):
    path = tmp_path / "empty.bin"
    write_records(path, [])
    assert path.read_bytes() == MAGIC
    assert read_framelog(path) == []


def test_range_doppler_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(7)
    power = rng.gamma(1.0, 1.0, size=(16, 256))
    rec = RangeDopplerRecord(0.25, Profile.LOCALIZATION, 1.234, power)
    path = tmp_path / "rd.bin"
    write_records(path, [rec])
    (back,) = read_framelog(path)
    assert isinstance(back, RangeDopplerRecord)
    assert back.timestamp == rec.timestamp
    assert back.profile is Profile.LOCALIZATION
    assert back.radar_angle == rec.radar_angle
    np.testing.assert_array_equal(back.power, power)
    assert back.power.dtype == np.float64


def test_pointcloud_round_trip_including_empty(tmp_path):
    rng = np.random.default_rng(8)
    pts = rng.normal(size=(12, 5))
    path = tmp_path / "pc.bin"
    write_records(path, [
        PointcloudRecord(0.0, Profile.MACRO, -0.5, pts),
        PointcloudRecord(0.1, Profile.MACRO, -0.5, np.empty((0, 5))),
    ])
    full, empty = read_framelog(path)
    np.testing.assert_array_equal(full.points, pts)
    assert empty.points.shape == (0, 5)


def test_state_transition_and_inference_round_trip(tmp_path):
    path = tmp_path / "st.bin"
    write_records(path, [
        StateTransitionRecord(1.0, Profile.MICRO, Mode.MICRO_SENSE,
                              TransitionReason.SCALE_DECISION),
        InferenceLogRecord(1.5, Profile.MICRO, 3,
                           ActivityLabel.BRUSHING_TEETH, 0.875),
    ])
    trans, inf = read_framelog(path)
    assert trans.mode is Mode.MICRO_SENSE
    assert trans.reason is TransitionReason.SCALE_DECISION
    assert trans.profile is Profile.MICRO
    assert inf.subject_id == 3
    assert inf.label is ActivityLabel.BRUSHING_TEETH
    assert inf.confidence == 0.875


def test_ground_truth_round_trip_with_optional_fields(tmp_path):
    entries = ((1, 2.5, 3.5, ActivityLabel.WALKING, ScaleClass.MACRO),
               (2, 0.5, 1.0, None, None))
    path = tmp_path / "gt.bin"
    write_records(path, [GroundTruthRecord(0.0, Profile.LOCALIZATION, entries)])
    (back,) = read_framelog(path)
    assert back.entries == entries


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.floats(0, 100, allow_nan=False)),
                min_size=0, max_size=8))
def test_mixed_stream_round_trip(tmp_path_factory, specs):
    """Any mix of record types with sorted timestamps survives a round trip."""
    rng = np.random.default_rng(11)
    path = tmp_path_factory.mktemp("fuzz") / "mix.bin"
    specs = sorted(specs, key=lambda s: s[1])
    records = []
    for kind, t in specs:
        if kind == 0:
            records.append(RangeDopplerRecord(
                t, Profile.MICRO, 0.0, rng.gamma(1.0, 1.0, size=(4, 6))))
        elif kind == 1:
            records.append(PointcloudRecord(
                t, Profile.LOCALIZATION, 0.3, rng.normal(size=(3, 5))))
        else:
            records.append(InferenceLogRecord(
                t, Profile.MACRO, 0, ActivityLabel.WALKING, 0.5))
    write_records(path, records)
    back = read_framelog(path)
    assert len(back) == len(records)
    for a, b in zip(records, back):
        assert type(a) is type(b)
        assert a.timestamp == b.timestamp


def test_writer_rejects_decreasing_timestamp(tmp_path):
    path = tmp_path / "bad.bin"
    with FrameLogWriter(path) as w:
        w.write(InferenceLogRecord(2.0, Profile.MACRO, 0,
                                   ActivityLabel.WALKING, 1.0))
        with pytest.raises(FrameLogError, match="precedes"):
            w.write(InferenceLogRecord(1.0, Profile.MACRO, 0,
                                       ActivityLabel.WALKING, 1.0))


def test_equal_timestamps_allowed(tmp_path):
    path = tmp_path / "eq.bin"
    rec = InferenceLogRecord(1.0, Profile.MACRO, 0, ActivityLabel.WALKING, 1.0)
    write_records(path, [rec, rec])
    assert len(read_framelog(path)) == 2


def test_bad_magic_reports_offset_zero(tmp_path):
    path = tmp_path / "nolog.bin"
    path.write_bytes(b"NOTALOG!" + b"\x00" * 32)
    with pytest.raises(FrameLogError) as err:
        read_framelog(path)
    assert err.value.offset == 0


def test_truncated_header_reports_offset(tmp_path):
    path = tmp_path / "trunc.bin"
    write_records(path, [InferenceLogRecord(0.0, Profile.MACRO, 1,
                                            ActivityLabel.WALKING, 0.5)])
    blob = path.read_bytes()
    path.write_bytes(blob[:len(MAGIC) + 3])
    with pytest.raises(FrameLogError, match="header") as err:
        read_framelog(path)
    assert err.value.offset == len(MAGIC)


def test_truncated_payload_reports_offset(tmp_path):
    path = tmp_path / "trunc2.bin"
    write_records(path, [RangeDopplerRecord(0.0, Profile.MICRO, 0.0,
                                            np.ones((8, 8)))])
    blob = path.read_bytes()
    path.write_bytes(blob[:-1])
    header_size = struct.calcsize("<BBBBdI")
    with pytest.raises(FrameLogError, match="payload") as err:
        read_framelog(path)
    assert err.value.offset == len(MAGIC) + header_size


def test_unknown_profile_code_rejected(tmp_path):
    path = tmp_path / "prof.bin"
    header = struct.pack("<BBBBdI", 4, 9, 0, 0, 0.0, 0)
    path.write_bytes(MAGIC + header)
    with pytest.raises(FrameLogError, match="profile") as err:
        read_framelog(path)
    assert err.value.offset == len(MAGIC) + 1


def test_unknown_record_type_rejected(tmp_path):
    path = tmp_path / "type.bin"
    header = struct.pack("<BBBBdI", 99, 0, 0, 0, 0.0, 0)
    path.write_bytes(MAGIC + header)
    with pytest.raises(FrameLogError, match="record type") as err:
        read_framelog(path)
    assert err.value.offset == len(MAGIC)


def test_reader_rejects_decreasing_timestamps(tmp_path):
    path = tmp_path / "order.bin"
    payload = struct.pack("<IBd", 0, 0, 1.0)
    head = struct.Struct("<BBBBdI")
    blob = MAGIC
    for t in (5.0, 4.0):
        blob += head.pack(4, 1, 0, 0, t, len(payload)) + payload
    path.write_bytes(blob)
    with pytest.raises(FrameLogError, match="decreases") as err:
        read_framelog(path)
    assert err.value.offset == len(MAGIC) + head.size + len(payload) + 4
