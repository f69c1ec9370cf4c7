"""Binary frame-log stream: record/replay for every pipeline product.

Layout: 8-byte magic, then length-prefixed records. Each record carries a
16-byte header [type u8, profile u8, flags u8, reserved u8, timestamp f64,
payload_len u32], all little-endian. Float payloads are stored as f64 so a
replayed stream reproduces the live pipeline bit-exactly.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import FrameLogError
from ..labels import LABEL_CODES, LABELS_BY_CODE, ActivityLabel, ScaleClass
from ..modes import Mode, TransitionReason
from ..radar.config import PROFILE_CODES, Profile

MAGIC = b"MARSLOG1"
_HEADER = struct.Struct("<BBBBdI")

REC_RANGE_DOPPLER = 1
REC_POINTCLOUD = 2
REC_STATE_TRANSITION = 3
REC_INFERENCE = 4
REC_GROUND_TRUTH = 5

_PROFILES_BY_CODE = {code: profile for profile, code in PROFILE_CODES.items()}
NO_LABEL = 255


@dataclass(frozen=True)
class RangeDopplerRecord:
    timestamp: float
    profile: Profile
    radar_angle: float
    power: np.ndarray          # [D, R] float64


@dataclass(frozen=True)
class PointcloudRecord:
    timestamp: float
    profile: Profile
    radar_angle: float
    points: np.ndarray         # [n, 5] float64 columns x, y, z, d, p


@dataclass(frozen=True)
class StateTransitionRecord:
    timestamp: float
    profile: Profile           # profile being switched to
    mode: Mode
    reason: TransitionReason


@dataclass(frozen=True)
class InferenceLogRecord:
    timestamp: float
    profile: Profile
    subject_id: int
    label: ActivityLabel
    confidence: float


@dataclass(frozen=True)
class GroundTruthRecord:
    timestamp: float
    profile: Profile
    entries: tuple = field(default=())   # (subject_id, x, y, label|None, scale|None)


LogRecord = (RangeDopplerRecord | PointcloudRecord | StateTransitionRecord
             | InferenceLogRecord | GroundTruthRecord)


def _encode_payload(record: LogRecord) -> tuple[int, bytes]:
    if isinstance(record, RangeDopplerRecord):
        power = np.ascontiguousarray(record.power, dtype="<f8")
        d, r = power.shape
        return REC_RANGE_DOPPLER, (struct.pack("<dHH", record.radar_angle, d, r)
                                   + power.tobytes())
    if isinstance(record, PointcloudRecord):
        pts = np.ascontiguousarray(record.points, dtype="<f8").reshape(-1, 5)
        return REC_POINTCLOUD, (struct.pack("<dH", record.radar_angle, len(pts))
                                + pts.tobytes())
    if isinstance(record, StateTransitionRecord):
        return REC_STATE_TRANSITION, struct.pack(
            "<BBB", int(record.mode), PROFILE_CODES[record.profile],
            int(record.reason))
    if isinstance(record, InferenceLogRecord):
        return REC_INFERENCE, struct.pack(
            "<IBd", record.subject_id, LABEL_CODES[record.label],
            record.confidence)
    if isinstance(record, GroundTruthRecord):
        body = [struct.pack("<H", len(record.entries))]
        for subject_id, x, y, label, scale in record.entries:
            lbl = NO_LABEL if label is None else LABEL_CODES[label]
            scl = NO_LABEL if scale is None else int(scale)
            body.append(struct.pack("<IddBB", subject_id, x, y, lbl, scl))
        return REC_GROUND_TRUTH, b"".join(body)
    raise FrameLogError(f"unknown record {type(record).__name__}", offset=-1)


def _decode_payload(rec_type: int, profile: Profile, timestamp: float,
                    payload: bytes, offset: int) -> LogRecord:
    try:
        if rec_type == REC_RANGE_DOPPLER:
            radar_angle, d, r = struct.unpack_from("<dHH", payload, 0)
            power = np.frombuffer(payload, dtype="<f8", offset=12,
                                  count=d * r).reshape(d, r).copy()
            return RangeDopplerRecord(timestamp, profile, radar_angle, power)
        if rec_type == REC_POINTCLOUD:
            radar_angle, n = struct.unpack_from("<dH", payload, 0)
            pts = np.frombuffer(payload, dtype="<f8", offset=10,
                                count=n * 5).reshape(n, 5).copy()
            return PointcloudRecord(timestamp, profile, radar_angle, pts)
        if rec_type == REC_STATE_TRANSITION:
            mode, prof_code, reason = struct.unpack_from("<BBB", payload, 0)
            return StateTransitionRecord(timestamp, _PROFILES_BY_CODE[prof_code],
                                         Mode(mode), TransitionReason(reason))
        if rec_type == REC_INFERENCE:
            subject_id, label, confidence = struct.unpack_from("<IBd", payload, 0)
            return InferenceLogRecord(timestamp, profile, subject_id,
                                      LABELS_BY_CODE[label], confidence)
        if rec_type == REC_GROUND_TRUTH:
            (n,) = struct.unpack_from("<H", payload, 0)
            entries, pos = [], 2
            for _ in range(n):
                subject_id, x, y, lbl, scl = struct.unpack_from("<IddBB", payload, pos)
                pos += struct.calcsize("<IddBB")
                label = None if lbl == NO_LABEL else LABELS_BY_CODE[lbl]
                scale = None if scl == NO_LABEL else ScaleClass(scl)
                entries.append((subject_id, x, y, label, scale))
            return GroundTruthRecord(timestamp, profile, tuple(entries))
    except (struct.error, ValueError, KeyError) as exc:
        raise FrameLogError(f"corrupt type-{rec_type} payload: {exc}",
                            offset=offset) from exc
    raise FrameLogError(f"unknown record type {rec_type}", offset=offset)


class FrameLogWriter:
    """Append-only writer; enforces non-decreasing timestamps."""

    def __init__(self, path):
        self._fh = open(path, "wb")
        self._fh.write(MAGIC)
        self._last_t = -np.inf

    def write(self, record: LogRecord):
        if record.timestamp < self._last_t:
            raise FrameLogError(
                f"timestamp {record.timestamp} precedes {self._last_t}",
                offset=self._fh.tell())
        self._last_t = record.timestamp
        rec_type, payload = _encode_payload(record)
        self._fh.write(_HEADER.pack(rec_type, PROFILE_CODES[record.profile],
                                    0, 0, record.timestamp, len(payload)))
        self._fh.write(payload)

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def read_framelog(path) -> list[LogRecord]:
    """Parse a whole log; malformed input raises with the failing byte offset."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(MAGIC):
        raise FrameLogError("bad magic; not a frame log", offset=0)
    records: list[LogRecord] = []
    off = len(MAGIC)
    last_t = -np.inf
    while off < len(blob):
        if off + _HEADER.size > len(blob):
            raise FrameLogError("truncated record header", offset=off)
        rec_type, prof_code, _flags, _res, timestamp, n = _HEADER.unpack_from(blob, off)
        if prof_code not in _PROFILES_BY_CODE:
            raise FrameLogError(f"unknown profile code {prof_code}", offset=off + 1)
        if timestamp < last_t:
            raise FrameLogError(f"timestamp {timestamp} decreases", offset=off + 4)
        last_t = timestamp
        body_off = off + _HEADER.size
        if body_off + n > len(blob):
            raise FrameLogError("truncated record payload", offset=body_off)
        records.append(_decode_payload(rec_type, _PROFILES_BY_CODE[prof_code],
                                       timestamp, blob[body_off:body_off + n], off))
        off = body_off + n
    return records
