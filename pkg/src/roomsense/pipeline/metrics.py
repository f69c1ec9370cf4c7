"""Evaluation over a recorded run: F1, response time, hit rate, MAE.

Inference records carry track ids while ground truth carries subject ids,
so tracks are first mapped to subjects by majority nearest-position vote
over the whole run, then every record is scored against the mapped
subject's scheduled activity.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import asdict, dataclass, field

from ..labels import ALL_LABELS, ActivityLabel, ScaleClass, scale_of
from ..scoring import per_class_f1, weighted_f1
from .frontend import ProcessedFrame  # noqa: F401  (re-export convenience)
from ..logio.framelog import (GroundTruthRecord, InferenceLogRecord, LogRecord,
                              StateTransitionRecord)

MATCH_RADIUS_M = 1.0       # track-to-subject vote gate
MAE_GATE_M = 2.0           # beyond this a track is not anyone's estimate

_LABEL_INDEX = {label: i for i, label in enumerate(ALL_LABELS)}


@dataclass
class Segment:
    subject_id: int
    label: ActivityLabel
    start: float
    end: float
    n_correct: int = 0
    first_correct: float | None = None
    switched: bool = False


@dataclass
class MetricsReport:
    weighted_f1_by_scale: dict[str, float | None] = field(default_factory=dict)
    per_activity_f1: dict[str, float] = field(default_factory=dict)
    avg_response_time_s: float | None = None
    avg_response_with_switch_s: float | None = None
    avg_response_without_switch_s: float | None = None
    avg_hits_per_second: float | None = None
    localization_mae_m: float | None = None
    matched_fraction: float | None = None
    n_inferences: int = 0
    n_segments: int = 0
    segments_hit: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def activity_segments(gt_records: list[GroundTruthRecord]) -> list[Segment]:
    """Maximal constant-label spans per subject, in (subject, start) order."""
    timelines: dict[int, list[tuple[float, ActivityLabel | None]]] = {}
    for rec in gt_records:
        for subject_id, _x, _y, label, _scale in rec.entries:
            timelines.setdefault(subject_id, []).append((rec.timestamp, label))
    segments = []
    for subject_id in sorted(timelines):
        rows = timelines[subject_id]
        i = 0
        while i < len(rows):
            t0, label = rows[i]
            j = i
            while j + 1 < len(rows) and rows[j + 1][1] == label:
                j += 1
            end = rows[j + 1][0] if j + 1 < len(rows) else rows[j][0]
            if label is not None and end > t0:
                segments.append(Segment(subject_id, label, t0, end))
            i = j + 1
    return segments


def map_tracks_to_subjects(track_history, gt_records) -> dict[int, int]:
    """Track id -> subject id by majority nearest-position vote."""
    gt_by_t: dict[float, list] = {}
    for rec in gt_records:
        gt_by_t[rec.timestamp] = [(sid, x, y) for sid, x, y, _l, _s in rec.entries]
    votes: dict[int, dict[int, int]] = {}
    for t, tid, x, y in track_history:
        entries = gt_by_t.get(t)
        if not entries:
            continue
        best, best_d = None, MATCH_RADIUS_M
        for sid, gx, gy in entries:
            d = math.hypot(gx - x, gy - y)
            if d < best_d:
                best, best_d = sid, d
        if best is not None:
            bucket = votes.setdefault(tid, {})
            bucket[best] = bucket.get(best, 0) + 1
    return {tid: min(sorted(bucket), key=lambda sid: -bucket[sid])
            for tid, bucket in sorted(votes.items()) if bucket}


def _label_at(timeline: list[tuple[float, ActivityLabel | None]],
              t: float) -> ActivityLabel | None:
    times = [row[0] for row in timeline]
    i = bisect_right(times, t) - 1
    return timeline[i][1] if i >= 0 else None


def localization_mae(track_history, gt_records) -> tuple[float | None, float | None]:
    """(MAE over greedily matched track/subject pairs, matched fraction).

    Only ground-truth rows at timestamps where tracking ran count toward
    the matched fraction; sensing-mode frames carry no position estimates.
    """
    rows_by_t: dict[float, list] = {}
    for t, tid, x, y in track_history:
        rows_by_t.setdefault(t, []).append((tid, x, y))
    errors: list[float] = []
    n_gt_rows = 0
    for rec in gt_records:
        rows = rows_by_t.get(rec.timestamp)
        if not rows:
            continue
        entries = [(sid, x, y) for sid, x, y, _l, _s in rec.entries]
        n_gt_rows += len(entries)
        pairs = sorted(
            (math.hypot(gx - x, gy - y), ti, gi)
            for ti, (_tid, x, y) in enumerate(rows)
            for gi, (_sid, gx, gy) in enumerate(entries))
        taken_t: set[int] = set()
        taken_g: set[int] = set()
        for d, ti, gi in pairs:
            if d > MAE_GATE_M:
                break
            if ti in taken_t or gi in taken_g:
                continue
            taken_t.add(ti)
            taken_g.add(gi)
            errors.append(d)
    if n_gt_rows == 0:
        return None, None
    if not errors:
        return None, 0.0
    return sum(errors) / len(errors), len(errors) / n_gt_rows


def rebuild_track_history(records: list[LogRecord], dead_time_s: float = 0.5,
                          ) -> list[tuple[float, int, float, float]]:
    """Re-run tracking over a log's localization frames.

    Mirrors the live loop exactly: frames inside a post-switch dead window
    are skipped and the point pool restarts on every return to Localize, so
    the rows come out identical to the ones the live run produced.
    """
    from ..modes import Mode
    from ..radar.config import Profile, profile_config
    from ..tracking import Tracker
    from .frontend import frame_from_arrays
    from ..logio.framelog import PointcloudRecord, RangeDopplerRecord

    loc = profile_config(Profile.LOCALIZATION)
    tracker = Tracker(fps=loc.fps, sigma_meas=loc.range_resolution_m)
    history: list[tuple[float, int, float, float]] = []
    dead_until = -math.inf
    mode = Mode.LOCALIZE
    pending_rd: RangeDopplerRecord | None = None
    for rec in records:
        if isinstance(rec, StateTransitionRecord):
            if rec.mode is Mode.LOCALIZE and mode is not Mode.LOCALIZE:
                tracker.restart_clustering()
            if mode is not rec.mode:
                dead_until = rec.timestamp + dead_time_s
            mode = rec.mode
        elif isinstance(rec, RangeDopplerRecord):
            pending_rd = rec
        elif isinstance(rec, PointcloudRecord):
            if (mode is not Mode.LOCALIZE or rec.profile is not Profile.LOCALIZATION
                    or rec.timestamp < dead_until):
                continue
            if pending_rd is None or pending_rd.timestamp != rec.timestamp:
                continue
            pf = frame_from_arrays(pending_rd.power, rec.points, loc,
                                   rec.timestamp, rec.radar_angle)
            tracks = tracker.step(pf.global_points, rec.timestamp)
            for tid in sorted(tracks):
                tr = tracks[tid]
                history.append((rec.timestamp, tid, tr.state[0], tr.state[1]))
    return history


def compute_metrics(records: list[LogRecord],
                    track_history: list[tuple[float, int, float, float]],
                    ) -> MetricsReport:
    gt_records = [r for r in records if isinstance(r, GroundTruthRecord)]
    inferences = [r for r in records if isinstance(r, InferenceLogRecord)]
    transitions = [r for r in records if isinstance(r, StateTransitionRecord)]

    report = MetricsReport(n_inferences=len(inferences))
    if not gt_records:
        return report

    timelines: dict[int, list[tuple[float, ActivityLabel | None]]] = {}
    for rec in gt_records:
        for sid, _x, _y, label, _scale in rec.entries:
            timelines.setdefault(sid, []).append((rec.timestamp, label))
    track_map = map_tracks_to_subjects(track_history, gt_records)
    segments = activity_segments(gt_records)
    report.n_segments = len(segments)

    # pair up every inference with the mapped subject's scheduled label
    pairs: list[tuple[ActivityLabel, ActivityLabel]] = []   # (truth, predicted)
    scored: list[tuple[float, int, ActivityLabel, bool]] = []
    for rec in inferences:
        sid = track_map.get(rec.subject_id)
        if sid is None or sid not in timelines:
            continue
        truth = _label_at(timelines[sid], rec.timestamp)
        if truth is None:
            continue
        pairs.append((truth, rec.label))
        scored.append((rec.timestamp, sid, rec.label, rec.label is truth))

    by_scale: dict[str, float | None] = {}
    for scale in ScaleClass:
        sub = [(t, p) for t, p in pairs if scale_of(t) is scale]
        if sub:
            y_true = [_LABEL_INDEX[t] for t, _ in sub]
            y_pred = [_LABEL_INDEX[p] for _, p in sub]
            by_scale[scale.name.lower()] = weighted_f1(y_true, y_pred,
                                                       len(ALL_LABELS))
        else:
            by_scale[scale.name.lower()] = None
    report.weighted_f1_by_scale = by_scale

    if pairs:
        y_true = [_LABEL_INDEX[t] for t, _ in pairs]
        y_pred = [_LABEL_INDEX[p] for _, p in pairs]
        f1 = per_class_f1(y_true, y_pred, len(ALL_LABELS))
        support = set(y_true)
        report.per_activity_f1 = {ALL_LABELS[i].value: float(f1[i])
                                  for i in sorted(support)}

    switch_times = [r.timestamp for r in transitions
                    if r.reason is not None]
    for seg in segments:
        hits = [(t, correct) for t, sid, _lbl, correct in scored
                if sid == seg.subject_id and seg.start < t <= seg.end]
        correct_ts = sorted(t for t, c in hits if c)
        seg.n_correct = len(correct_ts)
        if correct_ts:
            seg.first_correct = correct_ts[0]
            seg.switched = any(seg.start < st <= seg.first_correct
                               for st in switch_times)
    hit_rates = [seg.n_correct / (seg.end - seg.start) for seg in segments]
    if hit_rates:
        report.avg_hits_per_second = sum(hit_rates) / len(hit_rates)
    report.segments_hit = sum(1 for seg in segments if seg.n_correct > 0)

    responses = [(seg.first_correct - seg.start, seg.switched)
                 for seg in segments if seg.first_correct is not None]
    if responses:
        report.avg_response_time_s = sum(r for r, _ in responses) / len(responses)
        with_sw = [r for r, sw in responses if sw]
        without = [r for r, sw in responses if not sw]
        if with_sw:
            report.avg_response_with_switch_s = sum(with_sw) / len(with_sw)
        if without:
            report.avg_response_without_switch_s = sum(without) / len(without)

    mae, frac = localization_mae(track_history, gt_records)
    report.localization_mae_m = mae
    report.matched_fraction = frac
    return report
