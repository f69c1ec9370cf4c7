"""Run-evaluation scoring: segments, track mapping, MAE, response times."""
import math

import numpy as np
import pytest

from roomsense.labels import ActivityLabel as A
from roomsense.labels import ScaleClass
from roomsense.modes import Mode, TransitionReason
from roomsense.pipeline.metrics import (activity_segments, compute_metrics,
                                        localization_mae,
                                        map_tracks_to_subjects,
                                        rebuild_track_history)
from roomsense.logio.framelog import (GroundTruthRecord, InferenceLogRecord,
                                      PointcloudRecord, RangeDopplerRecord,
                                      StateTransitionRecord)
from roomsense.radar.config import Profile

LOC = Profile.LOCALIZATION


def gt(t, *entries):
    return GroundTruthRecord(timestamp=t, profile=LOC, entries=tuple(entries))


def test_activity_segments_split_on_label_change():
    records = [
        gt(0.0, (1, 0, 0, A.WALKING, ScaleClass.TRACK_SENSE),
               (2, 5, 5, A.SITTING, ScaleClass.MICRO)),
        gt(1.0, (1, 0, 0, A.WALKING, ScaleClass.TRACK_SENSE),
               (2, 5, 5, A.SITTING, ScaleClass.MICRO)),
        gt(2.0, (1, 0, 0, A.RUNNING, ScaleClass.TRACK_SENSE),
               (2, 5, 5, A.SITTING, ScaleClass.MICRO)),
        gt(3.0, (1, 0, 0, A.RUNNING, ScaleClass.TRACK_SENSE),
               (2, 5, 5, A.SITTING, ScaleClass.MICRO)),
        gt(4.0, (1, 0, 0, None, None),
               (2, 5, 5, A.SITTING, ScaleClass.MICRO)),
        gt(5.0, (1, 0, 0, A.SQUATS, ScaleClass.MACRO),
               (2, 5, 5, A.SITTING, ScaleClass.MICRO)),
    ]
    segs = activity_segments(records)
    rows = [(s.subject_id, s.label, s.start, s.end) for s in segs]
    # unlabeled spans vanish and a label on the final sample has zero length
    assert rows == [
        (1, A.WALKING, 0.0, 2.0),
        (1, A.RUNNING, 2.0, 4.0),
        (2, A.SITTING, 0.0, 5.0),
    ]


def test_activity_segments_empty():
    assert activity_segments([]) == []


def test_map_tracks_to_subjects_majority_and_gate():
    records = [gt(float(t), (1, 2.0, 2.0, None, None), (2, 5.0, 5.0, None, None))
               for t in range(3)]
    history = [
        # track 7: twice near subject 1, once near subject 2 -> majority 1
        (0.0, 7, 2.1, 2.0), (1.0, 7, 2.0, 1.9), (2.0, 7, 5.1, 5.0),
        # track 8: always near subject 2
        (0.0, 8, 4.9, 5.0), (1.0, 8, 5.0, 5.1),
        # track 9: never within the 1 m vote gate
        (0.0, 9, 40.0, 40.0), (1.0, 9, 3.5, 3.5),
        # timestamp with no ground truth row: ignored
        (9.9, 8, 2.0, 2.0),
    ]
    assert map_tracks_to_subjects(history, records) == {7: 1, 8: 2}


def test_map_tracks_tie_prefers_lower_subject_id():
    records = [gt(0.0, (1, 2.0, 2.0, None, None)),
               gt(1.0, (2, 5.0, 5.0, None, None))]
    history = [(0.0, 3, 2.0, 2.0), (1.0, 3, 5.0, 5.0)]
    assert map_tracks_to_subjects(history, records) == {3: 1}


def test_localization_mae_matches_greedily_and_gates():
    records = [gt(0.0, (1, 0.0, 0.0, None, None), (2, 0.5, 0.0, None, None))]
    # one track between two subjects: greedy takes the closer, leaves the other
    history = [(0.0, 5, 0.1, 0.0)]
    mae, frac = localization_mae(history, records)
    assert mae == pytest.approx(0.1)
    assert frac == pytest.approx(0.5)

    # a track beyond MAE_GATE_M is nobody's estimate
    far = [(0.0, 5, 30.0, 0.0)]
    mae, frac = localization_mae(far, records)
    assert mae is None and frac == 0.0

    # ground truth rows at timestamps without tracking frames do not count
    sparse = [gt(0.0, (1, 1.0, 0.0, None, None)),
              gt(1.0, (1, 9.0, 9.0, None, None))]
    mae, frac = localization_mae([(0.0, 5, 1.2, 0.0)], sparse)
    assert mae == pytest.approx(0.2)
    assert frac == pytest.approx(1.0)

    assert localization_mae([], records) == (None, None)
    assert localization_mae(history, []) == (None, None)


def test_localization_mae_pairs_per_frame():
    records = [gt(0.0, (1, 1.0, 0.0, None, None), (2, 4.0, 0.0, None, None))]
    history = [(0.0, 5, 1.3, 0.0), (0.0, 6, 4.5, 0.0)]
    mae, frac = localization_mae(history, records)
    assert mae == pytest.approx((0.3 + 0.5) / 2)
    assert frac == pytest.approx(1.0)


def make_run():
    """Two static subjects, one waving (macro) and one sitting (micro)."""
    records = []
    records.append(StateTransitionRecord(0.0, LOC, Mode.LOCALIZE,
                                         TransitionReason.STARTUP))
    for t in range(10):
        records.append(gt(float(t),
                          (1, 2.0, 2.0, A.WAVING, ScaleClass.MACRO),
                          (2, 5.0, 3.0, A.SITTING, ScaleClass.MICRO)))
    records.append(StateTransitionRecord(1.5, Profile.MICRO, Mode.MICRO_SENSE,
                                         TransitionReason.SCALE_DECISION))
    records.append(InferenceLogRecord(1.0, Profile.MICRO, 4, A.SITTING, 0.9))
    records.append(InferenceLogRecord(2.0, Profile.MACRO, 3, A.WAVING, 0.8))
    records.append(InferenceLogRecord(4.0, Profile.MACRO, 3, A.CLAPPING, 0.6))
    records.append(InferenceLogRecord(5.0, Profile.MACRO, 99, A.WAVING, 0.5))
    records.append(InferenceLogRecord(6.0, Profile.MICRO, 4, A.SITTING, 0.9))
    history = []
    for t in range(10):
        history.append((float(t), 3, 2.05, 2.0))     # 0.05 m off subject 1
        history.append((float(t), 4, 5.0, 3.1))      # 0.10 m off subject 2
    return records, history


def test_compute_metrics_handcrafted_run():
    records, history = make_run()
    report = compute_metrics(records, history)

    assert report.n_inferences == 5
    assert report.n_segments == 2
    assert report.segments_hit == 2

    # mis-prediction halves waving recall; sitting is perfect
    assert report.weighted_f1_by_scale["track_sense"] is None
    assert report.weighted_f1_by_scale["macro"] == pytest.approx(2 / 3)
    assert report.weighted_f1_by_scale["micro"] == pytest.approx(1.0)
    assert report.per_activity_f1 == {
        "waving": pytest.approx(2 / 3),
        "sitting": pytest.approx(1.0),
    }

    # waving first hit at t=2 after the 1.5 s switch; sitting hit before it
    assert report.avg_response_time_s == pytest.approx(1.5)
    assert report.avg_response_with_switch_s == pytest.approx(2.0)
    assert report.avg_response_without_switch_s == pytest.approx(1.0)

    # waving: 1 correct over 9 s; sitting: 2 correct over 9 s
    assert report.avg_hits_per_second == pytest.approx((1 / 9 + 2 / 9) / 2)

    assert report.localization_mae_m == pytest.approx(0.075)
    assert report.matched_fraction == pytest.approx(1.0)

    d = report.to_dict()
    assert d["n_segments"] == 2
    assert d["weighted_f1_by_scale"]["macro"] == pytest.approx(2 / 3)


def test_compute_metrics_without_ground_truth():
    records, _ = make_run()
    inferences = [r for r in records if isinstance(r, InferenceLogRecord)]
    report = compute_metrics(inferences, [])
    assert report.n_inferences == 5
    assert report.n_segments == 0
    assert report.weighted_f1_by_scale == {}
    assert report.avg_response_time_s is None
    assert report.localization_mae_m is None


def test_compute_metrics_without_inferences():
    records, history = make_run()
    quiet = [r for r in records if not isinstance(r, InferenceLogRecord)]
    report = compute_metrics(quiet, history)
    assert report.n_inferences == 0
    assert report.weighted_f1_by_scale["macro"] is None
    assert report.avg_response_time_s is None
    assert report.avg_hits_per_second == 0.0
    assert report.segments_hit == 0
    assert report.localization_mae_m == pytest.approx(0.075)


# -- track-history rebuild ---------------------------------------------------


def loc_frame(t, center, rng):
    """One localization frame: an empty map plus a 5-point blob at center."""
    power = np.zeros((16, 256))
    pts = np.zeros((5, 5))
    pts[:, 0] = center[0] + rng.uniform(-0.05, 0.05, 5)
    pts[:, 1] = center[1] + rng.uniform(-0.05, 0.05, 5)
    pts[:, 3] = 0.5
    pts[:, 4] = 1.0
    return [RangeDopplerRecord(t, LOC, 0.0, power),
            PointcloudRecord(t, LOC, 0.0, pts)]


def test_rebuild_track_history_skips_and_restarts():
    rng = np.random.default_rng(7)
    records = [StateTransitionRecord(0.0, LOC, Mode.LOCALIZE,
                                     TransitionReason.STARTUP)]
    for t in (0.01, 0.04, 0.08):
        records += loc_frame(t, (2.0, 2.0), rng)
    records.append(StateTransitionRecord(0.10, Profile.MACRO, Mode.MACRO_SENSE,
                                         TransitionReason.SCALE_DECISION))
    # sensing-mode frames: wrong profile, then right profile but wrong mode
    power = np.zeros((16, 256))
    records.append(RangeDopplerRecord(0.15, Profile.MACRO, 0.0, power))
    records.append(PointcloudRecord(0.15, Profile.MACRO, 0.0, np.zeros((0, 5))))
    records += loc_frame(0.20, (2.0, 2.0), rng)
    records.append(StateTransitionRecord(0.30, LOC, Mode.LOCALIZE,
                                         TransitionReason.REVERT_ACTIVITY))
    records += loc_frame(0.50, (2.0, 2.0), rng)        # inside dead window
    records += loc_frame(0.85, (2.0, 2.0), rng)        # first live frame again
    # pointcloud whose range-doppler partner is missing: dropped
    pts = np.zeros((5, 5))
    pts[:, 0], pts[:, 1] = 2.0, 2.0
    records.append(PointcloudRecord(0.90, LOC, 0.0, pts))

    history = rebuild_track_history(records, dead_time_s=0.5)
    by_t = {}
    for t, tid, x, y in history:
        by_t.setdefault(t, []).append(tid)
        assert math.hypot(x - 2.0, y - 2.0) < 0.2
    # three pre-switch frames, then only the post-dead-window frame
    assert sorted(by_t) == [0.01, 0.04, 0.08, 0.85]
    assert by_t[0.01] == [0]
    # clustering restarted: the old track coasts while a fresh id takes over
    assert by_t[0.85] == [0, 1]


def test_rebuild_track_history_empty():
    assert rebuild_track_history([]) == []
