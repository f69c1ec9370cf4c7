"""Mode state machine: localize -> decide scale -> sense -> revert.

In Localize the radar tracks everyone and a forest votes each subject's
activity scale once per second. Majority vote (any walker wins outright)
picks the sensing profile; sensing slices each subject's range window,
stacks one second of heatmaps and runs the matching CNN. Reverts return to
Localize whenever sensing stops making sense: locomotion predicted, doppler
energy outside the expected envelope, or every target lost.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from ..cnn.model import CnnModel
from ..cnn.slicing import slice_subject, stack_frames, subject_range_bins
from ..errors import DomainError
from ..labels import (MACRO_LABELS, MICRO_LABELS, ActivityLabel, ScaleClass,
                      scale_of)
from ..modes import Mode, TransitionReason
from ..radar.config import RadarConfig, profile_config
from ..radar.frames import RangeDopplerMap
from ..scale import ScaleForest, extract_features
from ..tracking import ServoState, Tracker, remove_static, servo_command
from .frontend import ProcessedFrame
from ..logio.framelog import (InferenceLogRecord, LogRecord,
                              StateTransitionRecord)

WINDOW_S = 1.0               # scale-vote cadence in Localize
QUIET_TRACK_S = 1.0          # pointless track age that votes Micro
ENVELOPE_CELL_FACTOR = 8.0   # cell power vs median to count as occupied
ENVELOPE_BREACH_FRAC = 0.5   # occupied doppler fraction meaning macro motion
SPEED_LABEL_MIN = 0.5        # m/s, below this no walking/running label
RUNNING_SPEED = 1.2          # m/s, walking/running boundary


@dataclass(frozen=True)
class SenseTarget:
    x: float
    y: float
    range_m: float
    scale: ScaleClass


class Orchestrator:
    """Single-threaded mode driver; one step per processed frame."""

    def __init__(self, radar_position: tuple[float, float],
                 boresight: float = 0.0, rf: ScaleForest | None = None,
                 macro_cnn: CnnModel | None = None,
                 micro_cnn: CnnModel | None = None,
                 dead_time_s: float = 0.5, share_dwell_s: float = 3.0,
                 hysteresis_s: float = 2.0):
        self.radar_position = radar_position
        self.rf = rf
        self.macro_cnn = macro_cnn
        self.micro_cnn = micro_cnn
        self.dead_time_s = dead_time_s
        self.share_dwell_s = share_dwell_s
        self.hysteresis_s = hysteresis_s

        self.mode = Mode.LOCALIZE
        self.config: RadarConfig = profile_config(self.mode.profile)
        loc = self.config
        self.tracker = Tracker(fps=loc.fps, sigma_meas=loc.range_resolution_m)
        self.servo = ServoState(theta=boresight)
        self.track_history: list[tuple[float, int, float, float]] = []

        self.window_anchor: float | None = None
        self.subject_scales: dict[int, ScaleClass] = {}
        self.sense_targets: dict[int, SenseTarget] = {}
        self.dead_until = -math.inf
        self.revert_t = -math.inf
        self.share_t = -math.inf
        self._stacks: dict[int, deque] = {}
        self._miss: dict[int, int] = {}
        self._breach: dict[int, int] = {}
        self._started = False

    # -- public entry ---------------------------------------------------------

    def step(self, pf: ProcessedFrame) -> list[LogRecord]:
        if pf.config.profile is not self.mode.profile:
            raise DomainError(f"frame profile {pf.config.profile.value} does not "
                              f"match mode {self.mode.name}")
        t = pf.timestamp
        out: list[LogRecord] = []
        if not self._started:
            self._started = True
            out.append(StateTransitionRecord(t, self.mode.profile, self.mode,
                                             TransitionReason.STARTUP))
        if t < self.dead_until:
            return out
        if self.mode is Mode.LOCALIZE:
            out.extend(self._step_localize(pf, t))
        else:
            out.extend(self._step_sense(pf, t))
        return out

    def detect_revert(self, recent_labels: list[ActivityLabel],
                      breach_frames: int, targets_left: int,
                      ) -> tuple[bool, TransitionReason | None]:
        """Revert test over the latest sensing evidence."""
        if targets_left == 0:
            return True, TransitionReason.REVERT_EMPTY
        if any(lbl in (ActivityLabel.WALKING, ActivityLabel.RUNNING)
               for lbl in recent_labels):
            return True, TransitionReason.REVERT_ACTIVITY
        if breach_frames >= self.config.fps * 1.0:
            return True, TransitionReason.REVERT_ENERGY
        return False, None

    # -- Localize -------------------------------------------------------------

    def _step_localize(self, pf: ProcessedFrame, t: float) -> list[LogRecord]:
        out: list[LogRecord] = []
        tracks = self.tracker.step(pf.global_points, t)
        self.servo = servo_command(tracks, self.servo, self.radar_position, t)
        for tid in sorted(tracks):
            tr = tracks[tid]
            self.track_history.append((t, tid, tr.state[0], tr.state[1]))
            if tr.missed_updates == 0 and tr.speed >= SPEED_LABEL_MIN:
                label = (ActivityLabel.RUNNING if tr.speed >= RUNNING_SPEED
                         else ActivityLabel.WALKING)
                out.append(InferenceLogRecord(t, self.mode.profile, tid,
                                              label, 1.0))
        if self.window_anchor is None:
            self.window_anchor = t
        elif t - self.window_anchor >= WINDOW_S - 1e-9:
            self.window_anchor = t
            out.extend(self._scale_decision(t))
        return out

    def _scale_votes(self, t: float) -> dict[int, ScaleClass]:
        votes: dict[int, ScaleClass] = {}
        if self.rf is not None:
            for cluster in self.tracker.clusters:
                if cluster.cluster_id is None or len(cluster.points) < 2:
                    continue
                fv = extract_features(cluster.points, cluster.cluster_id,
                                      window_start=t - WINDOW_S)
                votes[cluster.cluster_id], _ = self.rf.predict_one(fv)
        quiet = QUIET_TRACK_S * self.config.fps
        for tid, tr in self.tracker.tracks.items():
            # silent but live track: someone went (or stayed) small-motion
            if tid not in votes and tr.missed_updates >= quiet:
                votes[tid] = ScaleClass.MICRO
        self.subject_scales = dict(sorted(votes.items()))
        return self.subject_scales

    def _scale_decision(self, t: float) -> list[LogRecord]:
        votes = self._scale_votes(t)
        if not votes or self.rf is None:
            return []
        if any(v is ScaleClass.TRACK_SENSE for v in votes.values()):
            return []
        if t - self.revert_t < self.hysteresis_s:
            return []
        n_macro = sum(v is ScaleClass.MACRO for v in votes.values())
        n_micro = sum(v is ScaleClass.MICRO for v in votes.values())
        if n_macro == n_micro:
            return []  # tie: keep tracking
        target = Mode.MACRO_SENSE if n_macro > n_micro else Mode.MICRO_SENSE
        return [self._switch(t, target, TransitionReason.SCALE_DECISION, votes)]

    def _switch(self, t: float, target: Mode, reason: TransitionReason,
                votes: dict[int, ScaleClass] | None = None) -> LogRecord:
        if votes is not None:
            self.sense_targets = {}
            for tid, scale in votes.items():
                if scale is ScaleClass.TRACK_SENSE:
                    continue
                pos = self._subject_position(tid)
                if pos is None:
                    continue
                rng = math.hypot(pos[0] - self.radar_position[0],
                                 pos[1] - self.radar_position[1])
                self.sense_targets[tid] = SenseTarget(pos[0], pos[1], rng, scale)
        self.mode = target
        self.config = profile_config(target.profile)
        self.dead_until = t + self.dead_time_s
        self.share_t = t
        self._stacks = {}
        self._miss = {}
        self._breach = {}
        self.window_anchor = None
        self._aim_at_targets()
        return StateTransitionRecord(t, target.profile, target, reason)

    def _subject_position(self, tid: int) -> tuple[float, float] | None:
        if tid in self.tracker.tracks:
            return self.tracker.tracks[tid].position
        for cluster in self.tracker.clusters:
            if cluster.cluster_id == tid:
                return cluster.centroid
        return None

    def _aim_at_targets(self):
        # reconfiguration dead time covers the mechanical slew, so snap
        if not self.sense_targets:
            return
        xs = [tg.x for tg in self.sense_targets.values()]
        ys = [tg.y for tg in self.sense_targets.values()]
        theta = math.atan2(sum(ys) / len(ys) - self.radar_position[1],
                           sum(xs) / len(xs) - self.radar_position[0])
        self.servo = replace(self.servo, theta=theta, rotating=False,
                             target_id=None)

    # -- sensing ----------------------------------------------------------------

    def _sense_scale(self) -> ScaleClass:
        return (ScaleClass.MACRO if self.mode is Mode.MACRO_SENSE
                else ScaleClass.MICRO)

    def _step_sense(self, pf: ProcessedFrame, t: float) -> list[LogRecord]:
        out: list[LogRecord] = []
        scale = self._sense_scale()
        labels = MACRO_LABELS if scale is ScaleClass.MACRO else MICRO_LABELS
        cnn = self.macro_cnn if scale is ScaleClass.MACRO else self.micro_cnn
        eligible = sorted(tid for tid, tg in self.sense_targets.items()
                          if tg.scale is scale)
        found = dict(subject_range_bins(
            [(tid, self.sense_targets[tid].range_m) for tid in eligible],
            pf.rd_map))
        cleaned = remove_static(pf.rd_map)
        revert_labels: list[ActivityLabel] = []
        max_breach = 0
        for tid in eligible:
            if tid not in found:
                self._miss[tid] = self._miss.get(tid, 0) + 1
                self._stacks.pop(tid, None)
                if self._miss[tid] >= self.config.fps * 1.0:
                    del self.sense_targets[tid]  # target went dark
                continue
            self._miss[tid] = 0
            if scale is ScaleClass.MICRO:
                if self._envelope_breach(cleaned, found[tid]):
                    self._breach[tid] = self._breach.get(tid, 0) + 1
                else:
                    self._breach[tid] = 0
                max_breach = max(max_breach, self._breach[tid])
            stack = self._stacks.setdefault(
                tid, deque(maxlen=self.config.stack_channels))
            stack.append(slice_subject(pf.rd_map, found[tid]))
            if cnn is not None and len(stack) == stack.maxlen:
                hs = stack_frames(list(stack), subject_id=tid)
                proba = cnn.predict_proba(hs.tensor[None].astype(np.float32))[0]
                k = int(np.argmax(proba))
                label = labels[k]
                out.append(InferenceLogRecord(t, self.mode.profile, tid, label,
                                              float(proba[k])))
                if scale is ScaleClass.MACRO:
                    revert_labels.append(label)

        live = sorted(tid for tid, tg in self.sense_targets.items()
                      if tg.scale is scale)
        do_revert, reason = self.detect_revert(revert_labels, max_breach,
                                               len(live))
        other = [tid for tid, tg in self.sense_targets.items()
                 if tg.scale is not scale]
        if do_revert and reason is TransitionReason.REVERT_EMPTY and other:
            # nothing left at this scale but the other one still waits
            target = (Mode.MICRO_SENSE if self.mode is Mode.MACRO_SENSE
                      else Mode.MACRO_SENSE)
            out.append(self._switch(t, target, TransitionReason.TIME_SHARE))
        elif do_revert:
            out.append(self._revert(t, reason))
        elif other and t - self.share_t >= self.share_dwell_s:
            target = (Mode.MICRO_SENSE if self.mode is Mode.MACRO_SENSE
                      else Mode.MACRO_SENSE)
            out.append(self._switch(t, target, TransitionReason.TIME_SHARE))
        return out

    def _envelope_breach(self, cleaned: RangeDopplerMap, range_bin: int) -> bool:
        """Occupied-doppler fraction in the subject's columns vs whole map."""
        cfg = cleaned.config
        mid = cfg.doppler_bins // 2
        rows = np.abs(np.arange(cfg.doppler_bins) - mid) > cfg.clutter_halfwidth
        usable = cleaned.power[rows][:, : cfg.usable_range_bins + 1]
        noise = float(np.median(usable))
        lo, hi = max(0, range_bin - 1), min(cfg.range_bins, range_bin + 2)
        cells = cleaned.power[rows, lo:hi]
        if noise <= 0.0:
            return False
        frac = float((cells > ENVELOPE_CELL_FACTOR * noise).mean())
        return frac > ENVELOPE_BREACH_FRAC

    def _revert(self, t: float, reason: TransitionReason) -> LogRecord:
        self.mode = Mode.LOCALIZE
        self.config = profile_config(Mode.LOCALIZE.profile)
        self.dead_until = t + self.dead_time_s
        self.revert_t = t
        self.sense_targets = {}
        self._stacks = {}
        self._miss = {}
        self._breach = {}
        self.subject_scales = {}
        self.window_anchor = None
        self.tracker.restart_clustering()
        assert len(self.tracker.queue) == 0, "point queue must clear on revert"
        return StateTransitionRecord(t, Mode.LOCALIZE.profile, Mode.LOCALIZE,
                                     reason)
