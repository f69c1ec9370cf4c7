"""Labeled corpus generation for both classifiers.

CNN corpora are 1 s heatmap stacks of single-subject scenes sliced at the
scripted range; the scale-forest corpus runs the live detection chain over
walkers, macro actors and micro actors and labels each cluster's feature
window with the subject's scheduled scale.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterator

import numpy as np

from ..cnn.slicing import slice_subject, stack_frames
from ..errors import InsufficientDataError, ScenarioError
from ..labels import (MACRO_LABELS, MICRO_LABELS, ActivityLabel, ScaleClass)
from ..pipeline.frontend import process_frames
from ..radar.config import Profile, RadarConfig, profile_config
from ..radar.frames import RangeDopplerMap
from ..radar.dsp import rd_cube
from ..scale import extract_features
from ..sim.scenario import Scenario, SubjectScript
from ..sim.synth import motion_instances, synthesize_frame
from ..tracking import cluster_points
from .framelog import FrameLogWriter, RangeDopplerRecord, read_framelog

DEFAULT_ROOM = [(0.0, 0.0), (8.0, 0.0), (8.0, 6.0), (0.0, 6.0)]
RADAR_POSITION = (0.3, 3.0)

# micro activities with enough limb speed to detect in the localization
# profile; the rest are reached through the quiet-track fallback instead
VISIBLE_MICRO = (ActivityLabel.LAPTOP_TYPING, ActivityLabel.PHONE_TYPING,
                 ActivityLabel.PLAYING_GUITAR, ActivityLabel.EATING_FOOD,
                 ActivityLabel.COMBING_HAIR, ActivityLabel.BRUSHING_TEETH)
MACRO_ACTORS = tuple(lbl for lbl in MACRO_LABELS
                     if lbl not in (ActivityLabel.WALKING, ActivityLabel.RUNNING))


def _sample_position(rng: np.random.Generator, max_range: float,
                     min_range: float = 1.5) -> tuple[float, float]:
    """Spot inside the room, in front of the radar, within the main beam."""
    rx, ry = RADAR_POSITION
    while True:
        r = rng.uniform(min_range, max_range)
        bearing = rng.uniform(-0.7, 0.7)  # rad, well inside the +-60 deg FoV
        x, y = rx + r * math.cos(bearing), ry + r * math.sin(bearing)
        if 0.4 <= x <= 7.6 and 0.4 <= y <= 5.6:
            return x, y


def activity_scenario(label: ActivityLabel, seed: int, duration: float,
                      speed: float | None = None) -> Scenario:
    """Single-subject scene: stationary actor, or a walker on a shuttle path."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 7)))
    locomotion = label in (ActivityLabel.WALKING, ActivityLabel.RUNNING)
    if locomotion:
        if speed is None:
            speed = (rng.uniform(0.7, 1.1) if label is ActivityLabel.WALKING
                     else rng.uniform(1.25, 1.45))
        a = _sample_position(rng, 5.5, 2.0)
        while True:
            b = _sample_position(rng, 5.5, 2.0)
            if 2.0 <= math.hypot(b[0] - a[0], b[1] - a[1]) <= 4.5:
                break
        leg = math.hypot(b[0] - a[0], b[1] - a[1]) / speed
        waypoints, t, here, there = [(0.0, *a)], 0.0, a, b
        while t < duration:
            t += leg
            waypoints.append((t, *there))
            here, there = there, here
    else:
        # stationary actors sit closer than walkers roam: faint limb bands
        # fall as 1/r^4 and must stay clear of the noise floor
        pos = _sample_position(rng, 4.5)
        waypoints = [(0.0, *pos), (duration, *pos)]
    subject = SubjectScript(name="s0", waypoints=waypoints,
                            activities=[(0.0, duration, label)],
                            reflectivity_scale=float(rng.uniform(0.85, 1.2)))
    return Scenario(room=list(DEFAULT_ROOM), radar_position=RADAR_POSITION,
                    radar_boresight=0.0, subjects=[subject], seed=seed,
                    duration=duration)


def _rd_power(frames) -> RangeDopplerMap:
    cube = rd_cube(frames)
    return RangeDopplerMap(power=(np.abs(cube) ** 2).mean(axis=0),
                           config=frames[0].config,
                           timestamp=frames[0].timestamp,
                           radar_angle=frames[0].radar_angle)


def _boresight_to(scenario: Scenario, t: float) -> float:
    x, y = scenario.subjects[0].position_at(t)
    return math.atan2(y - scenario.radar_position[1],
                      x - scenario.radar_position[0])


def cnn_windows(scale: ScaleClass, windows_per_class: int, seed: int,
                windows_per_scenario: int = 10,
                ) -> Iterator[tuple[int, list[RangeDopplerMap]]]:
    """Yield (class index, sliced 1 s frame group) across balanced classes."""
    if scale is ScaleClass.MACRO:
        labels, cfg = MACRO_LABELS, profile_config(Profile.MACRO)
    elif scale is ScaleClass.MICRO:
        labels, cfg = MICRO_LABELS, profile_config(Profile.MICRO)
    else:
        raise ScenarioError("CNN corpora exist for macro and micro scales only")
    period = cfg.frame_period_s
    warmup = 1.0
    for li, label in enumerate(labels):
        need = windows_per_class
        k = 0
        while need > 0:
            take = min(windows_per_scenario, need)
            duration = warmup + take * 1.0 + 0.5
            sc = activity_scenario(label, seed=hash((seed, li, k)) & 0x7FFFFFFF,
                                   duration=duration)
            instances = motion_instances(sc)
            theta = _boresight_to(sc, warmup + take / 2.0)
            for w in range(take):
                maps = []
                for c in range(cfg.stack_channels):
                    t = warmup + w * 1.0 + c * period
                    frames, gt = synthesize_frame(sc, t, cfg, theta, instances)
                    rd = _rd_power(frames)
                    r = math.hypot(gt[0].x - sc.radar_position[0],
                                   gt[0].y - sc.radar_position[1])
                    b = int(round(r / cfg.range_resolution_m))
                    b = min(max(b, 0), cfg.usable_range_bins)
                    maps.append(slice_subject(rd, b))
                yield li, maps
            need -= take
            k += 1


def make_cnn_corpus(scale: ScaleClass, windows_per_class: int, seed: int = 0,
                    ) -> tuple[np.ndarray, np.ndarray, dict]:
    """In-memory stack corpus: (x [N, C, D, R] float32, y [N], manifest)."""
    xs, ys = [], []
    for li, maps in cnn_windows(scale, windows_per_class, seed):
        xs.append(stack_frames(maps).tensor)
        ys.append(li)
    labels = MACRO_LABELS if scale is ScaleClass.MACRO else MICRO_LABELS
    manifest = {"scale": scale.name.lower(),
                "classes": [lbl.value for lbl in labels],
                "windows_per_class": windows_per_class, "seed": seed}
    return np.stack(xs), np.array(ys, dtype=int), manifest


def write_cnn_dataset(out_dir, scale: ScaleClass, windows_per_class: int,
                      seed: int = 0) -> dict:
    """Frame log of sliced maps + label sidecar + manifest, one scale per dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = scale.name.lower()
    labels = MACRO_LABELS if scale is ScaleClass.MACRO else MICRO_LABELS
    cfg = profile_config(Profile.MACRO if scale is ScaleClass.MACRO
                         else Profile.MICRO)
    sidecar = []
    t_base = 0.0
    with FrameLogWriter(out / f"{name}.log") as writer:
        for li, maps in cnn_windows(scale, windows_per_class, seed):
            sidecar.append({"start": t_base, "label": labels[li].value,
                            "frames": len(maps)})
            for c, rd in enumerate(maps):
                writer.write(RangeDopplerRecord(
                    t_base + c * cfg.frame_period_s, cfg.profile,
                    rd.radar_angle, rd.power))
            t_base += 1.0
    manifest = {"scale": name, "classes": [lbl.value for lbl in labels],
                "windows_per_class": windows_per_class, "seed": seed,
                "windows": len(sidecar)}
    (out / f"{name}-labels.json").write_text(json.dumps(sidecar, indent=1))
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1))
    counts = {lbl.value: 0 for lbl in labels}
    for row in sidecar:
        counts[row["label"]] += 1
    if any(n == 0 for n in counts.values()):
        raise InsufficientDataError(f"empty class in dataset: {counts}")
    return manifest


def load_cnn_dataset(in_dir, scale: ScaleClass) -> tuple[np.ndarray, np.ndarray]:
    """Rebuild (x, y) stacks from a written dataset directory."""
    in_dir = Path(in_dir)
    name = scale.name.lower()
    labels = MACRO_LABELS if scale is ScaleClass.MACRO else MICRO_LABELS
    index = {lbl.value: i for i, lbl in enumerate(labels)}
    records = [r for r in read_framelog(in_dir / f"{name}.log")
               if isinstance(r, RangeDopplerRecord)]
    sidecar = json.loads((in_dir / f"{name}-labels.json").read_text())
    cfg = profile_config(records[0].profile)
    xs, ys, pos = [], [], 0
    for row in sidecar:
        group = records[pos:pos + row["frames"]]
        pos += row["frames"]
        maps = [RangeDopplerMap(power=r.power, config=cfg, timestamp=r.timestamp,
                                radar_angle=r.radar_angle) for r in group]
        xs.append(stack_frames(maps).tensor)
        ys.append(index[row["label"]])
    return np.stack(xs), np.array(ys, dtype=int)


# -- scale-forest corpus -------------------------------------------------------

SCALE_CLASS_LABELS: dict[ScaleClass, tuple[ActivityLabel, ...]] = {
    ScaleClass.TRACK_SENSE: (ActivityLabel.WALKING, ActivityLabel.RUNNING),
    ScaleClass.MACRO: MACRO_ACTORS,
    ScaleClass.MICRO: VISIBLE_MICRO,
}


def make_rf_corpus(windows_per_class: int, seed: int = 0,
                   scenario_s: float = 8.0,
                   ) -> tuple[np.ndarray, np.ndarray, dict]:
    """Feature windows from the live chain, labeled by scheduled scale."""
    cfg = profile_config(Profile.LOCALIZATION)
    period = cfg.frame_period_s
    xs, ys = [], []
    entries = []
    for scale, labels in SCALE_CLASS_LABELS.items():
        need, k = windows_per_class, 0
        while need > 0:
            if k > 4 * windows_per_class:
                raise InsufficientDataError(
                    f"{scale.name} scenes stopped yielding clusters "
                    f"({need} windows short)")
            label = labels[k % len(labels)]
            sc_seed = hash((seed, int(scale), k)) & 0x7FFFFFFF
            sc = activity_scenario(label, seed=sc_seed, duration=scenario_s)
            instances = motion_instances(sc)
            theta = _boresight_to(sc, scenario_s / 2.0)
            got = 0
            points = []
            window_end = 2.0  # 1 s fill + settle
            t = 1.0
            while t < scenario_s - 1e-9 and need > 0:
                frames, _ = synthesize_frame(sc, t, cfg, theta, instances)
                pf = process_frames(frames, radar_position=sc.radar_position)
                points.extend(pf.global_points)
                t += period
                if t >= window_end - 1e-9:
                    clusters = cluster_points(points)
                    if clusters:
                        best = max(clusters, key=lambda c: len(c.points))
                        fv = extract_features(best.points, cluster_id=0,
                                              window_start=window_end - 1.0)
                        xs.append(fv.values)
                        ys.append(int(scale))
                        need -= 1
                        got += 1
                    points = []
                    window_end += 1.0
            entries.append({"scale": scale.name.lower(), "label": label.value,
                            "seed": sc_seed, "windows": got})
            k += 1
    manifest = {"windows_per_class": windows_per_class, "seed": seed,
                "entries": entries}
    return np.array(xs), np.array(ys, dtype=int), manifest


def write_rf_dataset(out_dir, windows_per_class: int, seed: int = 0) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    x, y, manifest = make_rf_corpus(windows_per_class, seed)
    np.save(out / "rf-features.npy", x)
    np.save(out / "rf-labels.npy", y)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return manifest


def load_rf_dataset(in_dir) -> tuple[np.ndarray, np.ndarray]:
    in_dir = Path(in_dir)
    return (np.load(in_dir / "rf-features.npy"),
            np.load(in_dir / "rf-labels.npy"))
