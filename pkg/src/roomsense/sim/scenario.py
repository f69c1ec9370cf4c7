"""Scenario description and its on-disk format.

A scenario file is plain text: the first line is the format header
``mars-scenario v1``; the remainder is a YAML mapping validated against a
closed schema (unknown keys are rejected). Distances in meters, times in
seconds, angles in degrees in the file (radians in memory).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..errors import ScenarioError
from ..labels import ActivityLabel

SCENARIO_HEADER = "mars-scenario v1"
MAX_SUBJECT_SPEED = 1.5  # m/s, indoor locomotion cap


def _as_xy(value, what: str) -> tuple[float, float]:
    try:
        x, y = value
        return float(x), float(y)
    except (TypeError, ValueError):
        raise ScenarioError(f"{what} must be an [x, y] pair, got {value!r}") from None


def point_in_polygon(point: tuple[float, float],
                     polygon: list[tuple[float, float]]) -> bool:
    """Ray-casting test; points on an edge count as inside."""
    x, y = point
    inside = False
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        # on-edge check via collinearity and bounding box
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        if (abs(cross) < 1e-12
                and min(x1, x2) - 1e-12 <= x <= max(x1, x2) + 1e-12
                and min(y1, y2) - 1e-12 <= y <= max(y1, y2) + 1e-12):
            return True
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_cross:
                inside = not inside
    return inside


@dataclass(frozen=True)
class Reflector:
    """Flat specular surface (wall segment) producing mirror-image ghosts."""

    a: tuple[float, float]
    b: tuple[float, float]
    gain: float = 0.3  # one-way amplitude factor

    def __post_init__(self):
        if not 0.0 < self.gain < 1.0:
            raise ScenarioError(f"reflector gain {self.gain} outside (0, 1)")
        if math.dist(self.a, self.b) < 1e-9:
            raise ScenarioError("degenerate reflector segment")


@dataclass(frozen=True)
class Clutter:
    position: tuple[float, float]
    reflectivity: float = 1.0

    def __post_init__(self):
        if self.reflectivity <= 0:
            raise ScenarioError("clutter reflectivity must be positive")


@dataclass
class SubjectScript:
    """Waypoint path plus an activity schedule for one subject.

    waypoints: [(t, x, y)] piecewise-linear; held flat outside the span.
    activities: [(t0, t1, label)] non-overlapping; gaps mean idle (no label).
    """

    name: str
    waypoints: list[tuple[float, float, float]]
    activities: list[tuple[float, float, ActivityLabel]]
    reflectivity_scale: float = 1.0

    def __post_init__(self):
        if not self.waypoints:
            raise ScenarioError(f"subject {self.name}: needs at least one waypoint")
        times = [w[0] for w in self.waypoints]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ScenarioError(f"subject {self.name}: waypoint times must increase")
        for (t1, x1, y1), (t2, x2, y2) in zip(self.waypoints, self.waypoints[1:]):
            speed = math.hypot(x2 - x1, y2 - y1) / (t2 - t1)
            if speed > MAX_SUBJECT_SPEED + 1e-9:
                raise ScenarioError(
                    f"subject {self.name}: implied speed {speed:.2f} m/s exceeds "
                    f"{MAX_SUBJECT_SPEED}")
        spans = sorted((a[0], a[1]) for a in self.activities)
        for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
            if s2 < e1:
                raise ScenarioError(f"subject {self.name}: overlapping activities")
        if any(e <= s for s, e, _ in self.activities):
            raise ScenarioError(f"subject {self.name}: empty activity span")

    def position_at(self, t: float) -> tuple[float, float]:
        wp = self.waypoints
        if t <= wp[0][0]:
            return wp[0][1], wp[0][2]
        if t >= wp[-1][0]:
            return wp[-1][1], wp[-1][2]
        for (t1, x1, y1), (t2, x2, y2) in zip(wp, wp[1:]):
            if t1 <= t <= t2:
                a = (t - t1) / (t2 - t1)
                return x1 + a * (x2 - x1), y1 + a * (y2 - y1)
        raise AssertionError("unreachable")

    def velocity_at(self, t: float) -> tuple[float, float]:
        wp = self.waypoints
        if t < wp[0][0] or t > wp[-1][0]:
            return 0.0, 0.0
        for (t1, x1, y1), (t2, x2, y2) in zip(wp, wp[1:]):
            if t1 <= t <= t2:
                dt = t2 - t1
                return (x2 - x1) / dt, (y2 - y1) / dt
        return 0.0, 0.0

    def label_at(self, t: float) -> ActivityLabel | None:
        for t0, t1, label in self.activities:
            if t0 <= t < t1:
                return label
        return None

    @property
    def end_time(self) -> float:
        t_wp = self.waypoints[-1][0]
        t_act = max((a[1] for a in self.activities), default=0.0)
        return max(t_wp, t_act)


@dataclass
class Scenario:
    room: list[tuple[float, float]]
    radar_position: tuple[float, float]
    radar_boresight: float  # rad, global frame
    subjects: list[SubjectScript]
    reflectors: list[Reflector] = field(default_factory=list)
    clutters: list[Clutter] = field(default_factory=list)
    seed: int = 0
    noise_std: float = 0.1        # 20 dB SNR for reflectivity 1 at 1 m
    snr_ref_db: float = 20.0
    occlusion_gain: float = 0.1   # amplitude factor for shadowed scatterers
    occlusion_radius: float = 0.25
    duration: float | None = None

    def __post_init__(self):
        if len(self.room) < 3:
            raise ScenarioError("room polygon needs at least 3 vertices")
        if not point_in_polygon(self.radar_position, self.room):
            raise ScenarioError("radar must sit inside the room")
        for c in self.clutters:
            if not point_in_polygon(c.position, self.room):
                raise ScenarioError(f"clutter at {c.position} outside the room")
        for s in self.subjects:
            for t, x, y in s.waypoints:
                if not point_in_polygon((x, y), self.room):
                    raise ScenarioError(
                        f"subject {s.name}: waypoint ({x}, {y}) outside the room")
        if self.noise_std < 0:
            raise ScenarioError("noise_std must be non-negative")
        if not 0.0 <= self.occlusion_gain <= 1.0:
            raise ScenarioError("occlusion_gain must sit in [0, 1]")
        if self.duration is None:
            self.duration = max((s.end_time for s in self.subjects), default=0.0)
        if self.duration <= 0:
            raise ScenarioError("scenario duration must be positive")


# -- file format --------------------------------------------------------------

_TOP_KEYS = {"room", "radar", "subjects", "reflectors", "clutters", "seed",
             "noise_std", "occlusion_gain", "duration"}
_RADAR_KEYS = {"position", "boresight_deg"}
_SUBJECT_KEYS = {"name", "waypoints", "activities", "reflectivity_scale"}
_REFLECTOR_KEYS = {"a", "b", "gain"}
_CLUTTER_KEYS = {"position", "reflectivity"}


def _check_keys(mapping: dict, allowed: set, where: str):
    unknown = set(mapping) - allowed
    if unknown:
        raise ScenarioError(f"unknown key(s) {sorted(unknown)} in {where}")


def loads_scenario(text: str) -> Scenario:
    lines = text.splitlines()
    if not lines or lines[0].strip() != SCENARIO_HEADER:
        raise ScenarioError(f"first line must read '{SCENARIO_HEADER}'")
    try:
        body = yaml.safe_load("\n".join(lines[1:])) or {}
    except yaml.YAMLError as exc:
        raise ScenarioError(f"scenario body is not valid YAML: {exc}") from None
    if not isinstance(body, dict):
        raise ScenarioError("scenario body must be a mapping")
    _check_keys(body, _TOP_KEYS, "scenario")
    for required in ("room", "radar", "subjects"):
        if required not in body:
            raise ScenarioError(f"missing required key '{required}'")

    radar = body["radar"]
    _check_keys(radar, _RADAR_KEYS, "radar")
    subjects = []
    for raw in body["subjects"]:
        _check_keys(raw, _SUBJECT_KEYS, f"subject {raw.get('name', '?')}")
        activities = []
        for t0, t1, name in raw.get("activities", []):
            try:
                label = ActivityLabel(name)
            except ValueError:
                raise ScenarioError(f"unknown activity '{name}'") from None
            activities.append((float(t0), float(t1), label))
        subjects.append(SubjectScript(
            name=str(raw["name"]),
            waypoints=[(float(t), float(x), float(y))
                       for t, x, y in raw["waypoints"]],
            activities=activities,
            reflectivity_scale=float(raw.get("reflectivity_scale", 1.0)),
        ))
    reflectors = []
    for raw in body.get("reflectors", []):
        _check_keys(raw, _REFLECTOR_KEYS, "reflector")
        reflectors.append(Reflector(a=_as_xy(raw["a"], "reflector.a"),
                                    b=_as_xy(raw["b"], "reflector.b"),
                                    gain=float(raw.get("gain", 0.3))))
    clutters = []
    for raw in body.get("clutters", []):
        _check_keys(raw, _CLUTTER_KEYS, "clutter")
        clutters.append(Clutter(position=_as_xy(raw["position"], "clutter.position"),
                                reflectivity=float(raw.get("reflectivity", 1.0))))

    return Scenario(
        room=[_as_xy(v, "room vertex") for v in body["room"]],
        radar_position=_as_xy(radar["position"], "radar.position"),
        radar_boresight=math.radians(float(radar.get("boresight_deg", 0.0))),
        subjects=subjects,
        reflectors=reflectors,
        clutters=clutters,
        seed=int(body.get("seed", 0)),
        noise_std=float(body.get("noise_std", 0.1)),
        occlusion_gain=float(body.get("occlusion_gain", 0.1)),
        duration=float(body["duration"]) if "duration" in body else None,
    )


def load_scenario(path: str | Path) -> Scenario:
    return loads_scenario(Path(path).read_text())


def dumps_scenario(s: Scenario) -> str:
    body = {
        "room": [list(v) for v in s.room],
        "radar": {"position": list(s.radar_position),
                  "boresight_deg": math.degrees(s.radar_boresight)},
        "seed": s.seed,
        "noise_std": s.noise_std,
        "occlusion_gain": s.occlusion_gain,
        "duration": s.duration,
        "subjects": [{
            "name": sub.name,
            "waypoints": [list(w) for w in sub.waypoints],
            "activities": [[t0, t1, label.value]
                           for t0, t1, label in sub.activities],
            "reflectivity_scale": sub.reflectivity_scale,
        } for sub in s.subjects],
        "reflectors": [{"a": list(r.a), "b": list(r.b), "gain": r.gain}
                       for r in s.reflectors],
        "clutters": [{"position": list(c.position), "reflectivity": c.reflectivity}
                     for c in s.clutters],
    }
    return SCENARIO_HEADER + "\n" + yaml.safe_dump(body, sort_keys=False)


def dump_scenario(s: Scenario, path: str | Path):
    Path(path).write_text(dumps_scenario(s))
