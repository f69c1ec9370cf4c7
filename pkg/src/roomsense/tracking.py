"""Multi-subject tracking behind a rotating radar.

Stages per frame: drop static returns, rotate detections into the fixed
global frame, pool one second of points, density-cluster them, carry cluster
ids across frames, suppress wall-mirror ghosts, and smooth each subject with
a constant-velocity Kalman filter. A servo policy steers the boresight so
every track periodically sits inside the +-15 deg main lobe.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.cluster import DBSCAN

from .errors import NumericalError
from .radar.frames import RangeDopplerMap
from .radar.pointcloud import CloudPoint

DBSCAN_EPS = 0.3          # m
DBSCAN_MIN_PTS = 4
ASSOC_EPS = 0.10          # m, frame-to-frame centroid gate
GHOST_GRID = 0.25         # m, occupancy quantization
GHOST_MODE_RATIO = 0.5
GHOST_POWER_RATIO = 0.25
MAIN_LOBE_HALF = math.radians(15.0)
SERVO_DWELL_S = 2.0
TRACK_TTL_S = 2.0         # predict-only lifetime before deletion
SIGMA_ACCEL = 1.0         # m/s^2, white-acceleration process noise


def wrap_angle(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


# -- map-level preprocessing ---------------------------------------------------

def remove_static(rd_map: RangeDopplerMap, halfwidth: int | None = None) -> RangeDopplerMap:
    """Zero the doppler rows around zero velocity (static return band)."""
    h = rd_map.config.clutter_halfwidth if halfwidth is None else halfwidth
    power = rd_map.power.copy()
    mid = rd_map.config.doppler_bins // 2
    power[max(0, mid - h): mid + h + 1, :] = 0.0
    return RangeDopplerMap(power=power, config=rd_map.config,
                           timestamp=rd_map.timestamp, radar_angle=rd_map.radar_angle)


# -- global frame --------------------------------------------------------------

@dataclass(frozen=True)
class GlobalPoint:
    """Detection rotated into the fixed (magnetometer-aligned) frame."""

    x: float
    y: float
    d: float
    p: float
    t: float


def to_global(point: CloudPoint, radar_angle: float, t: float,
              radar_position: tuple[float, float] = (0.0, 0.0)) -> GlobalPoint:
    """Radar-frame point -> room frame: rotate by boresight, then translate."""
    c, s = math.cos(radar_angle), math.sin(radar_angle)
    return GlobalPoint(
        x=radar_position[0] + c * point.x - s * point.y,
        y=radar_position[1] + s * point.x + c * point.y,
        d=point.d, p=point.p, t=t,
    )


class PointQueue:
    """Sliding time window of global points with a per-frame budget."""

    def __init__(self, window_s: float = 1.0, max_points_per_frame: int = 64):
        self.window_s = window_s
        self.max_points_per_frame = max_points_per_frame
        self._points: deque[GlobalPoint] = deque()

    def push(self, points: list[GlobalPoint], t: float):
        if len(points) > self.max_points_per_frame:
            points = sorted(points, key=lambda p: -p.p)[: self.max_points_per_frame]
        self._points.extend(points)
        horizon = t - self.window_s
        while self._points and self._points[0].t <= horizon:
            self._points.popleft()

    def clear(self):
        self._points.clear()

    def points(self) -> list[GlobalPoint]:
        return list(self._points)

    def __len__(self) -> int:
        return len(self._points)


# -- clustering and identity ---------------------------------------------------

@dataclass
class Cluster:
    points: list[GlobalPoint]
    cluster_id: int | None = None

    @property
    def centroid(self) -> tuple[float, float]:
        n = len(self.points)
        return (sum(p.x for p in self.points) / n, sum(p.y for p in self.points) / n)

    @property
    def mean_power(self) -> float:
        return sum(p.p for p in self.points) / len(self.points)

    @property
    def newest_t(self) -> float:
        return max(p.t for p in self.points)


def cluster_points(points: list[GlobalPoint], eps: float = DBSCAN_EPS,
                   min_pts: int = DBSCAN_MIN_PTS) -> list[Cluster]:
    """Density clustering over (x, y); noise points are discarded."""
    if len(points) < min_pts:
        return []
    xy = np.array([(p.x, p.y) for p in points])
    labels = DBSCAN(eps=eps, min_samples=min_pts).fit_predict(xy)
    clusters = []
    for lbl in sorted(set(labels) - {-1}):
        members = [p for p, l in zip(points, labels) if l == lbl]
        clusters.append(Cluster(points=members))
    return clusters


def associate_clusters(previous: list[Cluster], current: list[Cluster],
                       eps: float = ASSOC_EPS, next_id: int = 0,
                       ) -> tuple[list[Cluster], int]:
    """Carry ids from the previous frame onto the nearest current centroids.

    Greedy over ascending centroid distance; pairs farther than eps stay
    unmatched and unmatched current clusters get fresh ids.
    """
    pairs = []
    for i, prev in enumerate(previous):
        if prev.cluster_id is None:
            continue
        px, py = prev.centroid
        for j, cur in enumerate(current):
            cx, cy = cur.centroid
            dist = math.hypot(cx - px, cy - py)
            if dist <= eps:
                pairs.append((dist, i, j))
    pairs.sort()
    taken_prev: set[int] = set()
    taken_cur: set[int] = set()
    for _, i, j in pairs:
        if i in taken_prev or j in taken_cur:
            continue
        current[j].cluster_id = previous[i].cluster_id
        taken_prev.add(i)
        taken_cur.add(j)
    for j, cur in enumerate(current):
        if j not in taken_cur and cur.cluster_id is None:
            cur.cluster_id = next_id
            next_id += 1
    return current, next_id


def suppress_ghosts(clusters: list[Cluster], grid: float = GHOST_GRID,
                    mode_ratio: float = GHOST_MODE_RATIO,
                    power_ratio: float = GHOST_POWER_RATIO) -> list[Cluster]:
    """Drop intermittent, weak clusters (wall-mirror ghosts).

    Occurrence = distinct (timestamp, grid cell) pairs among members; a
    cluster survives when its occurrence reaches mode_ratio of the busiest
    cluster AND its mean power reaches power_ratio of the strongest. The
    globally strongest cluster is never removed.
    """
    if not clusters:
        return []
    occurrences = []
    for c in clusters:
        cells = {(p.t, round(p.x / grid), round(p.y / grid)) for p in c.points}
        occurrences.append(len(cells))
    max_occ = max(occurrences)
    powers = [c.mean_power for c in clusters]
    max_power = max(powers)
    strongest = powers.index(max_power)
    kept = []
    for i, c in enumerate(clusters):
        if i == strongest:
            kept.append(c)
        elif occurrences[i] >= mode_ratio * max_occ and powers[i] >= power_ratio * max_power:
            kept.append(c)
    return kept


# -- constant-velocity Kalman filter --------------------------------------------

@dataclass
class Track:
    """State [x, y, vx, vy] with covariance, keyed by cluster id."""

    track_id: int
    state: np.ndarray
    cov: np.ndarray
    last_update_t: float
    missed_updates: int = 0

    @property
    def position(self) -> tuple[float, float]:
        return float(self.state[0]), float(self.state[1])

    @property
    def speed(self) -> float:
        return float(math.hypot(self.state[2], self.state[3]))


def _check_psd(cov: np.ndarray) -> np.ndarray:
    cov = 0.5 * (cov + cov.T)
    eigmin = float(np.linalg.eigvalsh(cov)[0])
    if eigmin < -1e-9:
        raise NumericalError(f"covariance lost positive semi-definiteness ({eigmin})")
    return cov


def new_track(track_id: int, position: tuple[float, float], t: float,
              sigma_meas: float) -> Track:
    state = np.array([position[0], position[1], 0.0, 0.0])
    cov = np.diag([(2 * sigma_meas) ** 2, (2 * sigma_meas) ** 2, 1.0, 1.0])
    return Track(track_id=track_id, state=state, cov=cov, last_update_t=t)


def kalman_step(track: Track, measurement: tuple[float, float] | None, dt: float,
                sigma_accel: float = SIGMA_ACCEL, sigma_meas: float = 0.0436) -> Track:
    """Predict over dt, then update with the measured centroid (if any)."""
    f = np.array([[1, 0, dt, 0], [0, 1, 0, dt], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=float)
    q2, q3, q4 = dt * dt, dt ** 3 / 2.0, dt ** 4 / 4.0
    q = sigma_accel ** 2 * np.array([
        [q4, 0, q3, 0], [0, q4, 0, q3], [q3, 0, q2, 0], [0, q3, 0, q2]])
    state = f @ track.state
    cov = _check_psd(f @ track.cov @ f.T + q)

    if measurement is None:
        return replace(track, state=state, cov=cov,
                       missed_updates=track.missed_updates + 1)

    h = np.array([[1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)
    r = (sigma_meas ** 2) * np.eye(2)
    z = np.array(measurement, dtype=float)
    innovation = z - h @ state
    s = h @ cov @ h.T + r
    gain = np.linalg.solve(s.T, (cov @ h.T).T).T
    state = state + gain @ innovation
    cov = _check_psd((np.eye(4) - gain @ h) @ cov)
    return replace(track, state=state, cov=cov, missed_updates=0,
                   last_update_t=track.last_update_t + dt)


# -- tracker (stateful composition) ---------------------------------------------

@dataclass
class Tracker:
    """Owns the point queue, cluster identities and Kalman tracks."""

    fps: float
    sigma_meas: float
    window_s: float = 1.0
    bridge_gate_m: float = 0.5
    queue: PointQueue = field(init=False)
    clusters: list[Cluster] = field(default_factory=list)
    tracks: dict[int, Track] = field(default_factory=dict)
    next_id: int = 0

    def __post_init__(self):
        self.queue = PointQueue(window_s=self.window_s)

    def restart_clustering(self):
        """Drop pooled points and cluster identities; keep Kalman tracks."""
        self.queue.clear()
        self.clusters = []

    def step(self, points: list[GlobalPoint], t: float,
             allow_deletion: bool = True) -> dict[int, Track]:
        self.queue.push(points, t)
        clusters = cluster_points(self.queue.points())
        clusters, self.next_id = associate_clusters(self.clusters, clusters,
                                                    next_id=self.next_id)
        clusters = suppress_ghosts(clusters)

        # ghost-free fresh clusters near a coasting prediction inherit its id
        coasting = {tid: tr for tid, tr in self.tracks.items()
                    if tr.missed_updates > 0
                    and not any(c.cluster_id == tid for c in clusters)}
        for c in clusters:
            if c.cluster_id in self.tracks or not coasting:
                continue
            cx, cy = c.centroid
            best = min(coasting.items(),
                       key=lambda kv: math.hypot(kv[1].state[0] - cx,
                                                 kv[1].state[1] - cy))
            tid, tr = best
            if math.hypot(tr.state[0] - cx, tr.state[1] - cy) <= self.bridge_gate_m:
                c.cluster_id = tid
                del coasting[tid]

        self.clusters = clusters
        dt = 1.0 / self.fps
        seen: set[int] = set()
        for c in clusters:
            tid = c.cluster_id
            seen.add(tid)
            # measurement: centroid of this frame's points only (the pooled
            # window would lag a moving subject by ~window/2)
            newest = c.newest_t
            fresh = [p for p in c.points if p.t >= newest - 1e-9]
            meas = (sum(p.x for p in fresh) / len(fresh),
                    sum(p.y for p in fresh) / len(fresh))
            if tid not in self.tracks:
                self.tracks[tid] = new_track(tid, meas, t, self.sigma_meas)
            else:
                self.tracks[tid] = kalman_step(self.tracks[tid], meas, dt,
                                               sigma_meas=self.sigma_meas)
        for tid in list(self.tracks):
            if tid in seen:
                continue
            self.tracks[tid] = kalman_step(self.tracks[tid], None, dt,
                                           sigma_meas=self.sigma_meas)
            if allow_deletion and self.tracks[tid].missed_updates > TRACK_TTL_S * self.fps:
                del self.tracks[tid]
        return self.tracks


# -- servo -----------------------------------------------------------------------

@dataclass(frozen=True)
class ServoState:
    theta: float                 # current boresight, rad global
    rotating: bool = False
    target_id: int | None = None
    target_since: float = 0.0
    max_step: float = math.radians(6.0)  # per frame


def servo_command(tracks: dict[int, Track], servo: ServoState,
                  radar_position: tuple[float, float], t: float,
                  lobe_half: float = MAIN_LOBE_HALF,
                  dwell_s: float = SERVO_DWELL_S) -> ServoState:
    """Steer toward out-of-lobe tracks, round-robin with a dwell per target.

    The boresight holds still (rotating=False) whenever every track sits
    inside the +-15 deg main lobe, or no tracks exist.
    """
    if not tracks:
        return replace(servo, rotating=False, target_id=None)

    rx, ry = radar_position
    bearings = {tid: math.atan2(tr.state[1] - ry, tr.state[0] - rx)
                for tid, tr in tracks.items()}
    outside = {tid: b for tid, b in bearings.items()
               if abs(wrap_angle(b - servo.theta)) > lobe_half}
    if not outside:
        return replace(servo, rotating=False, target_id=None)

    target = servo.target_id
    expired = target is None or target not in tracks or (t - servo.target_since) >= dwell_s
    if expired or (target not in outside and target is not None
                   and (t - servo.target_since) >= dwell_s):
        # nearest-first among waiting tracks, then rotate through them
        order = sorted(outside, key=lambda tid: abs(wrap_angle(outside[tid] - servo.theta)))
        if target in order and len(order) > 1 and expired:
            order.remove(target)
        target = order[0]
        since = t
    else:
        since = servo.target_since
        if target not in bearings:
            target = next(iter(outside))
            since = t

    err = wrap_angle(bearings[target] - servo.theta)
    if abs(err) <= lobe_half:
        return replace(servo, rotating=False, target_id=target, target_since=since)
    step = max(-servo.max_step, min(servo.max_step, err))
    return replace(servo, theta=wrap_angle(servo.theta + step), rotating=True,
                   target_id=target, target_since=since)
