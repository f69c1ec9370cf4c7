"""Per-frame processing: channel cube -> detection map -> pointclouds.

One ProcessedFrame bundles everything downstream consumers need, whether it
came from live synthesis or from a replayed log.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..radar.cfar import CfarParams, cfar_detect
from ..radar.config import RadarConfig
from ..radar.dsp import rd_cube
from ..radar.frames import ChirpFrame, RangeDopplerMap
from ..radar.pointcloud import CloudPoint, to_pointcloud
from ..tracking import GlobalPoint, to_global


@dataclass(frozen=True)
class ProcessedFrame:
    rd_map: RangeDopplerMap                    # raw (clutter band intact)
    points: list[CloudPoint]                   # radar frame
    global_points: list[GlobalPoint]           # rotated by radar_angle
    cfar: CfarParams = field(default_factory=CfarParams)

    @property
    def timestamp(self) -> float:
        return self.rd_map.timestamp

    @property
    def radar_angle(self) -> float:
        return self.rd_map.radar_angle

    @property
    def config(self) -> RadarConfig:
        return self.rd_map.config


def detect_moving(rd_map: RangeDopplerMap, params: CfarParams):
    """CFAR on the raw map, then discard static-band detections.

    Thresholding before the zero band is applied keeps training cells honest;
    rows inside the clutter band are simply not reported.
    """
    cfg = rd_map.config
    mid = cfg.doppler_bins // 2
    h = cfg.clutter_halfwidth
    return [d for d in cfar_detect(rd_map, params)
            if abs(d.doppler_bin - mid) > h]


def process_frames(frames: list[ChirpFrame],
                   cfar: CfarParams = CfarParams(),
                   radar_position: tuple[float, float] = (0.0, 0.0),
                   ) -> ProcessedFrame:
    """Run the detection chain over one frame's virtual-channel bundle."""
    cfg = frames[0].config
    cube = rd_cube(frames)
    power = (np.abs(cube) ** 2).mean(axis=0)
    rd_map = RangeDopplerMap(power=power, config=cfg,
                             timestamp=frames[0].timestamp,
                             radar_angle=frames[0].radar_angle)
    detections = detect_moving(rd_map, cfar)
    points = to_pointcloud(detections, cube, cfg)
    gpoints = [to_global(p, rd_map.radar_angle, rd_map.timestamp, radar_position)
               for p in points]
    return ProcessedFrame(rd_map=rd_map, points=points, global_points=gpoints,
                          cfar=cfar)


def frame_from_arrays(power: np.ndarray, point_rows: np.ndarray,
                      config: RadarConfig, timestamp: float,
                      radar_angle: float) -> ProcessedFrame:
    """Rebuild a ProcessedFrame from logged payloads (replay path).

    Logged rows hold room-frame coordinates, so both point views carry them
    verbatim; the radar-local view is neither recoverable nor needed here.
    """
    rd_map = RangeDopplerMap(power=power, config=config,
                             timestamp=timestamp, radar_angle=radar_angle)
    rows = np.asarray(point_rows).reshape(-1, 5)
    points = [CloudPoint(x=row[0], y=row[1], z=row[2], d=row[3], p=row[4])
              for row in rows]
    gpoints = [GlobalPoint(x=row[0], y=row[1], d=row[3], p=row[4], t=timestamp)
               for row in rows]
    return ProcessedFrame(rd_map=rd_map, points=points, global_points=gpoints)
