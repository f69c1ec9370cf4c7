"""Human-inspectable exports: std heatmaps as CSV, metrics as JSON."""
from __future__ import annotations

import json
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from ..errors import InsufficientDataError
from ..radar.config import profile_config
from ..radar.frames import RangeDopplerMap
from ..tracking import remove_static
from .framelog import LogRecord, RangeDopplerRecord

if TYPE_CHECKING:
    from ..pipeline.metrics import MetricsReport


def std_heatmap(records: list[LogRecord], t_start: float | None = None,
                t_end: float | None = None) -> np.ndarray:
    """Per-cell standard deviation across time of the logged maps.

    Static power is removed from each frame first, so stationary reflectors
    do not dominate the summary. Population std over >= 2 frames.
    """
    maps = []
    for rec in records:
        if not isinstance(rec, RangeDopplerRecord):
            continue
        if t_start is not None and rec.timestamp < t_start:
            continue
        if t_end is not None and rec.timestamp >= t_end:
            continue
        rd = RangeDopplerMap(power=rec.power, config=profile_config(rec.profile),
                             timestamp=rec.timestamp, radar_angle=rec.radar_angle)
        maps.append(remove_static(rd).power)
    if len(maps) < 2:
        raise InsufficientDataError(
            f"std needs >= 2 frames in the window, got {len(maps)}")
    shapes = {m.shape for m in maps}
    if len(shapes) > 1:
        raise InsufficientDataError(f"mixed map shapes in window: {shapes}")
    return np.std(np.stack(maps), axis=0)


def write_csv(matrix: np.ndarray, path):
    np.savetxt(path, np.asarray(matrix), delimiter=",", fmt="%.9g")


def write_metrics_json(report: MetricsReport, path):
    Path(path).write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True))
