"""Per-subject range-doppler slicing and 1 s frame stacking.

Multi-subject maps are carved into single-subject views by keeping a narrow
range window around each subject and flooding the rest with the map minimum,
then fps consecutive maps are stacked into one normalized CNN input tensor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, DiscontinuityError, DomainError
from ..radar.frames import RangeDopplerMap
from ..tracking import remove_static

PAD_BINS = 10             # range window half-width around the subject
ENERGY_FACTOR = 3.0       # column energy gate vs median (noise) column
DB_WINDOW = 50.0          # SNR span mapped onto [0, 1]


def slice_subject(rd_map: RangeDopplerMap, subject_range_bin: int) -> RangeDopplerMap:
    """Keep +-PAD_BINS range columns around the subject, flood the rest.

    Replaced cells take the map's global minimum, so a uniform map passes
    through unchanged and slicing twice at one bin is idempotent.
    """
    d, r = rd_map.power.shape
    if not 0 <= subject_range_bin < r:
        raise DomainError(f"range bin {subject_range_bin} outside [0, {r})")
    lo = max(0, subject_range_bin - PAD_BINS)
    hi = min(r, subject_range_bin + PAD_BINS + 1)
    power = np.full_like(rd_map.power, rd_map.power.min())
    power[:, lo:hi] = rd_map.power[:, lo:hi]
    return RangeDopplerMap(power=power, config=rd_map.config,
                           timestamp=rd_map.timestamp, radar_angle=rd_map.radar_angle)


def subject_range_bins(subjects: list[tuple[int, float]], rd_map: RangeDopplerMap,
                       energy_factor: float = ENERGY_FACTOR,
                       ) -> list[tuple[int, int]]:
    """Range bin per subject, gated on moving energy in that column.

    subjects: (subject_id, range_m) pairs from the tracker. A subject is kept
    when, after static removal, total doppler energy within one bin of its
    rounded range bin clears energy_factor times the median column (tracking
    error can put the rounded bin one off the true return).
    """
    cleaned = remove_static(rd_map)
    cols = cleaned.power.sum(axis=0)
    usable = rd_map.config.usable_range_bins
    floor = energy_factor * float(np.median(cols[:usable + 1]))
    out = []
    for subject_id, range_m in subjects:
        b = int(round(range_m / rd_map.config.range_resolution_m))
        if not 0 <= b < cols.size:
            continue
        lo, hi = max(0, b - 1), min(cols.size, b + 2)
        if cols[lo:hi].max() > floor:
            out.append((subject_id, b))
    return out


@dataclass(frozen=True)
class HeatmapStack:
    """fps frames of one second, channel-stacked and log-scaled to [0, 1]."""

    tensor: np.ndarray       # [channels, D, R] float32 in [0, 1]
    subject_id: int
    window_start: float      # s

    def __post_init__(self):
        t = np.asarray(self.tensor)
        if t.ndim != 3:
            raise DimensionError(f"expected [C, D, R] stack, got {t.shape}")


def stack_frames(maps: list[RangeDopplerMap], subject_id: int = -1) -> HeatmapStack:
    """Stack one second of maps into a [fps, D, R] tensor, scaled to [0, 1].

    Cells become log SNR against the stack's own noise floor (the median of
    everything above the flooded minimum): noise maps to 0, DB_WINDOW dB
    above it to 1.  Limb returns sit decades below the torso in linear power
    and the torso itself swings ~20 dB with subject range, so a log scale
    anchored to noise rather than to the peak is what keeps faint structure
    visible and comparable across ranges.
    """
    if not maps:
        raise DimensionError("no frames to stack")
    config = maps[0].config
    expected = config.stack_channels
    if len(maps) != expected:
        raise DimensionError(f"{config.profile.value} stacks take {expected} "
                             f"frames, got {len(maps)}")
    for m in maps:
        if m.config.profile is not config.profile:
            raise DimensionError("mixed profiles in one stack")
    times = [m.timestamp for m in maps]
    max_gap = 1.5 / config.fps
    for a, b in zip(times, times[1:]):
        if b - a <= 0 or b - a > max_gap:
            raise DiscontinuityError(f"frame gap {b - a:.4f} s outside (0, {max_gap:.4f}]")
    tensor = np.stack([m.power for m in maps]).astype(np.float64)
    live = tensor[tensor > tensor.min()]
    noise = float(np.median(live)) if live.size else float(tensor.max())
    if noise > 0.0:
        decades = DB_WINDOW / 10.0
        tensor = (np.log10(np.clip(tensor / noise, 1.0, 10.0 ** decades))
                  / decades)
    else:
        tensor = np.zeros_like(tensor)
    return HeatmapStack(tensor=tensor.astype(np.float32), subject_id=subject_id,
                        window_start=times[0])
